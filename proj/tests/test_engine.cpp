#include "doctest.h"
#include "edsim/decode.hpp"
#include "edsim/policies.hpp"
#include "edsim/validate.hpp"
#include "probe.hpp"

using namespace edsim;

namespace {

Patient make_patient(int id, int grade, double arrival, bool ambulance, bool diagnostic) {
  Patient p;
  p.id = id;
  p.grade = grade;
  p.arrival = arrival;
  p.ambulance = ambulance;
  p.diagnostic = diagnostic;
  if (!(grade == 2)) p.dur_register = 4;
  if (!(grade == 2 && ambulance)) p.dur_triage = 5;
  p.dur_first = 15;
  if (diagnostic) {
    p.dur_diag = 30;
    p.dur_second = 8;
  }
  return p;
}

Instance tiny_instance(std::vector<Patient> ps) {
  Instance inst;
  inst.id = 0;
  inst.scenario_name = "Base";
  inst.patients = std::move(ps);
  return inst;
}

}  // namespace

TEST_CASE("single patient in an idle ED waits nowhere") {
  const ScenarioConfig sc = load_scenario("Base");
  Instance inst = tiny_instance({make_patient(0, 4, 100.0, false, true)});
  Engine engine(sc);
  QpPolicy qp1(1);
  Trace tr = engine.run(inst, qp1);
  const Patient& p = tr.patients[0];
  CHECK(p.w1 == 0);
  CHECK(p.w2 == 0);
  CHECK(p.w3 == 0);
  CHECK(p.w4 == 0);
  CHECK(p.t_sw3 == doctest::Approx(100.0 + 4 + 5));
  CHECK(p.t_first == p.t_sw3);
  CHECK(p.ttd() == doctest::Approx(9.0));
  // w4 starts exactly at diagnostic completion
  CHECK(p.t_sw4 == doctest::Approx(p.t_first + 15 + 30));
  CHECK(p.t_second == p.t_sw4);
  CHECK(p.t_leave == doctest::Approx(p.t_second + 8));
  CHECK(check_trace(inst, sc, tr).empty());
}

TEST_CASE("grade-2 ambulance patients join the first queue on arrival") {
  const ScenarioConfig sc = load_scenario("Base");
  Instance inst = tiny_instance({make_patient(0, 2, 50.0, true, false)});
  Engine engine(sc);
  QpPolicy qp1(1);
  Trace tr = engine.run(inst, qp1);
  CHECK(tr.patients[0].t_sw3 == 50.0);
  CHECK(tr.patients[0].t_first == 50.0);
  CHECK_FALSE(is_set(tr.patients[0].w1));
  CHECK_FALSE(is_set(tr.patients[0].w2));
  CHECK(tr.patients[0].total_wait() == 0.0);
}

TEST_CASE("grade-2 walk-ins skip registration but get triaged") {
  const ScenarioConfig sc = load_scenario("Base");
  Instance inst = tiny_instance({make_patient(0, 2, 50.0, false, false)});
  Engine engine(sc);
  QpPolicy qp1(1);
  Trace tr = engine.run(inst, qp1);
  CHECK_FALSE(is_set(tr.patients[0].w1));
  CHECK(tr.patients[0].w2 == 0);
  CHECK(tr.patients[0].t_sw3 == doctest::Approx(55.0));  // arrival + triage
}

TEST_CASE("simulation is deterministic") {
  const ScenarioConfig sc = load_scenario("Base");
  Instance inst = sample_instance(sc, 0, stream_seed(77, 0));
  Engine engine(sc);
  QpPolicy qp2(2);
  Trace a = engine.run(inst, qp2);
  Trace b = engine.run(inst, qp2);
  CHECK(trace_to_text(a) == trace_to_text(b));
}

TEST_CASE("dispatch_order sorts longest idle first with id tie-break") {
  std::vector<double> idle{10.0, 5.0};
  std::vector<int> ids{1, 2};
  CHECK(dispatch_order(idle, ids) == std::vector<int>{2, 1});  // idle since 5 = longer idle

  std::vector<double> one{3.0};
  std::vector<int> one_id{0};
  CHECK(dispatch_order(one, one_id) == std::vector<int>{0});

  std::vector<double> tie{4.0, 4.0, 4.0};
  std::vector<int> tie_ids{2, 0, 1};
  CHECK(dispatch_order(tie, tie_ids) == std::vector<int>{0, 1, 2});
}

TEST_CASE("eligible queue views") {
  const ScenarioConfig sc = load_scenario("Base");
  SimStateProbe probe(sc, 100.0);

  SUBCASE("all views empty") {
    for (int i = 0; i < kQueueClassCount; ++i) {
      CHECK(probe.st.queue_len(QueueClass::from_index(i), 0) == 0);
      CHECK(probe.st.head(QueueClass::from_index(i), 0) == -1);
      CHECK(probe.st.median(QueueClass::from_index(i), 0) == -1);
    }
    CHECK(probe.st.all_views_empty(0));
  }

  SUBCASE("second-consultation patients are invisible to other doctors") {
    probe.add_second(3, 1, 10.0, 90.0);
    QueueClass q32(3, Consult::Second);
    CHECK(probe.st.queue_len(q32, 1) == 1);
    CHECK(probe.st.queue_len(q32, 2) == 0);
    CHECK(probe.st.all_views_empty(2));
    CHECK_FALSE(probe.st.all_views_empty(1));
  }

  SUBCASE("median of a 3-element queue is the second") {
    int32_t a = probe.add_first(4, 10, 20);
    int32_t b = probe.add_first(4, 11, 25);
    probe.add_first(4, 12, 30);
    QueueClass q41(4, Consult::First);
    CHECK(probe.st.median(q41, 0) == b);
    CHECK(probe.st.head(q41, 0) == a);
    // even length: lower median
    probe.add_first(4, 13, 35);
    CHECK(probe.st.median(q41, 0) == b);
  }
}

TEST_CASE("warmup_filter keeps the closed arrival window") {
  const ScenarioConfig sc = load_scenario("Base");
  std::vector<Patient> ps;
  for (double t : {479.9, 480.0, 800.0, 1200.0, 1200.1}) {
    Patient p;
    p.arrival = t;
    p.t_leave = 1500.0;  // discharge time is irrelevant
    ps.push_back(p);
  }
  auto kept = warmup_filter(ps, sc);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].arrival == 480.0);
  CHECK(kept[2].arrival == 1200.0);
}

TEST_CASE("policy contract violations fault with a state dump") {
  const ScenarioConfig sc = load_scenario("Base");
  Instance inst = tiny_instance({make_patient(0, 4, 100.0, false, false)});
  Engine engine(sc);

  struct NonePolicy final : SelectionPolicy {
    std::optional<QueueClass> select(const SimState&, int) override { return std::nullopt; }
  } none_policy;
  CHECK_THROWS_WITH_AS(engine.run(inst, none_policy),
                       doctest::Contains("policy returned none"), std::runtime_error);

  struct EmptyQueuePolicy final : SelectionPolicy {
    std::optional<QueueClass> select(const SimState&, int) override {
      return QueueClass(2, Consult::First);  // always empty here
    }
  } empty_policy;
  CHECK_THROWS_WITH_AS(engine.run(inst, empty_policy), doctest::Contains("empty queue"),
                       std::runtime_error);
}

TEST_CASE("engine invariants hold on sampled instances under QP policies") {
  const ScenarioConfig sc = load_scenario("Base");
  for (int i = 0; i < 3; ++i) {
    Instance inst = sample_instance(sc, i, stream_seed(123, uint64_t(i)));
    for (int k = 1; k <= 4; ++k) {
      Engine engine(sc);
      QpPolicy qp(k);
      Trace tr = engine.run(inst, qp);
      auto violations = check_trace(inst, sc, tr);
      for (const std::string& v : violations) MESSAGE(v);
      CHECK(violations.empty());
    }
  }
}

TEST_CASE("flow conservation on a sampled instance") {
  const ScenarioConfig sc = load_scenario("Base");
  Instance inst = sample_instance(sc, 5, stream_seed(124, 5));
  Engine engine(sc);
  QpPolicy qp3(3);
  Trace tr = engine.run(inst, qp3);
  REQUIRE(tr.patients.size() == inst.patients.size());
  size_t expected_dispatches = inst.patients.size();
  for (const Patient& p : inst.patients) expected_dispatches += p.diagnostic;
  CHECK(tr.dispatches.size() == expected_dispatches);
  for (const Patient& p : tr.patients) CHECK(is_set(p.t_leave));
}
