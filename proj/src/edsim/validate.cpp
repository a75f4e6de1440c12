#include "edsim/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace edsim {

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

struct Checker {
  const Instance& inst;
  const ScenarioConfig& sc;
  const Trace& trace;
  std::vector<std::string> out;

  template <class... Args>
  void fail(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    out.push_back(os.str());
  }

  void flow_and_chains() {
    if (trace.patients.size() != inst.patients.size()) {
      fail("patient count mismatch: ", trace.patients.size(), " vs ", inst.patients.size());
      return;
    }
    std::vector<int> n_dispatch(inst.patients.size(), 0);
    double last_t = -1;
    for (const DispatchRecord& d : trace.dispatches) {
      if (d.t < last_t) fail("dispatch times decrease at patient ", d.patient);
      last_t = d.t;
      if (d.patient < 0 || size_t(d.patient) >= inst.patients.size()) {
        fail("dispatch references unknown patient ", d.patient);
        continue;
      }
      ++n_dispatch[size_t(d.patient)];
      const Patient& p = trace.patients[size_t(d.patient)];
      if (d.queue.grade() != p.grade) fail("dispatch grade mismatch for patient ", d.patient);
      double expected = d.queue.is_second() ? p.t_second : p.t_first;
      if (!close(d.t, expected)) fail("dispatch time mismatch for patient ", d.patient);
    }

    for (size_t i = 0; i < inst.patients.size(); ++i) {
      const Patient& ref = inst.patients[i];
      const Patient& p = trace.patients[i];
      if (p.id != ref.id || p.grade != ref.grade || p.arrival != ref.arrival ||
          p.diagnostic != ref.diagnostic || p.ambulance != ref.ambulance) {
        fail("patient ", ref.id, " attributes differ from the instance");
        continue;
      }
      int want = 1 + (ref.diagnostic ? 1 : 0);
      if (n_dispatch[i] != want)
        fail("patient ", ref.id, " dispatched ", n_dispatch[i], " times, expected ", want);
      if (!is_set(p.t_leave)) {
        fail("patient ", ref.id, " never discharged");
        continue;
      }

      // timestamp chain against the sampled durations
      double t = p.arrival;
      if (p.grade == 2 && p.ambulance) {
        if (!close(p.t_sw3, p.arrival)) fail("patient ", ref.id, ": ambulance t_sw3 != arrival");
      } else if (p.grade == 2) {
        t += p.w2 + p.dur_triage;
        if (!close(p.t_sw3, t)) fail("patient ", ref.id, ": walk-in grade-2 t_sw3 chain broken");
      } else {
        t += p.w1 + p.dur_register + p.w2 + p.dur_triage;
        if (!close(p.t_sw3, t)) fail("patient ", ref.id, ": t_sw3 chain broken");
      }
      if (!close(p.t_first, p.t_sw3 + p.w3)) fail("patient ", ref.id, ": t_first chain broken");
      double first_end = p.t_first + p.dur_first;
      if (p.diagnostic) {
        if (!close(p.t_sw4, first_end + p.dur_diag))
          fail("patient ", ref.id, ": w4 does not start at diagnostic completion");
        if (!close(p.t_second, p.t_sw4 + p.w4)) fail("patient ", ref.id, ": t_second chain broken");
        if (!close(p.t_leave, p.t_second + p.dur_second))
          fail("patient ", ref.id, ": t_leave chain broken");
      } else {
        if (!close(p.t_leave, first_end)) fail("patient ", ref.id, ": t_leave chain broken");
        if (is_set(p.t_second) || is_set(p.w4) || is_set(p.t_sw4))
          fail("patient ", ref.id, ": second-consultation fields set without diagnostics");
      }
    }
  }

  void same_doctor() {
    std::vector<int> first_doc(inst.patients.size(), -1);
    for (const DispatchRecord& d : trace.dispatches) {
      if (d.patient < 0 || size_t(d.patient) >= inst.patients.size()) continue;
      if (!d.queue.is_second()) {
        first_doc[size_t(d.patient)] = d.doctor;
      } else if (first_doc[size_t(d.patient)] != d.doctor) {
        fail("patient ", d.patient, " saw doctor ", d.doctor, " for the second consultation, first was ",
             first_doc[size_t(d.patient)]);
      }
    }
  }

  // service order must follow wait-start order within every queue view
  void fifo() {
    std::vector<int> first_doc(inst.patients.size(), -1);
    for (const DispatchRecord& d : trace.dispatches)
      if (!d.queue.is_second() && d.patient >= 0) first_doc[size_t(d.patient)] = d.doctor;

    auto check_queue = [&](const std::vector<std::pair<double, double>>& entries, const char* what) {
      for (size_t a = 0; a < entries.size(); ++a)
        for (size_t b = 0; b < entries.size(); ++b)
          if (entries[a].first < entries[b].first && entries[a].second > entries[b].second) {
            fail("FIFO violation in ", what);
            return;
          }
    };
    for (int j = 0; j < kGradeCount; ++j) {
      std::vector<std::pair<double, double>> q1;
      for (const Patient& p : trace.patients)
        if (grade_index(p.grade) == j) q1.push_back({p.t_sw3, p.t_first});
      check_queue(q1, ("Q" + std::to_string(j + kGradeMin) + ",1").c_str());
      for (int d = 0; d < sc.n_doctors; ++d) {
        std::vector<std::pair<double, double>> q2;
        for (const Patient& p : trace.patients)
          if (p.diagnostic && grade_index(p.grade) == j && first_doc[size_t(p.id)] == d)
            q2.push_back({p.t_sw4, p.t_second});
        check_queue(q2, ("Q" + std::to_string(j + kGradeMin) + ",2 doctor " + std::to_string(d)).c_str());
      }
    }
  }

  void resources() {
    // doctors: one consultation at a time
    std::vector<int> first_doc(inst.patients.size(), -1);
    for (const DispatchRecord& d : trace.dispatches)
      if (!d.queue.is_second() && d.patient >= 0) first_doc[size_t(d.patient)] = d.doctor;
    std::vector<std::vector<std::pair<double, double>>> busy(size_t(sc.n_doctors));
    for (const Patient& p : trace.patients) {
      if (first_doc[size_t(p.id)] < 0) continue;
      auto& b = busy[size_t(first_doc[size_t(p.id)])];
      b.push_back({p.t_first, p.t_first + p.dur_first});
      if (p.diagnostic) b.push_back({p.t_second, p.t_second + p.dur_second});
    }
    for (size_t d = 0; d < busy.size(); ++d) {
      auto& b = busy[d];
      std::sort(b.begin(), b.end());
      for (size_t i = 1; i < b.size(); ++i)
        if (b[i].first < b[i - 1].second - 1e-9) fail("doctor ", d, " double-booked");
    }

    // clerks and nurses: concurrent activities within the configured counts
    auto sweep = [&](std::vector<std::pair<double, int>> ev, int limit, const char* what) {
      // frees sort before starts at equal times: a resource released at t may
      // be reused at t
      std::sort(ev.begin(), ev.end());
      int busy_count = 0;
      for (auto& [t, delta] : ev) {
        busy_count += delta;
        if (busy_count > limit) {
          fail(what, " occupancy exceeds ", limit);
          return;
        }
      }
    };
    std::vector<std::pair<double, int>> reg_ev, tri_ev;
    for (const Patient& p : trace.patients) {
      if (is_set(p.dur_register)) {
        double start = p.arrival + p.w1;
        reg_ev.push_back({start, +1});
        reg_ev.push_back({start + p.dur_register, -1});
      }
      if (is_set(p.dur_triage)) {
        double start = p.grade == 2 ? p.arrival + p.w2
                                    : p.arrival + p.w1 + p.dur_register + p.w2;
        tri_ev.push_back({start, +1});
        tri_ev.push_back({start + p.dur_triage, -1});
      }
    }
    sweep(std::move(reg_ev), sc.n_clerks, "clerk");
    sweep(std::move(tri_ev), sc.n_nurses, "nurse");
  }
};

}  // namespace

std::vector<std::string> check_trace(const Instance& inst, const ScenarioConfig& sc,
                                     const Trace& trace) {
  Checker c{inst, sc, trace, {}};
  c.flow_and_chains();
  c.same_doctor();
  c.fifo();
  c.resources();
  return c.out;
}

}  // namespace edsim
