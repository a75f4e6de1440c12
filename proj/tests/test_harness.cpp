#include <filesystem>

#include "doctest.h"
#include "edsim/harness.hpp"
#include "edsim/parallel.hpp"
#include "edsim/textio.hpp"

using namespace edsim;

namespace {

std::vector<Instance> eval_set(const ScenarioConfig& sc, int n, uint64_t seed) {
  std::vector<Instance> v;
  for (int i = 0; i < n; ++i) v.push_back(sample_instance(sc, i, stream_seed(seed, uint64_t(i))));
  return v;
}

}  // namespace

TEST_CASE("run_experiment pools patients and ranks policies") {
  const ScenarioConfig sc = load_scenario("Base");
  const ObjectiveWeights w = load_objective("c15");
  auto instances = eval_set(sc, 3, 900);

  std::vector<PolicyRef> policies;
  for (int k = 1; k <= 4; ++k) policies.push_back(parse_policy_ref("qp" + std::to_string(k)));
  ExperimentReport rep = run_experiment(sc, w, policies, instances, 1);

  REQUIRE(rep.policies.size() == 4);
  CHECK(rep.has_qp);
  for (const PolicyOutcome& p : rep.policies) CHECK(p.objective >= rep.min_qp);

  // the pooled objective equals objective_eval on the concatenated filtered set
  std::vector<Patient> pool;
  for (const Instance& inst : instances) {
    Engine engine(sc);
    QpPolicy qp1(1);
    Trace tr = engine.run(inst, qp1);
    auto kept = warmup_filter(tr.patients, sc);
    pool.insert(pool.end(), kept.begin(), kept.end());
  }
  CHECK(rep.policies[0].objective == objective_eval(pool, w, sc));

  // a duplicate of the winning QP reports exactly 0% improvement
  std::string min_label = rep.min_qp_label;
  std::vector<PolicyRef> twice{parse_policy_ref(min_label), parse_policy_ref(min_label)};
  ExperimentReport rep2 = run_experiment(sc, w, twice, instances, 1);
  CHECK(rep2.policies[0].improvement == 0.0);
  CHECK(rep2.policies[1].improvement == 0.0);
}

TEST_CASE("experiment reports are byte-stable and worker-count independent") {
  const ScenarioConfig sc = load_scenario("Base");
  const ObjectiveWeights w = load_objective("c15");
  auto instances = eval_set(sc, 3, 901);
  std::vector<PolicyRef> policies{parse_policy_ref("qp1"), parse_policy_ref("qp3")};

  ExperimentReport a = run_experiment(sc, w, policies, instances, 1);
  ExperimentReport b = run_experiment(sc, w, policies, instances, 4);
  CHECK(report_objectives_csv(a) == report_objectives_csv(b));
  CHECK(report_shares_csv(a) == report_shares_csv(b));
  CHECK(report_waits_csv(a) == report_waits_csv(b));
  CHECK(report_text(a) == report_text(b));
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<int> hits(257, 0);
  parallel_for(257, 4, [&](int i) { hits[size_t(i)] += 1; });
  for (int h : hits) CHECK(h == 1);
  std::vector<int> serial_hits(31, 0);
  parallel_for(31, 1, [&](int i) { serial_hits[size_t(i)] += 1; });
  for (int h : serial_hits) CHECK(h == 1);
}

TEST_CASE("parallel_for propagates worker exceptions") {
  CHECK_THROWS_AS(parallel_for(8, 4,
                               [&](int i) {
                                 if (i == 5) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("race results are independent of the worker count") {
  const ScenarioConfig sc = load_scenario("Base");
  const ObjectiveWeights w = load_objective("c15");
  Instance inst = sample_instance(sc, 0, stream_seed(902, 0));
  SaParams params;
  params.iters1 = 150;
  params.iters2 = 300;
  params.iters3 = 450;
  params.survivors1 = 4;
  params.survivors2 = 2;
  params.survivors3 = 1;
  RaceResult serial = race_optimize(inst, sc, w, params, 5, 1);
  RaceResult parallel = race_optimize(inst, sc, w, params, 5, 4);
  CHECK(serial.best_objective == parallel.best_objective);
  CHECK(serial.best_sequence == parallel.best_sequence);
}

TEST_CASE("tiny pipeline runs end to end, resumes, and rebuilds stale stages") {
  namespace fs = std::filesystem;
  const std::string out = "/tmp/edsim_test_pipeline";
  fs::remove_all(out);

  PipelineConfig cfg;
  cfg.scenario = "Base";
  cfg.objective = "c15";
  cfg.seed = 11;
  cfg.n_train = 6;
  cfg.n_eval = 4;
  cfg.sa.iters1 = 60;
  cfg.sa.iters2 = 120;
  cfg.sa.iters3 = 180;
  cfg.sa.survivors1 = 3;
  cfg.sa.survivors2 = 2;
  cfg.sa.survivors3 = 1;
  cfg.ga.population = 10;
  cfg.ga.elite = 3;
  cfg.ga.offspring = 5;
  cfg.ga.mutants = 2;
  cfg.ga.generations = 2;
  cfg.forest.n_trees = 8;
  cfg.test_fraction = 0.34;  // 2 of 6 instances held out
  cfg.out_dir = out;
  cfg.workers = 1;
  cfg.quiet = true;

  run_pipeline(cfg);
  REQUIRE(file_exists(out + "/report/report.txt"));
  REQUIRE(file_exists(out + "/forest/forest_c15.txt"));
  REQUIRE(file_exists(out + "/apq/apq_weights_c15.txt"));
  std::string report_a = read_file(out + "/report/report.txt");
  std::string forest_a = read_file(out + "/forest/forest_c15.txt");

  // resume: everything up to date, outputs unchanged
  auto opt_mtime = fs::last_write_time(out + "/opt/seq_000000.txt");
  cfg.resume = true;
  run_pipeline(cfg);
  CHECK(fs::last_write_time(out + "/opt/seq_000000.txt") == opt_mtime);
  CHECK(read_file(out + "/report/report.txt") == report_a);

  // deleting the forest invalidates only the forest and evaluation stages
  fs::remove(out + "/forest/forest_c15.txt");
  run_pipeline(cfg);
  CHECK(fs::last_write_time(out + "/opt/seq_000000.txt") == opt_mtime);  // not re-optimized
  CHECK(read_file(out + "/forest/forest_c15.txt") == forest_a);          // rebuilt identically
  CHECK(read_file(out + "/report/report.txt") == report_a);

  // a rerun from scratch with the same seed is byte-identical
  const std::string out2 = "/tmp/edsim_test_pipeline_b";
  fs::remove_all(out2);
  cfg.out_dir = out2;
  cfg.resume = false;
  run_pipeline(cfg);
  CHECK(read_file(out2 + "/report/report.txt") == report_a);
  CHECK(read_file(out2 + "/forest/forest_c15.txt") == forest_a);
  CHECK(read_file(out2 + "/report/objectives.csv") == read_file(out + "/report/objectives.csv"));

  // a parameter change invalidates the optimize stage but not generation
  cfg.out_dir = out2;
  cfg.resume = true;
  cfg.sa.iters3 = 240;
  auto gen_before = fs::last_write_time(out2 + "/instances/train/" + instance_file_name(0));
  auto seq_before = fs::last_write_time(out2 + "/opt/seq_000000.txt");
  run_pipeline(cfg);
  CHECK(fs::last_write_time(out2 + "/instances/train/" + instance_file_name(0)) == gen_before);
  CHECK(fs::last_write_time(out2 + "/opt/seq_000000.txt") != seq_before);
}

TEST_CASE("policy specs parse and reject garbage") {
  CHECK(parse_policy_ref("qp1").kind == "qp");
  CHECK(parse_policy_ref("qp4").qp == 4);
  CHECK_THROWS(parse_policy_ref("qp5"));
  CHECK_THROWS(parse_policy_ref("mystery"));
  CHECK_THROWS(parse_policy_ref("apq:/nonexistent/file.txt"));
}
