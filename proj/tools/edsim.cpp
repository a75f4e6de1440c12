#include <iostream>

#include "CLI11.hpp"
#include "edsim/harness.hpp"
#include "edsim/parallel.hpp"
#include "edsim/textio.hpp"

using namespace edsim;

namespace {

void parse_triplet(const std::string& s, int* a, int* b, int* c) {
  if (std::sscanf(s.c_str(), "%d,%d,%d", a, b, c) != 3)
    throw CLI::ValidationError("expected three comma-separated integers, got " + s);
}

SaParams sa_from(const std::string& iters, const std::string& survivors, int bmax, int dmax) {
  SaParams p;
  if (!iters.empty()) parse_triplet(iters, &p.iters1, &p.iters2, &p.iters3);
  if (!survivors.empty()) parse_triplet(survivors, &p.survivors1, &p.survivors2, &p.survivors3);
  if (bmax > 0) p.b_max = bmax;
  if (dmax > 0) p.d_max = dmax;
  p.validate();
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edsim: emergency-department scheduling simulation-optimization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // --workers may follow the subcommand

  int workers = hardware_workers();
  app.add_option("--workers", workers, "worker threads for parallel stages")->capture_default_str();

  std::string scenario = "Base", objective = "c15", out, instances_dir;
  uint64_t seed = 1;

  // gen-instances
  auto* gen = app.add_subcommand("gen-instances", "sample deterministic 24h instances");
  int gen_count = 300;
  gen->add_option("--scenario", scenario, "preset name or scenario file");
  gen->add_option("--count", gen_count, "number of instances")->capture_default_str();
  gen->add_option("--seed", seed, "master seed");
  gen->add_option("--out", out, "output directory")->required();

  // optimize
  auto* opt = app.add_subcommand("optimize", "race-annealing schedules for each instance");
  std::string opt_iters, opt_survivors;
  int opt_bmax = 0, opt_dmax = 0;
  opt->add_option("--instances", instances_dir, "instance directory")->required();
  opt->add_option("--scenario", scenario);
  opt->add_option("--objective", objective, "ttdl|c30|c15|twt");
  opt->add_option("--out", out, "output directory")->required();
  opt->add_option("--seed", seed);
  opt->add_option("--iters", opt_iters, "phase iterations a,b,c (default 5000,10000,20000)");
  opt->add_option("--survivors", opt_survivors, "race survivors x,y,z (default 10,3,1)");
  opt->add_option("--bmax", opt_bmax, "max neighborhood block size");
  opt->add_option("--dmax", opt_dmax, "diversification stagnation limit");

  // harvest
  auto* harv = app.add_subcommand("harvest", "extract state/decision samples from optimized traces");
  std::string harv_opt_dir;
  harv->add_option("--instances", instances_dir)->required();
  harv->add_option("--opt", harv_opt_dir, "optimize output directory")->required();
  harv->add_option("--scenario", scenario);
  harv->add_option("--out", out, "samples file")->required();

  // train-forest
  auto* tf = app.add_subcommand("train-forest", "fit the decision forest on harvested samples");
  std::string tf_samples, tf_metrics;
  ForestParams tf_params;
  double tf_test_fraction = 0.1;
  tf->add_option("--samples", tf_samples)->required();
  tf->add_option("--out", out, "forest file")->required();
  tf->add_option("--metrics-out", tf_metrics, "prediction metrics csv");
  tf->add_option("--trees", tf_params.n_trees)->capture_default_str();
  tf->add_option("--max-depth", tf_params.max_depth)->capture_default_str();
  tf->add_option("--test-fraction", tf_test_fraction, "held-out fraction of instances")
      ->capture_default_str();
  tf->add_option("--seed", seed);

  // tune-apq
  auto* ga = app.add_subcommand("tune-apq", "genetic tuning of APQ weights");
  GaParams ga_params;
  ga_params.generations = 60;
  std::string ga_hist;
  ga->add_option("--instances", instances_dir)->required();
  ga->add_option("--scenario", scenario);
  ga->add_option("--objective", objective);
  ga->add_option("--seed", seed);
  ga->add_option("--out", out, "weights file")->required();
  ga->add_option("--generations", ga_params.generations)->capture_default_str();
  ga->add_option("--population", ga_params.population)->capture_default_str();
  ga->add_option("--history-out", ga_hist, "per-generation history csv");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "benchmark policies on an instance set");
  std::vector<std::string> ev_policies;
  ev->add_option("--instances", instances_dir)->required();
  ev->add_option("--scenario", scenario);
  ev->add_option("--objective", objective);
  ev->add_option("--policy", ev_policies,
                 "qp1..qp4 | apq:<file> | ml:<file> | seq:<dir> (repeatable)")
      ->required();
  ev->add_option("--out", out, "report directory")->required();

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "full train/optimize/fit/evaluate run");
  PipelineConfig plc;
  std::string pl_iters, pl_survivors;
  bool pl_full = false;
  pl->add_option("--scenario", plc.scenario);
  pl->add_option("--objective", plc.objective);
  pl->add_option("--seed", plc.seed);
  pl->add_option("--out", plc.out_dir)->required();
  pl->add_option("--train", plc.n_train, "training instances")->capture_default_str();
  pl->add_option("--eval", plc.n_eval, "evaluation instances")->capture_default_str();
  pl->add_option("--iters", pl_iters, "SA phase iterations a,b,c");
  pl->add_option("--survivors", pl_survivors, "race survivors x,y,z");
  pl->add_option("--generations", plc.ga.generations, "GA generations")->capture_default_str();
  pl->add_flag("--resume", plc.resume, "skip stages whose inputs are unchanged");
  pl->add_flag("--full", pl_full, "paper-scale sizes (10k instances, 25k/50k/200k iterations)");

  // report
  auto* rp = app.add_subcommand("report", "print a stored report");
  std::string rp_dir;
  rp->add_option("--dir", rp_dir, "report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      gen_instances(load_scenario(scenario), gen_count, seed, out, workers);
      std::cout << "wrote " << gen_count << " instances to " << out << '\n';
    } else if (*opt) {
      SaParams params = sa_from(opt_iters, opt_survivors, opt_bmax, opt_dmax);
      ObjectiveWeights w = load_objective(objective);
      if (w.name == "ttdl") w = load_objective("c120");  // step-shaped target objective
      std::vector<Instance> inst = load_instances(instances_dir);
      OptimizeSummary sum = optimize_instances(inst, load_scenario(scenario), w, params, seed, out,
                                               workers, true);
      double meanrel = 0;
      for (size_t i = 0; i < sum.sa_best.size(); ++i)
        meanrel += (sum.qp_best[i] - sum.sa_best[i]) / sum.qp_best[i];
      std::cout << "optimized " << inst.size() << " instances, mean improvement "
                << format_double(100.0 * meanrel / double(inst.size()), 2) << "%\n";
    } else if (*harv) {
      ScenarioConfig sc = load_scenario(scenario);
      std::vector<Instance> inst = load_instances(instances_dir);
      std::vector<SampleSet> parts(inst.size());
      parallel_for(int(inst.size()), workers, [&](int i) {
        Trace tr = trace_from_text(read_file(opt_trace_path(harv_opt_dir, inst[size_t(i)].id)));
        parts[size_t(i)] = harvest_samples(tr, inst[size_t(i)], sc);
      });
      SampleSet all;
      for (const SampleSet& p : parts) all.append(p);
      save_samples(all, out);
      std::cout << "harvested " << all.size() << " samples\n";
    } else if (*tf) {
      SampleSet samples = load_samples(tf_samples);
      ForestArtifacts art = train_forest_split(samples, tf_params, tf_test_fraction, seed, workers);
      save_forest(art.forest, out);
      if (!tf_metrics.empty())
        atomic_write(tf_metrics,
                     prediction_metrics_csv(art.heldout, art.n_train_samples, art.n_test_samples));
      std::cout << prediction_metrics_text(art.heldout);
    } else if (*ga) {
      std::vector<Instance> inst = load_instances(instances_dir);
      GaResult res = ga_run(inst, load_scenario(scenario), load_objective(objective), ga_params,
                            seed, workers);
      std::ostringstream os;
      save_beta(res.best, res.best_fitness, os);
      atomic_write(out, os.str());
      if (!ga_hist.empty()) {
        std::ostringstream hist;
        hist << "generation,best_fitness,population_valid,diversified\n";
        for (const GaGenerationInfo& g : res.history)
          hist << g.generation << ',' << format_double_exact(g.best_fitness) << ','
               << int(g.population_valid) << ',' << int(g.diversified) << '\n';
        atomic_write(ga_hist, hist.str());
      }
      std::cout << "best fitness " << format_double(res.best_fitness, 4) << " -> " << out << '\n';
    } else if (*ev) {
      std::vector<PolicyRef> refs;
      for (const std::string& s : ev_policies) refs.push_back(parse_policy_ref(s));
      std::vector<Instance> inst = load_instances(instances_dir);
      ExperimentReport rep = run_experiment(load_scenario(scenario), load_objective(objective),
                                            refs, inst, workers);
      atomic_write(out + "/objectives.csv", report_objectives_csv(rep));
      atomic_write(out + "/shares.csv", report_shares_csv(rep));
      atomic_write(out + "/waits.csv", report_waits_csv(rep));
      atomic_write(out + "/report.txt", report_text(rep));
      std::cout << report_text(rep);
    } else if (*pl) {
      if (pl_full) {
        plc.n_train = plc.n_eval = 10000;
        plc.sa.iters1 = 25000;
        plc.sa.iters2 = 50000;
        plc.sa.iters3 = 200000;
        plc.ga.generations = 200;
        std::cerr << "warning: paper-scale pipeline; expect hours to days of runtime\n";
      }
      if (!pl_iters.empty() || !pl_survivors.empty())
        plc.sa = sa_from(pl_iters, pl_survivors, 0, 0);
      plc.workers = workers;
      run_pipeline(plc);
    } else if (*rp) {
      std::cout << read_file(rp_dir + "/report.txt");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
