#include "edsim/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "edsim/parallel.hpp"
#include "edsim/textio.hpp"
#include "edsim/validate.hpp"

namespace edsim {

namespace {

std::unique_ptr<SelectionPolicy> make_policy(const PolicyRef& ref, const Instance& inst) {
  if (ref.kind == "qp") return std::make_unique<QpPolicy>(ref.qp);
  if (ref.kind == "apq") return std::make_unique<ApqPolicy>(ref.beta);
  if (ref.kind == "ml") return std::make_unique<MlPolicy>(*ref.forest);
  if (ref.kind == "seq") {
    // either a directory of per-instance sequences or one sequence file
    std::string path = std::filesystem::is_directory(ref.seq_dir)
                           ? opt_sequence_path(ref.seq_dir, inst.id)
                           : ref.seq_dir;
    QueueSequence seq = sequence_from_text(read_file(path));
    return std::make_unique<SequencePolicy>(std::move(seq));
  }
  throw std::logic_error("unknown policy kind " + ref.kind);
}

const char* kScopeNames[5] = {"overall", "grade2", "grade3", "grade4", "grade5"};

}  // namespace

PolicyRef parse_policy_ref(const std::string& spec) {
  PolicyRef ref;
  ref.label = spec;
  if (spec == "qp1" || spec == "qp2" || spec == "qp3" || spec == "qp4") {
    ref.kind = "qp";
    ref.qp = spec[2] - '0';
    return ref;
  }
  auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("bad policy spec: " + spec +
                             " (use qp1..qp4, apq:<file>, ml:<file>, seq:<dir>)");
  std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
  if (kind == "apq") {
    ref.kind = "apq";
    ref.beta = load_beta(arg);
    ref.label = "apq";
  } else if (kind == "ml") {
    ref.kind = "ml";
    ref.forest = std::make_shared<Forest>(load_forest(arg));
    ref.label = "ml-opt";
  } else if (kind == "seq") {
    ref.kind = "seq";
    ref.seq_dir = arg;
    ref.label = "opt";
  } else {
    throw std::runtime_error("bad policy spec: " + spec);
  }
  return ref;
}

ExperimentReport run_experiment(const ScenarioConfig& sc, const ObjectiveWeights& w,
                                const std::vector<PolicyRef>& policies,
                                std::span<const Instance> instances, int workers) {
  ExperimentReport rep;
  rep.scenario = sc.name;
  rep.objective = w.name;
  rep.n_instances = instances.size();

  for (const PolicyRef& ref : policies) {
    std::vector<std::vector<Patient>> filtered(instances.size());
    parallel_for(int(instances.size()), workers, [&](int i) {
      Engine engine(sc);
      auto policy = make_policy(ref, instances[size_t(i)]);
      Trace tr = engine.run(instances[size_t(i)], *policy);
      filtered[size_t(i)] = warmup_filter(tr.patients, sc);
    });
    std::vector<Patient> pool;
    for (auto& v : filtered) pool.insert(pool.end(), v.begin(), v.end());

    PolicyOutcome out;
    out.label = ref.label;
    out.objective = objective_eval(pool, w, sc);

    std::array<std::vector<double>, 5> met, w1v, wv;
    for (const Patient& p : pool) {
      int j = grade_index(p.grade);
      double ok = p.ttd() <= sc.ttd_target[size_t(j)] ? 1.0 : 0.0;
      met[0].push_back(ok);
      met[size_t(j) + 1].push_back(ok);
      if (p.diagnostic) {
        wv[0].push_back(p.total_wait());
        wv[size_t(j) + 1].push_back(p.total_wait());
      } else {
        w1v[0].push_back(p.total_wait());
        w1v[size_t(j) + 1].push_back(p.total_wait());
      }
    }
    for (int s = 0; s < 5; ++s) {
      out.share[size_t(s)] = met[size_t(s)].empty() ? MeanCi{0, 0, true} : mean_ci(met[size_t(s)]);
      out.wait_w1[size_t(s)] = w1v[size_t(s)].empty() ? MeanCi{0, 0, true} : mean_ci(w1v[size_t(s)]);
      out.wait_w[size_t(s)] = wv[size_t(s)].empty() ? MeanCi{0, 0, true} : mean_ci(wv[size_t(s)]);
    }
    rep.policies.push_back(std::move(out));
  }

  for (size_t i = 0; i < policies.size(); ++i) {
    if (policies[i].kind != "qp") continue;
    if (!rep.has_qp || rep.policies[i].objective < rep.min_qp) {
      rep.min_qp = rep.policies[i].objective;
      rep.min_qp_label = rep.policies[i].label;
    }
    rep.has_qp = true;
  }
  if (rep.has_qp && rep.min_qp != 0)
    for (PolicyOutcome& p : rep.policies)
      p.improvement = (rep.min_qp - p.objective) / rep.min_qp;
  return rep;
}

std::string report_objectives_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "policy,objective,improvement_vs_min_qp\n";
  for (const PolicyOutcome& p : r.policies)
    os << p.label << ',' << format_double(p.objective, 6) << ','
       << format_double(p.improvement, 6) << '\n';
  if (r.has_qp) os << "min_qp," << format_double(r.min_qp, 6) << ",0.000000\n";
  return os.str();
}

std::string report_shares_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "policy,scope,share,ci_halfwidth\n";
  for (const PolicyOutcome& p : r.policies)
    for (int s = 0; s < 5; ++s)
      os << p.label << ',' << kScopeNames[s] << ',' << format_double(p.share[size_t(s)].mean, 6)
         << ',' << format_double(p.share[size_t(s)].halfwidth, 6) << '\n';
  return os.str();
}

std::string report_waits_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "policy,measure,scope,mean,ci_halfwidth\n";
  for (const PolicyOutcome& p : r.policies)
    for (int m = 0; m < 2; ++m)
      for (int s = 0; s < 5; ++s) {
        const MeanCi& v = m == 0 ? p.wait_w1[size_t(s)] : p.wait_w[size_t(s)];
        os << p.label << ',' << (m == 0 ? "W1" : "W") << ',' << kScopeNames[s] << ','
           << format_double(v.mean, 6) << ',' << format_double(v.halfwidth, 6) << '\n';
      }
  return os.str();
}

namespace {
void table_row(std::ostringstream& os, const std::string& label,
               const std::array<MeanCi, 5>& vals, int precision, bool percent) {
  char buf[64];
  os << "  " << label;
  for (size_t i = label.size(); i < 10; ++i) os << ' ';
  for (int s = 0; s < 5; ++s) {
    double scale = percent ? 100.0 : 1.0;
    std::snprintf(buf, sizeof(buf), "%8.*f +-%6.*f", precision, vals[size_t(s)].mean * scale,
                  precision, vals[size_t(s)].halfwidth * scale);
    os << buf;
  }
  os << '\n';
}
}  // namespace

std::string report_text(const ExperimentReport& r) {
  std::ostringstream os;
  os << "scenario " << r.scenario << ", objective " << r.objective << ", " << r.n_instances
     << " instances\n\n";
  os << "objective values (pooled, warm-up filtered)\n";
  char buf[128];
  for (const PolicyOutcome& p : r.policies) {
    std::snprintf(buf, sizeof(buf), "  %-8s %12.4f   improvement vs min QP %7.2f%%\n",
                  p.label.c_str(), p.objective, p.improvement * 100.0);
    os << buf;
  }
  if (r.has_qp) {
    std::snprintf(buf, sizeof(buf), "  min QP = %.4f (%s)\n", r.min_qp, r.min_qp_label.c_str());
    os << buf;
  }
  os << "\nTTD target shares (%)            overall          2               3               4               5\n";
  for (const PolicyOutcome& p : r.policies) table_row(os, p.label, p.share, 2, true);
  os << "\nmean total wait, one consultation (min)\n";
  for (const PolicyOutcome& p : r.policies) table_row(os, p.label, p.wait_w1, 2, false);
  os << "\nmean total wait, two consultations (min)\n";
  for (const PolicyOutcome& p : r.policies) table_row(os, p.label, p.wait_w, 2, false);
  return os.str();
}

std::string prediction_metrics_csv(const ClassificationReport& r, size_t n_train_samples,
                                   size_t n_test_samples) {
  std::ostringstream os;
  os << "metric,value\n";
  os << "mcc," << format_double(r.mcc, 6) << '\n';
  os << "overall_accuracy," << format_double(r.overall_accuracy, 6) << '\n';
  os << "train_samples," << n_train_samples << '\n';
  os << "test_samples," << n_test_samples << '\n';
  for (int i = 0; i < kQueueClassCount; ++i)
    os << "accuracy_" << QueueClass::from_index(i).name() << ','
       << format_double(r.accuracy[size_t(i)], 6) << '\n';
  for (int i = 0; i < kQueueClassCount; ++i)
    os << "recall_" << QueueClass::from_index(i).name() << ','
       << format_double(r.recall[size_t(i)], 6) << '\n';
  return os.str();
}

std::string prediction_metrics_text(const ClassificationReport& r) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "MCC %.3f, overall accuracy %.1f%%\n", r.mcc,
                100.0 * r.overall_accuracy);
  os << buf;
  os << "per-class accuracy (predicted-class precision) / recall:\n";
  for (int i = 0; i < kQueueClassCount; ++i) {
    std::snprintf(buf, sizeof(buf), "  %s  %6.1f%% / %6.1f%%\n",
                  QueueClass::from_index(i).name().c_str(), 100.0 * r.accuracy[size_t(i)],
                  100.0 * r.recall[size_t(i)]);
    os << buf;
  }
  return os.str();
}

std::string opt_sequence_path(const std::string& dir, int32_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "/seq_%06d.txt", id);
  return dir + buf;
}

std::string opt_trace_path(const std::string& dir, int32_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "/trace_%06d.txt", id);
  return dir + buf;
}

OptimizeSummary optimize_instances(std::span<const Instance> instances, const ScenarioConfig& sc,
                                   const ObjectiveWeights& w, const SaParams& params,
                                   uint64_t master_seed, const std::string& out_dir, int workers,
                                   bool progress) {
  ensure_dir(out_dir);
  OptimizeSummary sum;
  sum.qp_best.resize(instances.size());
  sum.sa_best.resize(instances.size());
  parallel_for(int(instances.size()), workers, [&](int i) {
    const Instance& inst = instances[size_t(i)];
    RaceResult r = race_optimize(inst, sc, w, params, stream_seed(master_seed, uint64_t(inst.id)), 1);
    sum.qp_best[size_t(i)] = r.initial_objective;
    sum.sa_best[size_t(i)] = r.best_objective;
    atomic_write(opt_sequence_path(out_dir, inst.id),
                 sequence_to_text(r.best_sequence, r.best_objective));
    atomic_write(opt_trace_path(out_dir, inst.id), trace_to_text(r.trace));
    if (progress) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "  instance %6d: qp %.4f -> sa %.4f (phase best %.4f %.4f %.4f)\n", inst.id,
                    r.initial_objective, r.best_objective, r.phase_best[0], r.phase_best[1],
                    r.phase_best[2]);
      std::cerr << buf;
    }
  });
  std::ostringstream os;
  os << "instance,qp_best,sa_best,improvement\n";
  for (size_t i = 0; i < instances.size(); ++i) {
    double rel = sum.qp_best[i] > 0 ? (sum.qp_best[i] - sum.sa_best[i]) / sum.qp_best[i] : 0.0;
    os << instances[i].id << ',' << format_double_exact(sum.qp_best[i]) << ','
       << format_double_exact(sum.sa_best[i]) << ',' << format_double(rel, 6) << '\n';
  }
  atomic_write(out_dir + "/opt_objectives.csv", os.str());
  return sum;
}

ForestArtifacts train_forest_split(const SampleSet& samples, const ForestParams& params,
                                   double test_fraction, uint64_t seed, int workers) {
  // split by instance id: the top fraction of ids is held out
  std::vector<int32_t> ids(samples.instance_id.begin(), samples.instance_id.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  size_t n_test_inst = size_t(double(ids.size()) * test_fraction + 0.5);
  if (n_test_inst == 0 || n_test_inst >= ids.size())
    throw std::invalid_argument("train_forest_split: bad test fraction for instance count");
  int32_t first_test_id = ids[ids.size() - n_test_inst];

  SampleSet train, test;
  train.dim = test.dim = samples.dim;
  for (size_t i = 0; i < samples.size(); ++i) {
    SampleSet& dst = samples.instance_id[i] >= first_test_id ? test : train;
    const float* row = samples.row(i);
    dst.features.insert(dst.features.end(), row, row + samples.dim);
    dst.labels.push_back(samples.labels[i]);
    dst.instance_id.push_back(samples.instance_id[i]);
  }

  Rng os_rng = Rng::stream(seed, 0x05);
  SampleSet balanced = oversample(train, os_rng);

  ForestArtifacts art;
  art.n_train_samples = balanced.size();
  art.n_test_samples = test.size();
  art.forest = train_forest(balanced, params, seed, workers);

  std::vector<uint8_t> preds(test.size());
  parallel_for(int(test.size()), workers,
               [&](int i) { preds[size_t(i)] = art.forest.predict(test.row(size_t(i))); });
  art.heldout = accuracy_mcc(preds, test.labels);
  return art;
}

// ---------------------------------------------------------------------------
// pipeline staging

namespace {

struct Stage {
  std::string dir;       // pipeline out dir
  std::string name;
  std::string params;    // stringized stage parameters
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  std::string manifest_path() const { return dir + "/" + name + ".manifest"; }

  // paths are recorded relative to the pipeline dir so reruns into another
  // directory stay byte-identical
  std::string rel(const std::string& p) const {
    return p.rfind(dir + "/", 0) == 0 ? p.substr(dir.size() + 1) : p;
  }

  std::string render() const {
    std::ostringstream os;
    os << "# edsim-manifest v1\n";
    os << "stage " << name << '\n';
    os << "params " << fnv1a64(params) << '\n';
    for (const std::string& p : inputs)
      os << "input " << rel(p) << ' ' << fnv1a64(read_file(p)) << '\n';
    for (const std::string& p : outputs)
      os << "output " << rel(p) << ' ' << fnv1a64(read_file(p)) << '\n';
    return os.str();
  }

  bool up_to_date() const {
    if (!file_exists(manifest_path())) return false;
    for (const std::string& p : inputs)
      if (!file_exists(p)) return false;
    for (const std::string& p : outputs)
      if (!file_exists(p)) return false;
    return read_file(manifest_path()) == render();
  }

  void commit() const { atomic_write(manifest_path(), render()); }
};

std::string sa_params_string(const SaParams& p) {
  std::ostringstream os;
  os << p.iters1 << ',' << p.iters2 << ',' << p.iters3 << ';' << p.survivors1 << ','
     << p.survivors2 << ',' << p.survivors3 << ';' << p.t_init << ',' << p.t_floor << ','
     << p.cooling << ';' << p.b_max << ',' << p.d_max << ',' << p.segment << ';' << p.op_gamma
     << ',' << p.cp_gamma << ';' << p.sigma_best << ',' << p.sigma_improved << ','
     << p.sigma_accepted << ',' << p.cp_sigma_improved << ';' << p.bucket_size;
  return os.str();
}

std::vector<std::string> instance_paths(const std::string& dir, int count) {
  std::vector<std::string> v;
  v.reserve(size_t(count));
  for (int i = 0; i < count; ++i) v.push_back(dir + "/" + instance_file_name(i));
  return v;
}

}  // namespace

void run_pipeline(const PipelineConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("pipeline: out dir required");
  const ScenarioConfig sc = load_scenario(cfg.scenario);
  const ObjectiveWeights w = load_objective(cfg.objective);
  // schedules for the pure target measure are optimized under the C-120
  // surrogate; everything is still evaluated under the requested measure
  const ObjectiveWeights w_opt = w.name == "ttdl" ? load_objective("c120") : w;
  ensure_dir(cfg.out_dir);

  auto log = [&](const std::string& msg) {
    if (!cfg.quiet) std::cerr << "[pipeline] " << msg << '\n';
  };
  auto run_stage = [&](Stage& st, const std::function<void()>& body) {
    if (cfg.resume && st.up_to_date()) {
      log("stage " + st.name + ": up to date, skipped");
      return;
    }
    log("stage " + st.name + " ...");
    body();
    st.commit();
    log("stage " + st.name + " done");
  };

  const std::string train_dir = cfg.out_dir + "/instances/train";
  const std::string eval_dir = cfg.out_dir + "/instances/eval";
  const std::string opt_dir = cfg.out_dir + "/opt";
  const std::string samples_path = cfg.out_dir + "/samples/train_samples.bin";
  const std::string forest_path = cfg.out_dir + "/forest/forest_" + w.name + ".txt";
  const std::string pred_csv = cfg.out_dir + "/forest/prediction_metrics.csv";
  const std::string pred_txt = cfg.out_dir + "/forest/prediction_metrics.txt";
  const std::string weights_path = cfg.out_dir + "/apq/apq_weights_" + w.name + ".txt";
  const std::string ga_hist_path = cfg.out_dir + "/apq/ga_history.csv";
  const std::string report_dir = cfg.out_dir + "/report";

  const uint64_t seed_train = stream_seed(cfg.seed, 0x101);
  const uint64_t seed_eval = stream_seed(cfg.seed, 0x102);
  const uint64_t seed_opt = stream_seed(cfg.seed, 0x103);
  const uint64_t seed_forest = stream_seed(cfg.seed, 0x104);
  const uint64_t seed_ga = stream_seed(cfg.seed, 0x105);

  {
    Stage st{cfg.out_dir, "gen-train",
             sc.name + "/" + std::to_string(cfg.n_train) + "/" + std::to_string(seed_train),
             {},
             instance_paths(train_dir, cfg.n_train)};
    run_stage(st, [&] { gen_instances(sc, cfg.n_train, seed_train, train_dir, cfg.workers); });
  }
  {
    Stage st{cfg.out_dir, "gen-eval",
             sc.name + "/" + std::to_string(cfg.n_eval) + "/" + std::to_string(seed_eval),
             {},
             instance_paths(eval_dir, cfg.n_eval)};
    run_stage(st, [&] { gen_instances(sc, cfg.n_eval, seed_eval, eval_dir, cfg.workers); });
  }

  std::vector<Instance> train;  // loaded lazily, stages may be skipped
  auto load_train = [&]() {
    if (train.empty()) train = load_instances(train_dir);
  };

  {
    std::vector<std::string> outputs;
    for (int i = 0; i < cfg.n_train; ++i) {
      outputs.push_back(opt_sequence_path(opt_dir, i));
      outputs.push_back(opt_trace_path(opt_dir, i));
    }
    outputs.push_back(opt_dir + "/opt_objectives.csv");
    Stage st{cfg.out_dir, "optimize",
             w_opt.name + "/" + sa_params_string(cfg.sa) + "/" + std::to_string(seed_opt),
             instance_paths(train_dir, cfg.n_train), outputs};
    run_stage(st, [&] {
      load_train();
      optimize_instances(train, sc, w_opt, cfg.sa, seed_opt, opt_dir, cfg.workers, !cfg.quiet);
    });
  }

  {
    Stage st{cfg.out_dir, "harvest", w_opt.name, instance_paths(train_dir, cfg.n_train),
             {samples_path}};
    for (int i = 0; i < cfg.n_train; ++i) st.inputs.push_back(opt_trace_path(opt_dir, i));
    run_stage(st, [&] {
      load_train();
      std::vector<SampleSet> parts(train.size());
      parallel_for(int(train.size()), cfg.workers, [&](int i) {
        Trace tr = trace_from_text(read_file(opt_trace_path(opt_dir, train[size_t(i)].id)));
        parts[size_t(i)] = harvest_samples(tr, train[size_t(i)], sc);
      });
      SampleSet all;
      for (const SampleSet& p : parts) all.append(p);
      save_samples(all, samples_path);
    });
  }

  {
    std::ostringstream params;
    params << cfg.forest.n_trees << '/' << cfg.forest.subsample << '/'
           << cfg.forest.features_per_split << '/' << cfg.forest.max_depth << '/'
           << cfg.forest.min_samples_leaf << '/' << cfg.test_fraction << '/' << seed_forest;
    Stage st{cfg.out_dir, "train-forest", params.str(), {samples_path},
             {forest_path, pred_csv, pred_txt}};
    run_stage(st, [&] {
      SampleSet samples = load_samples(samples_path);
      ForestArtifacts art =
          train_forest_split(samples, cfg.forest, cfg.test_fraction, seed_forest, cfg.workers);
      save_forest(art.forest, forest_path);
      atomic_write(pred_csv,
                   prediction_metrics_csv(art.heldout, art.n_train_samples, art.n_test_samples));
      atomic_write(pred_txt, prediction_metrics_text(art.heldout));
    });
  }

  {
    std::ostringstream params;
    params << cfg.ga.population << '/' << cfg.ga.elite << '/' << cfg.ga.offspring << '/'
           << cfg.ga.mutants << '/' << cfg.ga.p_mut << '/' << cfg.ga.generations << '/' << seed_ga
           << '/' << w.name;
    Stage st{cfg.out_dir, "tune-apq", params.str(), instance_paths(train_dir, cfg.n_train),
             {weights_path, ga_hist_path}};
    run_stage(st, [&] {
      load_train();
      GaResult res = ga_run(train, sc, w, cfg.ga, seed_ga, cfg.workers);
      std::ostringstream os;
      save_beta(res.best, res.best_fitness, os);
      atomic_write(weights_path, os.str());
      std::ostringstream hist;
      hist << "generation,best_fitness,population_valid,diversified\n";
      for (const GaGenerationInfo& g : res.history)
        hist << g.generation << ',' << format_double_exact(g.best_fitness) << ','
             << int(g.population_valid) << ',' << int(g.diversified) << '\n';
      atomic_write(ga_hist_path, hist.str());
    });
  }

  {
    Stage st{cfg.out_dir, "evaluate", w.name, instance_paths(eval_dir, cfg.n_eval),
             {report_dir + "/objectives.csv", report_dir + "/shares.csv",
              report_dir + "/waits.csv", report_dir + "/report.txt"}};
    st.inputs.push_back(forest_path);
    st.inputs.push_back(weights_path);
    run_stage(st, [&] {
      std::vector<Instance> eval = load_instances(eval_dir);
      std::vector<PolicyRef> policies;
      for (int k = 1; k <= 4; ++k) policies.push_back(parse_policy_ref("qp" + std::to_string(k)));
      policies.push_back(parse_policy_ref("apq:" + weights_path));
      policies.push_back(parse_policy_ref("ml:" + forest_path));
      ExperimentReport rep = run_experiment(sc, w, policies, eval, cfg.workers);

      // OPT row: the optimized schedules themselves, on the training set
      load_train();
      std::vector<PolicyRef> opt_ref{parse_policy_ref("seq:" + opt_dir)};
      ExperimentReport opt_rep = run_experiment(sc, w, opt_ref, train, cfg.workers);
      PolicyOutcome opt_row = opt_rep.policies[0];
      if (rep.has_qp && rep.min_qp != 0)
        opt_row.improvement = (rep.min_qp - opt_row.objective) / rep.min_qp;
      rep.policies.push_back(opt_row);

      atomic_write(report_dir + "/objectives.csv", report_objectives_csv(rep));
      atomic_write(report_dir + "/shares.csv", report_shares_csv(rep));
      atomic_write(report_dir + "/waits.csv", report_waits_csv(rep));
      std::string txt = report_text(rep);
      txt += "\n(the opt row is evaluated on the training instances; its schedules exist only there)\n";
      txt += "\nprediction quality on held-out instances:\n" + read_file(pred_txt);
      atomic_write(report_dir + "/report.txt", txt);
    });
  }
  log("pipeline complete, report under " + report_dir);
}

}  // namespace edsim
