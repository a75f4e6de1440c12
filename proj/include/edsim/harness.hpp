#pragma once

#include <memory>
#include <optional>

#include "edsim/forest.hpp"
#include "edsim/ga.hpp"
#include "edsim/metrics.hpp"
#include "edsim/mlpolicy.hpp"
#include "edsim/sa.hpp"

namespace edsim {

// A policy named on the command line: qp1..qp4, apq:<weights-file>,
// ml:<forest-file> or seq:<dir-with-per-instance-sequences>.
struct PolicyRef {
  std::string label;
  std::string kind;  // qp | apq | ml | seq
  int qp = 0;
  BetaWeights beta;
  std::shared_ptr<const Forest> forest;
  std::string seq_dir;
};

PolicyRef parse_policy_ref(const std::string& spec);

struct PolicyOutcome {
  std::string label;
  double objective = 0;           // pooled, warm-up filtered
  double improvement = 0;         // (min_qp - objective) / min_qp when QPs present
  std::array<MeanCi, 5> share;    // TTD target shares: overall, grades 2..5
  std::array<MeanCi, 5> wait_w1;  // patients leaving after the first consultation
  std::array<MeanCi, 5> wait_w;   // patients with a second consultation
};

struct ExperimentReport {
  std::string scenario;
  std::string objective;
  size_t n_instances = 0;
  std::vector<PolicyOutcome> policies;
  bool has_qp = false;
  double min_qp = 0;
  std::string min_qp_label;
};

// Simulates every instance under every policy, pools warm-up filtered
// patients, and computes the pooled objective plus per-grade share and
// waiting-time statistics with 95% confidence intervals.
ExperimentReport run_experiment(const ScenarioConfig& sc, const ObjectiveWeights& w,
                                const std::vector<PolicyRef>& policies,
                                std::span<const Instance> instances, int workers = 1);

std::string report_objectives_csv(const ExperimentReport& r);
std::string report_shares_csv(const ExperimentReport& r);
std::string report_waits_csv(const ExperimentReport& r);
std::string report_text(const ExperimentReport& r);

std::string prediction_metrics_csv(const ClassificationReport& r, size_t n_train_samples,
                                   size_t n_test_samples);
std::string prediction_metrics_text(const ClassificationReport& r);

// Per-instance optimization artifacts live under <dir>/seq_XXXXXX.txt and
// <dir>/trace_XXXXXX.txt plus an opt_objectives.csv index.
std::string opt_sequence_path(const std::string& dir, int32_t id);
std::string opt_trace_path(const std::string& dir, int32_t id);

struct OptimizeSummary {
  std::vector<double> qp_best;  // per instance
  std::vector<double> sa_best;
};

OptimizeSummary optimize_instances(std::span<const Instance> instances, const ScenarioConfig& sc,
                                   const ObjectiveWeights& w, const SaParams& params,
                                   uint64_t master_seed, const std::string& out_dir, int workers,
                                   bool progress = false);

// Pooled-forest training artifacts of one pipeline run.
struct ForestArtifacts {
  Forest forest;
  ClassificationReport heldout;
  size_t n_train_samples = 0;
  size_t n_test_samples = 0;
};

ForestArtifacts train_forest_split(const SampleSet& samples, const ForestParams& params,
                                   double test_fraction, uint64_t seed, int workers);

struct PipelineConfig {
  std::string scenario = "Base";
  std::string objective = "c15";
  uint64_t seed = 1;
  int n_train = 300;
  int n_eval = 300;
  SaParams sa;
  GaParams ga;           // generations pre-set to the desk-scale 60
  ForestParams forest;
  double test_fraction = 0.1;
  std::string out_dir;
  int workers = 1;
  bool resume = false;
  bool quiet = false;

  PipelineConfig() { ga.generations = 60; }
};

// End-to-end: instance generation, per-instance optimization, sample
// harvesting, forest training, APQ tuning, evaluation and reports. Every
// stage persists its outputs and a manifest of input hashes; with resume,
// stages whose inputs and outputs still match are skipped.
void run_pipeline(const PipelineConfig& cfg);

}  // namespace edsim
