#pragma once

#include <utility>

#include "edsim/decode.hpp"
#include "edsim/rng.hpp"

namespace edsim {

// Roulette selector over operator (or bucket) weights with segment-wise
// exponential smoothing of performance scores.
class AdaptiveSelector {
 public:
  enum class Outcome { NewBest, Improved, AcceptedWorse, Rejected };

  AdaptiveSelector(int n, double gamma, double sigma_best, double sigma_improved,
                   double sigma_accepted)
      : w_(size_t(n), 1.0),
        pi_(size_t(n), 0.0),
        gamma_(gamma),
        sigma_best_(sigma_best),
        sigma_improved_(sigma_improved),
        sigma_accepted_(sigma_accepted) {}

  int size() const { return int(w_.size()); }
  int pick(Rng& rng) const;
  void reward(int k, Outcome o);
  void segment_update();  // w <- gamma*w + (1-gamma)*pi, pi <- 0
  void reset_uniform();
  double weight(int k) const { return w_[size_t(k)]; }
  double score(int k) const { return pi_[size_t(k)]; }

 private:
  std::vector<double> w_, pi_;
  double gamma_, sigma_best_, sigma_improved_, sigma_accepted_;
};

// Positions p where seq[p-1] != seq[p].
std::vector<int> change_points(std::span<const uint8_t> seq);

// Swaps the equal-sized blocks before and after the change point; the size is
// clipped so both blocks fit inside the sequence.
void nb_block(QueueSequence& seq, int cp, int size);

// The [begin, end) token range an insertion move removes around a change
// point: up to `size` tokens on each side, clipped at the sequence bounds.
std::pair<int, int> insert_block_range(int len, int cp, int size);

// Removes the block around the change point and reinserts it at the removal
// point in an order drawn sequentially with probability proportional to
// per-position weights (uniform when weights is empty or sums to zero).
// Weights are indexed by position in seq.
void nb_insert(QueueSequence& seq, int cp, int size, std::span<const double> weights, Rng& rng);

struct SaParams {
  // race phase iteration caps and survivor counts; desk-scale defaults,
  // full-scale (25000, 50000, 200000) stays available through config
  int iters1 = 5000, iters2 = 10000, iters3 = 20000;
  int survivors1 = 10, survivors2 = 3, survivors3 = 1;

  double t_init = 2.0, t_floor = 0.3, cooling = 0.999975;
  int b_max = 10;
  int d_max = 2000;
  int segment = 5000;
  double op_gamma = 0.95;
  double cp_gamma = 0.99;
  double sigma_best = 0.5, sigma_improved = 2.0, sigma_accepted = 0.25;
  double cp_sigma_improved = 1.0;  // the change-point selector's sigma_2
  int bucket_size = 10;

  void validate() const;
};

// One annealing run over a single instance; phases of the race continue the
// same state, mirroring the init/restore split of the algorithm.
class SaRun {
 public:
  SaRun(const Instance& inst, const ScenarioConfig& sc, const ObjectiveWeights& w,
        const SaParams& params, uint64_t seed);

  void continue_to(int iter_max);

  double best_objective() const { return f_best_; }
  double initial_objective() const { return f_start_; }
  int initial_qp() const { return start_qp_; }
  const QueueSequence& best_sequence() const { return best_; }
  int iterations() const { return iter_; }
  double temperature() const { return temp_; }
  int block_limit() const { return b_; }

  // (iteration, best objective) at every improvement, for monotonicity checks
  const std::vector<std::pair<int, double>>& trajectory() const { return trajectory_; }
  bool trajectory_monotone() const { return monotone_; }

 private:
  void accept(DecodeResult&& r);
  void rebuild_context();
  int pick_change_point(int* bucket_out);
  QueueSequence make_neighbor(int op, int cp, int size);
  void diversify();

  const Instance* inst_;
  const ScenarioConfig* sc_;
  const ObjectiveWeights* w_;
  const SaParams* params_;
  Engine engine_;
  Rng rng_;

  QueueSequence cur_, best_;
  double f_cur_ = 0, f_best_ = 0, f_start_ = 0;
  int start_qp_ = 1;
  Trace cur_trace_;
  std::vector<double> cur_contrib_;  // per dispatch position of cur_
  int n_buckets_ = 1;

  AdaptiveSelector op_sel_;
  AdaptiveSelector cp_sel_;
  int iter_ = 0;
  int last_improv_ = 0;
  double temp_;
  int b_;

  std::vector<std::pair<int, double>> trajectory_;
  bool monotone_ = true;
};

struct RaceResult {
  QueueSequence best_sequence;
  double best_objective = 0;
  double initial_objective = 0;
  int initial_qp = 1;
  Trace trace;  // decode of the best sequence
  std::vector<std::pair<int, double>> trajectory;
  bool trajectory_monotone = true;
  std::array<double, 3> phase_best{};  // best objective after each phase
};

// Staged restart race: survivors1 seeded runs to iters1, the best survivors2
// continue to iters2, the best survivors3 to iters3. Deterministic given the
// master seed; racers run on their own RNG streams.
RaceResult race_optimize(const Instance& inst, const ScenarioConfig& sc, const ObjectiveWeights& w,
                         const SaParams& params, uint64_t master_seed, int workers = 1);

}  // namespace edsim
