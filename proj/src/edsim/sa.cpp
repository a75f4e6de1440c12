#include "edsim/sa.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "edsim/parallel.hpp"

namespace edsim {

int AdaptiveSelector::pick(Rng& rng) const {
  double total = std::accumulate(w_.begin(), w_.end(), 0.0);
  if (total <= 0.0) return int(rng.below(w_.size()));
  double u = rng.next_double() * total;
  double acc = 0.0;
  for (size_t k = 0; k < w_.size(); ++k) {
    acc += w_[k];
    if (u < acc) return int(k);
  }
  return int(w_.size()) - 1;
}

void AdaptiveSelector::reward(int k, Outcome o) {
  switch (o) {
    case Outcome::NewBest: pi_[size_t(k)] += sigma_best_; break;
    case Outcome::Improved: pi_[size_t(k)] += sigma_improved_; break;
    case Outcome::AcceptedWorse: pi_[size_t(k)] += sigma_accepted_; break;
    case Outcome::Rejected: break;
  }
}

void AdaptiveSelector::segment_update() {
  for (size_t k = 0; k < w_.size(); ++k) {
    w_[k] = gamma_ * w_[k] + (1.0 - gamma_) * pi_[k];
    pi_[k] = 0.0;
  }
}

void AdaptiveSelector::reset_uniform() {
  std::fill(w_.begin(), w_.end(), 1.0);
  std::fill(pi_.begin(), pi_.end(), 0.0);
}

std::vector<int> change_points(std::span<const uint8_t> seq) {
  std::vector<int> cps;
  for (size_t p = 1; p < seq.size(); ++p)
    if (seq[p - 1] != seq[p]) cps.push_back(int(p));
  return cps;
}

void nb_block(QueueSequence& seq, int cp, int size) {
  int len = int(seq.size());
  int s = std::min({size, cp, len - cp});
  if (s < 1) return;
  std::rotate(seq.begin() + (cp - s), seq.begin() + cp, seq.begin() + (cp + s));
}

std::pair<int, int> insert_block_range(int len, int cp, int size) {
  int left = std::min(size, cp);
  int right = std::min(size, len - cp);
  return {cp - left, cp + right};
}

void nb_insert(QueueSequence& seq, int cp, int size, std::span<const double> weights, Rng& rng) {
  auto [r0, r1] = insert_block_range(int(seq.size()), cp, size);
  int m = r1 - r0;
  if (m <= 1) return;

  // pool of (token, weight); draw sequentially proportional to weight
  std::vector<uint8_t> pool(seq.begin() + r0, seq.begin() + r1);
  std::vector<double> w(size_t(m), 1.0);
  if (!weights.empty())
    for (int i = 0; i < m; ++i) w[size_t(i)] = weights[size_t(r0 + i)];

  for (int out = r0; out < r1; ++out) {
    int n = int(pool.size());
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    int picked;
    if (total <= 0.0) {
      picked = int(rng.below(uint64_t(n)));  // uniform fallback for degenerate weights
    } else {
      double u = rng.next_double() * total;
      double acc = 0.0;
      picked = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += w[size_t(i)];
        if (u < acc) {
          picked = i;
          break;
        }
      }
    }
    seq[size_t(out)] = pool[size_t(picked)];
    pool.erase(pool.begin() + picked);
    w.erase(w.begin() + picked);
  }
}

void SaParams::validate() const {
  if (!(iters1 < iters2 && iters2 < iters3))
    throw std::invalid_argument("race phases must satisfy iters1 < iters2 < iters3");
  if (!(survivors1 >= survivors2 && survivors2 >= survivors3 && survivors3 >= 1))
    throw std::invalid_argument("race survivors must be non-increasing and >= 1");
  if (b_max < 1 || d_max < 1 || segment < 1 || bucket_size < 1)
    throw std::invalid_argument("sa parameters must be positive");
  if (!(t_floor > 0 && t_init >= t_floor && cooling > 0 && cooling < 1))
    throw std::invalid_argument("bad temperature schedule");
}

SaRun::SaRun(const Instance& inst, const ScenarioConfig& sc, const ObjectiveWeights& w,
             const SaParams& params, uint64_t seed)
    : inst_(&inst),
      sc_(&sc),
      w_(&w),
      params_(&params),
      engine_(sc),
      rng_(seed),
      op_sel_(3, params.op_gamma, params.sigma_best, params.sigma_improved, params.sigma_accepted),
      cp_sel_(1, params.cp_gamma, params.sigma_best, params.cp_sigma_improved,
              params.sigma_accepted),
      temp_(params.t_init),
      b_(params.b_max) {
  InitialSolution init = encode_initial(inst, sc, w, engine_);
  f_start_ = init.objective;
  start_qp_ = init.qp_index;
  cur_ = init.sequence;
  best_ = init.sequence;
  f_cur_ = f_best_ = init.objective;
  cur_trace_ = std::move(init.trace);
  rebuild_context();
  n_buckets_ = int(cur_.size()) / params.bucket_size + 1;
  cp_sel_ = AdaptiveSelector(n_buckets_, params.cp_gamma, params.sigma_best,
                             params.cp_sigma_improved, params.sigma_accepted);
  trajectory_.emplace_back(0, f_best_);
}

void SaRun::rebuild_context() {
  CohortStats stats = cohort_stats(cur_trace_.patients, *sc_);
  cur_contrib_.resize(cur_trace_.dispatches.size());
  for (size_t i = 0; i < cur_trace_.dispatches.size(); ++i) {
    const Patient& p = cur_trace_.patients[size_t(cur_trace_.dispatches[i].patient)];
    cur_contrib_[i] = patient_contribution(p, stats, *w_, *sc_);
  }
}

void SaRun::accept(DecodeResult&& r) {
  cur_ = std::move(r.actual);
  f_cur_ = r.objective;
  cur_trace_ = std::move(r.trace);
  rebuild_context();
}

// Bucket via the adaptive selector, then uniform among the bucket's live
// change points; empty buckets are redrawn. Returns -1 when the sequence has
// no change point at all.
int SaRun::pick_change_point(int* bucket_out) {
  std::vector<int> cps = change_points(cur_);
  if (cps.empty()) return -1;
  for (int tries = 0; tries < 64 * n_buckets_; ++tries) {
    int bucket = cp_sel_.pick(rng_);
    int lo = bucket * params_->bucket_size, hi = lo + params_->bucket_size;
    auto first = std::lower_bound(cps.begin(), cps.end(), lo);
    auto last = std::lower_bound(cps.begin(), cps.end(), hi);
    if (first == last) continue;
    int n = int(last - first);
    int cp = *(first + int(rng_.below(uint64_t(n))));
    *bucket_out = bucket;
    return cp;
  }
  // weights degenerate on dead buckets; fall back to a uniform change point
  int cp = cps[size_t(rng_.below(cps.size()))];
  *bucket_out = cp / params_->bucket_size;
  return cp;
}

QueueSequence SaRun::make_neighbor(int op, int cp, int size) {
  QueueSequence next = cur_;
  switch (op) {
    case 0: nb_block(next, cp, size); break;
    case 1: nb_insert(next, cp, size, {}, rng_); break;
    case 2: nb_insert(next, cp, size, cur_contrib_, rng_); break;
    default: throw std::logic_error("unknown neighborhood operator");
  }
  assert(sequence_counts(next) == sequence_counts(cur_));
  return next;
}

void SaRun::diversify() {
  last_improv_ = iter_;
  b_ = params_->b_max;
  temp_ = std::min(temp_ * 2.0, 2.0);
  op_sel_.reset_uniform();
  cp_sel_.reset_uniform();
  int bucket = 0;
  int cp = pick_change_point(&bucket);
  if (cp < 0) return;
  QueueSequence next = cur_;
  // queue-insertion move: every removed token is weighted by the aggregated
  // length of its queue class right after the dispatch preceding the block
  auto [r0, r1] = insert_block_range(int(cur_.size()), cp, params_->b_max);
  std::vector<double> weights(cur_.size(), 0.0);
  if (r0 > 0)
    for (int pos = r0; pos < r1; ++pos)
      weights[size_t(pos)] = double(cur_trace_.queue_lens_after[size_t(r0 - 1)][cur_[size_t(pos)]]);
  nb_insert(next, cp, params_->b_max, weights, rng_);
  accept(decode(next, *inst_, *sc_, *w_, engine_));
}

void SaRun::continue_to(int iter_max) {
  while (iter_ < iter_max) {
    ++iter_;
    temp_ = std::max(temp_ * params_->cooling, params_->t_floor);
    if (iter_ % params_->segment == 0) {
      op_sel_.segment_update();
      cp_sel_.segment_update();
    }
    int op = op_sel_.pick(rng_);
    int bucket = 0;
    int cp = pick_change_point(&bucket);
    if (cp < 0) continue;  // uniform sequence, no non-trivial neighbor exists
    int size = rng_.uniform_int(1, b_);
    QueueSequence next = make_neighbor(op, cp, size);
    DecodeResult r = decode(next, *inst_, *sc_, *w_, engine_);

    AdaptiveSelector::Outcome outcome;
    if (r.objective < f_cur_) {
      b_ = std::max(1, b_ - 1);
      if (r.objective < f_best_) {
        outcome = AdaptiveSelector::Outcome::NewBest;
        best_ = r.actual;
        f_best_ = r.objective;
        last_improv_ = iter_;
        if (!trajectory_.empty() && f_best_ > trajectory_.back().second) monotone_ = false;
        trajectory_.emplace_back(iter_, f_best_);
      } else {
        outcome = AdaptiveSelector::Outcome::Improved;
      }
      accept(std::move(r));
    } else if (rng_.next_double() < std::exp(-(r.objective - f_cur_) / temp_)) {
      outcome = AdaptiveSelector::Outcome::AcceptedWorse;
      accept(std::move(r));
    } else {
      outcome = AdaptiveSelector::Outcome::Rejected;
      b_ = std::min(b_ + 1, params_->b_max);
    }
    op_sel_.reward(op, outcome);
    cp_sel_.reward(bucket, outcome);

    if (iter_ - last_improv_ > params_->d_max) diversify();
  }
}

RaceResult race_optimize(const Instance& inst, const ScenarioConfig& sc, const ObjectiveWeights& w,
                         const SaParams& params, uint64_t master_seed, int workers) {
  params.validate();
  std::vector<std::unique_ptr<SaRun>> racers;
  racers.reserve(size_t(params.survivors1));
  for (int i = 0; i < params.survivors1; ++i)
    racers.push_back(std::make_unique<SaRun>(inst, sc, w, params, stream_seed(master_seed, uint64_t(i))));

  std::vector<int> alive(size_t(params.survivors1));
  std::iota(alive.begin(), alive.end(), 0);
  RaceResult out;

  const int phase_iters[3] = {params.iters1, params.iters2, params.iters3};
  const int phase_keep[3] = {params.survivors1, params.survivors2, params.survivors3};
  for (int phase = 0; phase < 3; ++phase) {
    // shrink to this phase's survivor count, best current objective first
    std::sort(alive.begin(), alive.end(), [&](int a, int b) {
      double fa = racers[size_t(a)]->best_objective(), fb = racers[size_t(b)]->best_objective();
      if (fa != fb) return fa < fb;
      return a < b;
    });
    if (int(alive.size()) > phase_keep[phase]) alive.resize(size_t(phase_keep[phase]));
    parallel_for(int(alive.size()), workers,
                 [&](int i) { racers[size_t(alive[size_t(i)])]->continue_to(phase_iters[phase]); });
    double best = racers[size_t(alive[0])]->best_objective();
    for (int a : alive) best = std::min(best, racers[size_t(a)]->best_objective());
    out.phase_best[size_t(phase)] = best;
  }

  int winner = alive[0];
  for (int a : alive)
    if (racers[size_t(a)]->best_objective() < racers[size_t(winner)]->best_objective()) winner = a;
  SaRun& win = *racers[size_t(winner)];
  out.best_sequence = win.best_sequence();
  out.best_objective = win.best_objective();
  out.initial_objective = win.initial_objective();
  out.initial_qp = win.initial_qp();
  out.trajectory = win.trajectory();
  out.trajectory_monotone = true;  // over every racer, not just the winner
  for (const auto& r : racers) out.trajectory_monotone &= r->trajectory_monotone();

  Engine engine(sc);
  DecodeResult fin = decode(out.best_sequence, inst, sc, w, engine);
  if (fin.objective != out.best_objective)
    throw std::logic_error("race: re-decoding the best sequence changed the objective");
  out.trace = std::move(fin.trace);
  return out;
}

}  // namespace edsim
