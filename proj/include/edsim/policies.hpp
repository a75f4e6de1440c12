#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "edsim/engine.hpp"
#include "edsim/types.hpp"

namespace edsim {

// A fixed permutation of the 8 queue classes.
using QueueOrdering = std::array<QueueClass, kQueueClassCount>;

// QP1: new before old, by grade within each block.
// QP2: by grade, new before old within a grade.
// QP3: old before new, by grade within each block.
// QP4: by grade, old before new within a grade.
const QueueOrdering& qp_ordering(int which);  // 1..4

// Rank of a class in the QP2 ordering; the deterministic tie-breaker used by
// score-based policies.
int qp2_rank(QueueClass q);

// First non-empty view in the given ordering, nullopt if all 8 are empty.
std::optional<QueueClass> qp_select(const QueueOrdering& ordering, const SimState& st, int doctor);

// APQ accumulation rates, one per queue class. Valid vectors sum to 10 and
// strictly decrease with grade within each consultation type.
struct BetaWeights {
  std::array<double, kQueueClassCount> beta{};

  double operator[](QueueClass q) const { return beta[size_t(q.idx)]; }
  double& at(int grade, Consult c) { return beta[size_t(QueueClass(grade, c).idx)]; }
  double sum() const;
  bool valid(std::string* why = nullptr) const;
};

void save_beta(const BetaWeights& b, double fitness, std::ostream& os);
BetaWeights parse_beta(std::istream& is);
BetaWeights load_beta(const std::string& path);

// Accumulated-priority selection: over non-empty views q, the head patient
// scores beta_q * (t - t_a); the argmax wins, score ties fall back to the QP2
// ordering. Throws if a head patient shows negative accumulated time.
std::optional<QueueClass> apq_select(const BetaWeights& beta, const SimState& st, int doctor,
                                     double t);

class QpPolicy final : public SelectionPolicy {
 public:
  explicit QpPolicy(int which) : ordering_(&qp_ordering(which)) {}
  explicit QpPolicy(const QueueOrdering& ordering) : ordering_(&ordering) {}
  std::optional<QueueClass> select(const SimState& st, int doctor) override {
    return qp_select(*ordering_, st, doctor);
  }

 private:
  const QueueOrdering* ordering_;
};

class ApqPolicy final : public SelectionPolicy {
 public:
  explicit ApqPolicy(BetaWeights beta) : beta_(beta) {}
  std::optional<QueueClass> select(const SimState& st, int doctor) override {
    return apq_select(beta_, st, doctor, st.now());
  }
  const BetaWeights& beta() const { return beta_; }

 private:
  BetaWeights beta_;
};

}  // namespace edsim
