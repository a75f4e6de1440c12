#pragma once

#include <span>

#include "edsim/engine.hpp"
#include "edsim/objective.hpp"
#include "edsim/policies.hpp"

namespace edsim {

// A solution is an ordered multiset of queue-class indices whose
// multiplicities equal the instance's consultation demand.
using QueueSequence = std::vector<uint8_t>;

std::array<int, kQueueClassCount> sequence_demand(const Instance& inst);
std::array<int, kQueueClassCount> sequence_counts(std::span<const uint8_t> seq);
bool matches_demand(std::span<const uint8_t> seq, const Instance& inst);

// Dispatches along a fixed sequence: each decision scans the remaining tokens
// front to back and consumes the first one whose queue (doctor-restricted for
// second consultations) is non-empty. Faults if patients wait with no
// matching token left, which means the multiplicity invariant was violated.
class SequencePolicy final : public SelectionPolicy {
 public:
  explicit SequencePolicy(QueueSequence seq) : remaining_(std::move(seq)) {}
  std::optional<QueueClass> select(const SimState& st, int doctor) override;
  const QueueSequence& actual() const { return actual_; }

 private:
  QueueSequence remaining_;
  QueueSequence actual_;
};

struct DecodeResult {
  QueueSequence actual;  // realized dispatch order; decoding it again is a fixpoint
  double objective = 0;  // over all instance patients, no warm-up filter
  Trace trace;
};

DecodeResult decode(const QueueSequence& seq, const Instance& inst, const ScenarioConfig& sc,
                    const ObjectiveWeights& w, Engine& engine, DispatchObserver* observer = nullptr);

// Best of the four pure-priority runs: its realized dispatch sequence and
// objective seed the annealing search.
struct InitialSolution {
  QueueSequence sequence;
  double objective = 0;
  Trace trace;
  int qp_index = 1;  // which QP won
};

InitialSolution encode_initial(const Instance& inst, const ScenarioConfig& sc,
                               const ObjectiveWeights& w, Engine& engine);

QueueSequence sequence_from_trace(const Trace& trace);

std::string sequence_to_text(std::span<const uint8_t> seq, double objective);
QueueSequence sequence_from_text(const std::string& text, double* objective = nullptr);

std::string trace_to_text(const Trace& trace);
Trace trace_from_text(const std::string& text);  // queue-length snapshots are not persisted

}  // namespace edsim
