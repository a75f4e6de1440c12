#pragma once

#include <vector>

#include "edsim/decode.hpp"
#include "edsim/engine.hpp"
#include "edsim/rng.hpp"

namespace edsim {

// State representation at a dispatch decision. Layout, 93 values:
//   general block (11): t, doctor index, idle doctors, per-grade counts of
//     arrived patients past their target, per-grade arrived counts;
//   per-grade first-consultation block (14/15/17/17): queue length; current
//     ttd of head/last/median patient and its queue mean; queue length again
//     (the published feature table lists it in both slots); accumulated W1 of
//     head/last/median and mean; patients past the target; urgency buckets
//     [target-5,target), [target-10,target-5), [target-15,target-10), plus
//     [target-20,target-15) for grades >= 3 and [target-30,target-20),
//     [target-40,target-30) for grades >= 4;
//   per-grade second-consultation block for the dispatching doctor (4x4):
//     accumulated W of head/last/median and mean;
//   register/triage/diagnostics block (3): patients in diagnostics, in
//     diagnostics first seen by this doctor, in the register/triage stage.
// Statistics of an empty queue take the sentinel -1.
inline constexpr int kFeatureDim = 93;
inline constexpr double kEmptyStat = -1.0;

void extract_features(const SimState& st, int doctor, double* out);

struct SampleSet {
  int dim = kFeatureDim;
  std::vector<float> features;      // row-major, size() * dim
  std::vector<uint8_t> labels;      // queue-class index 0..7
  std::vector<int32_t> instance_id; // provenance, for by-instance splits

  size_t size() const { return labels.size(); }
  const float* row(size_t i) const { return features.data() + i * size_t(dim); }
  void push(const double* f, uint8_t label, int32_t inst);
  void append(const SampleSet& other);
};

// Replays an optimized trace on its instance and records one sample per
// dispatch: the decision-time features paired with the dispatched queue class
// (doctor-agnostic for second consultations). Faults if the trace does not
// belong to the instance.
SampleSet harvest_samples(const Trace& trace, const Instance& inst, const ScenarioConfig& sc);

// Class balancing: within each consultation type separately, bootstraps every
// class present up to the type's maximum class count. Original samples are
// all retained.
SampleSet oversample(const SampleSet& in, Rng& rng);

// Binary samples container with a text header; round-trips exactly.
void save_samples(const SampleSet& s, const std::string& path);
SampleSet load_samples(const std::string& path);

}  // namespace edsim
