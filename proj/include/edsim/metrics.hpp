#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "edsim/types.hpp"

namespace edsim {

// confusion[truth][prediction]
using Confusion = std::array<std::array<int64_t, kQueueClassCount>, kQueueClassCount>;

Confusion confusion_matrix(std::span<const uint8_t> predictions, std::span<const uint8_t> truths);

// R_K multiclass correlation over the confusion matrix; 0 when the
// denominator vanishes (e.g. a constant predictor). Reduces to the familiar
// binary MCC on 2x2 inputs.
double multiclass_mcc(const Confusion& m);

struct ClassificationReport {
  double overall_accuracy = 0;
  double mcc = 0;
  // per queue class: correct predictions of the class over all predictions of
  // the class (the precision-style definition); recall alongside for context
  std::array<double, kQueueClassCount> accuracy{};  // -1 when the class was never predicted
  std::array<double, kQueueClassCount> recall{};    // -1 when the class never occurs
  Confusion confusion{};
};

// Throws on empty or length-mismatched inputs.
ClassificationReport accuracy_mcc(std::span<const uint8_t> predictions,
                                  std::span<const uint8_t> truths);

struct MeanCi {
  double mean = 0;
  double halfwidth = 0;    // 1.96 * sample stdev / sqrt(n)
  bool degenerate = false; // n < 2, halfwidth reported as 0
};

MeanCi mean_ci(std::span<const double> values);

}  // namespace edsim
