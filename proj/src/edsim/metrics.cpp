#include "edsim/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace edsim {

Confusion confusion_matrix(std::span<const uint8_t> predictions, std::span<const uint8_t> truths) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("confusion_matrix: length mismatch");
  Confusion m{};
  for (size_t i = 0; i < truths.size(); ++i)
    ++m[size_t(truths[i])][size_t(predictions[i])];
  return m;
}

double multiclass_mcc(const Confusion& m) {
  double correct = 0, total = 0;
  std::array<double, kQueueClassCount> truth_count{}, pred_count{};
  for (int t = 0; t < kQueueClassCount; ++t)
    for (int p = 0; p < kQueueClassCount; ++p) {
      double v = double(m[size_t(t)][size_t(p)]);
      total += v;
      truth_count[size_t(t)] += v;
      pred_count[size_t(p)] += v;
      if (t == p) correct += v;
    }
  double cross = 0, t_sq = 0, p_sq = 0;
  for (int k = 0; k < kQueueClassCount; ++k) {
    cross += truth_count[size_t(k)] * pred_count[size_t(k)];
    t_sq += truth_count[size_t(k)] * truth_count[size_t(k)];
    p_sq += pred_count[size_t(k)] * pred_count[size_t(k)];
  }
  double num = correct * total - cross;
  double den = std::sqrt((total * total - p_sq) * (total * total - t_sq));
  if (den == 0) return 0.0;
  return num / den;
}

ClassificationReport accuracy_mcc(std::span<const uint8_t> predictions,
                                  std::span<const uint8_t> truths) {
  if (truths.empty()) throw std::invalid_argument("accuracy_mcc: empty input");
  ClassificationReport r;
  r.confusion = confusion_matrix(predictions, truths);
  r.mcc = multiclass_mcc(r.confusion);

  double correct = 0;
  for (int k = 0; k < kQueueClassCount; ++k) correct += double(r.confusion[size_t(k)][size_t(k)]);
  r.overall_accuracy = correct / double(truths.size());

  for (int k = 0; k < kQueueClassCount; ++k) {
    int64_t pred_total = 0, truth_total = 0;
    for (int j = 0; j < kQueueClassCount; ++j) {
      pred_total += r.confusion[size_t(j)][size_t(k)];
      truth_total += r.confusion[size_t(k)][size_t(j)];
    }
    int64_t diag = r.confusion[size_t(k)][size_t(k)];
    r.accuracy[size_t(k)] = pred_total > 0 ? double(diag) / double(pred_total) : -1.0;
    r.recall[size_t(k)] = truth_total > 0 ? double(diag) / double(truth_total) : -1.0;
  }
  return r;
}

MeanCi mean_ci(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_ci: empty input");
  MeanCi r;
  double n = double(values.size());
  for (double v : values) r.mean += v;
  r.mean /= n;
  if (values.size() < 2) {
    r.degenerate = true;
    return r;
  }
  double ss = 0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  double sd = std::sqrt(ss / (n - 1.0));
  r.halfwidth = 1.96 * sd / std::sqrt(n);
  return r;
}

}  // namespace edsim
