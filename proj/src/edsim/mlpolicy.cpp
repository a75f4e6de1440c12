#include "edsim/mlpolicy.hpp"

#include <algorithm>
#include <numeric>

namespace edsim {

std::optional<QueueClass> ml_select(const Forest& forest, const SimState& st, int doctor) {
  int non_empty = -1, n_non_empty = 0;
  for (int i = 0; i < kQueueClassCount; ++i)
    if (st.queue_len(QueueClass::from_index(i), doctor) > 0) {
      non_empty = i;
      ++n_non_empty;
    }
  if (n_non_empty == 0) return std::nullopt;
  if (n_non_empty == 1) return QueueClass::from_index(non_empty);  // forced choice

  double f[kFeatureDim];
  extract_features(st, doctor, f);
  float x[kFeatureDim];
  for (int i = 0; i < kFeatureDim; ++i) x[i] = float(f[i]);
  auto probs = forest.predict_proba(x);

  std::array<int, kQueueClassCount> order;
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (probs[size_t(a)] != probs[size_t(b)]) return probs[size_t(a)] > probs[size_t(b)];
    return qp2_rank(QueueClass::from_index(a)) < qp2_rank(QueueClass::from_index(b));
  });
  for (int i : order) {
    QueueClass q = QueueClass::from_index(i);
    if (st.queue_len(q, doctor) > 0) return q;
  }
  return std::nullopt;  // unreachable, a view was non-empty
}

}  // namespace edsim
