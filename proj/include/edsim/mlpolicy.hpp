#pragma once

#include "edsim/features.hpp"
#include "edsim/forest.hpp"
#include "edsim/policies.hpp"

namespace edsim {

// Forest-imitation dispatch: classes ordered by predicted probability (ties
// by the QP2 ordering), first non-empty view wins.
std::optional<QueueClass> ml_select(const Forest& forest, const SimState& st, int doctor);

class MlPolicy final : public SelectionPolicy {
 public:
  explicit MlPolicy(const Forest& forest) : forest_(&forest) {}
  std::optional<QueueClass> select(const SimState& st, int doctor) override {
    return ml_select(*forest_, st, doctor);
  }

 private:
  const Forest* forest_;
};

}  // namespace edsim
