#include "edsim/objective.hpp"

#include <algorithm>
#include <stdexcept>

namespace edsim {

double objective_eval(std::span<const Patient> patients, const ObjectiveWeights& w,
                      const ScenarioConfig& sc) {
  std::array<double, kGradeCount> wait_sum{};
  std::array<int, kGradeCount> n{};
  std::array<int, kGradeCount> met{};
  for (const Patient& p : patients) {
    if (!is_set(p.t_first))
      throw std::invalid_argument("objective_eval: patient " + std::to_string(p.id) +
                                  " has no first consultation");
    int j = grade_index(p.grade);
    ++n[j];
    wait_sum[j] += p.total_wait();
    if (p.ttd() <= sc.ttd_target[j]) ++met[j];
  }
  double f = 0.0;
  for (int j = 0; j < kGradeCount; ++j) {
    if (n[j] == 0) continue;
    double mean_wait = wait_sum[j] / n[j];
    double share = double(met[j]) / n[j];
    // the share shortfall enters in percentage points: one point of missed
    // target trades against lambda_ttd minutes of mean waiting time
    double target_gap = 100.0 * std::max(sc.ttd_share[j] - share, 0.0);
    f += sc.mix[j] * sc.importance[j] * (w.lambda_w * mean_wait + w.lambda_ttd * target_gap);
  }
  return f;
}

CohortStats cohort_stats(std::span<const Patient> patients, const ScenarioConfig& sc) {
  CohortStats s;
  std::array<int, kGradeCount> met{};
  for (const Patient& p : patients) {
    int j = grade_index(p.grade);
    ++s.count[j];
    if (p.ttd() <= sc.ttd_target[j]) ++met[j];
  }
  for (int j = 0; j < kGradeCount; ++j)
    s.below_target[j] = s.count[j] > 0 && double(met[j]) / s.count[j] < sc.ttd_share[j];
  return s;
}

double patient_contribution(const Patient& p, const CohortStats& stats, const ObjectiveWeights& w,
                            const ScenarioConfig& sc) {
  int j = grade_index(p.grade);
  if (stats.count[j] == 0) return 0.0;
  double inv = 1.0 / stats.count[j];
  double miss = p.ttd() <= sc.ttd_target[j] ? 0.0 : 1.0;
  double target_part = stats.below_target[j] ? w.lambda_ttd * 100.0 * miss * inv : 0.0;
  return sc.mix[j] * sc.importance[j] * (w.lambda_w * p.total_wait() * inv + target_part);
}

}  // namespace edsim
