#pragma once

#include <span>

#include "edsim/scenario.hpp"
#include "edsim/types.hpp"

namespace edsim {

// Empirical combined measure over an evaluated patient set:
//   sum_j p_j * pw_j * ( lambda_W * mean_j(W) + lambda_ttd * (ts_j - share_j)^+ )
// where share_j is the fraction of grade-j patients with ttd <= target.
// Grades with no evaluated patients contribute 0. Throws if any patient has
// no recorded first consultation.
double objective_eval(std::span<const Patient> patients, const ObjectiveWeights& w,
                      const ScenarioConfig& sc);

// Per-grade context of a fully evaluated solution, used to attribute the
// objective to individual patients.
struct CohortStats {
  std::array<int, kGradeCount> count{};
  std::array<bool, kGradeCount> below_target{};
};

CohortStats cohort_stats(std::span<const Patient> patients, const ScenarioConfig& sc);

// Contribution of one patient to the objective under the given cohort:
//   p_j * pw_j * ( lambda_W * W/|P_j| + lambda_ttd * miss/|P_j| * [share_j below target] )
double patient_contribution(const Patient& p, const CohortStats& stats, const ObjectiveWeights& w,
                            const ScenarioConfig& sc);

}  // namespace edsim
