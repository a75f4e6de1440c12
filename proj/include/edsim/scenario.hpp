#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>

#include "edsim/types.hpp"

namespace edsim {

struct TriangularSpec {
  double lo = 0, mode = 0, hi = 0;
  double mean() const { return (lo + mode + hi) / 3.0; }
};

// mu of a lognormal with the requested mean at the given sigma.
double lognormal_mu_for_mean(double target_mean, double sigma);

// All distributional and resource parameters of one scenario. Consultation
// durations are parameterized by their expected value; mu follows from sigma,
// which keeps expected durations fixed when sigma is varied across scenarios.
struct ScenarioConfig {
  std::string name = "Base";

  std::array<double, 24> hourly_rates{};  // patients/hour over the day
  double rate_factor = 1.0;

  std::array<double, kGradeCount> mix{};         // p_j
  std::array<double, kGradeCount> p_diag{};      // pd_j
  double p_ambulance2 = 0.0;                     // pa_2, grade 2 only
  std::array<double, kGradeCount> importance{};  // pw_j
  std::array<double, kGradeCount> ttd_target{};  // t_ttd^j, minutes
  std::array<double, kGradeCount> ttd_share{};   // ts_ttd^j

  TriangularSpec register_dur;                        // grades 3-5
  std::array<TriangularSpec, kGradeCount> triage_dur; // grade 2 walk-ins and 3-5
  std::array<double, kGradeCount> first_mean{};       // E of first consultation
  std::array<double, kGradeCount> second_mean{};      // E of second consultation
  double sigma_consult = 0.45;
  TriangularSpec diag_dur;

  int n_doctors = 4;
  int n_nurses = 2;
  int n_clerks = 1;

  double eval_start = 480.0;   // warm-up window: arrivals in [eval_start, eval_end]
  double eval_end = 1200.0;

  double first_mu(int grade_idx) const { return lognormal_mu_for_mean(first_mean[grade_idx], sigma_consult); }
  double second_mu(int grade_idx) const { return lognormal_mu_for_mean(second_mean[grade_idx], sigma_consult); }
  double expected_daily_arrivals() const;
  void validate() const;  // throws on malformed parameters
};

// The 7 preset scenarios (Base, HR, LV, HV, U, T3, T5).
const std::map<std::string, ScenarioConfig>& scenario_presets();

// Preset by name, or a key-value scenario file by path.
ScenarioConfig load_scenario(const std::string& name_or_path);

void save_scenario(const ScenarioConfig& sc, std::ostream& os);
ScenarioConfig parse_scenario(std::istream& is);

// Objective presets keyed by ttdl/c30/c15/twt (plus c120, the surrogate used
// when optimizing schedules for the ttdl measure).
const std::map<std::string, ObjectiveWeights>& objective_presets();
ObjectiveWeights load_objective(const std::string& name);

}  // namespace edsim
