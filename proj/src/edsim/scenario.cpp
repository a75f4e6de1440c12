#include "edsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace edsim {

double lognormal_mu_for_mean(double target_mean, double sigma) {
  if (!(target_mean > 0.0)) throw std::invalid_argument("lognormal mean must be positive");
  return std::log(target_mean) - 0.5 * sigma * sigma;
}

double ScenarioConfig::expected_daily_arrivals() const {
  double s = std::accumulate(hourly_rates.begin(), hourly_rates.end(), 0.0);
  return s * rate_factor;
}

void ScenarioConfig::validate() const {
  double mix_sum = 0;
  for (int j = 0; j < kGradeCount; ++j) {
    if (mix[j] < 0 || mix[j] > 1 || p_diag[j] < 0 || p_diag[j] > 1)
      throw std::invalid_argument("scenario " + name + ": probabilities must lie in [0,1]");
    if (ttd_share[j] < 0 || ttd_share[j] > 1)
      throw std::invalid_argument("scenario " + name + ": target shares must lie in [0,1]");
    if (importance[j] <= 0 || ttd_target[j] <= 0 || first_mean[j] <= 0 || second_mean[j] <= 0)
      throw std::invalid_argument("scenario " + name + ": weights and durations must be positive");
    mix_sum += mix[j];
  }
  if (std::abs(mix_sum - 1.0) > 1e-9)
    throw std::invalid_argument("scenario " + name + ": patient mix must sum to 1");
  if (p_ambulance2 < 0 || p_ambulance2 > 1)
    throw std::invalid_argument("scenario " + name + ": ambulance probability out of range");
  for (int j = 1; j < kGradeCount; ++j)
    if (ttd_target[j] <= ttd_target[j - 1])
      throw std::invalid_argument("scenario " + name + ": ttd targets must increase with grade");
  if (n_doctors < 1 || n_nurses < 1 || n_clerks < 1)
    throw std::invalid_argument("scenario " + name + ": resource counts must be >= 1");
  for (double r : hourly_rates)
    if (r < 0) throw std::invalid_argument("scenario " + name + ": negative hourly rate");
  if (rate_factor <= 0) throw std::invalid_argument("scenario " + name + ": rate factor must be positive");
  if (sigma_consult <= 0) throw std::invalid_argument("scenario " + name + ": sigma must be positive");
  if (!(eval_start < eval_end)) throw std::invalid_argument("scenario " + name + ": bad eval window");
}

namespace {

ScenarioConfig base_scenario() {
  ScenarioConfig sc;
  sc.name = "Base";
  // Hour-of-day profile: noon peak of 14/h, night trough of 2/h, ~208
  // expected arrivals per day. Calibrated so the four doctors run at ~82%
  // utilization over the day, with a midday backlog that drains overnight;
  // overridable in config.
  sc.hourly_rates = {6.0,  4.5,  3.0,  2.0,  2.0,  2.5,  4.0,  6.0,  8.5,  11.0, 13.0, 14.0,
                     14.0, 13.5, 13.0, 12.5, 12.0, 11.5, 11.0, 10.5, 10.0, 9.0,  8.0,  7.0};
  sc.rate_factor = 1.0;
  sc.mix = {0.065, 0.2, 0.515, 0.22};
  sc.p_diag = {0.74, 0.62, 0.53, 0.31};
  sc.p_ambulance2 = 0.60;
  sc.importance = {3.0, 2.0, 1.5, 1.0};
  sc.ttd_target = {15.0, 30.0, 60.0, 120.0};
  sc.ttd_share = {0.95, 0.90, 0.83, 0.80};
  sc.register_dur = {3, 4, 5};
  sc.triage_dur = {TriangularSpec{2, 3, 4}, TriangularSpec{4, 6, 8}, TriangularSpec{3, 5, 7},
                   TriangularSpec{3, 5, 7}};
  sc.first_mean = {17.0, 20.0, 18.0, 15.0};
  sc.second_mean = {12.0, 11.0, 9.0, 7.0};
  sc.sigma_consult = 0.45;
  sc.diag_dur = {15, 30, 45};
  sc.n_doctors = 4;
  sc.n_nurses = 2;
  sc.n_clerks = 1;
  return sc;
}

std::map<std::string, ScenarioConfig> build_presets() {
  std::map<std::string, ScenarioConfig> m;
  ScenarioConfig base = base_scenario();
  m["Base"] = base;

  ScenarioConfig hr = base;
  hr.name = "HR";
  hr.rate_factor = 1.1;  // hourly pattern itself unchanged
  m["HR"] = hr;

  ScenarioConfig lv = base;
  lv.name = "LV";
  lv.sigma_consult = 0.35;  // expected durations stay fixed, mu follows sigma
  m["LV"] = lv;

  ScenarioConfig hv = base;
  hv.name = "HV";
  hv.sigma_consult = 0.55;
  m["HV"] = hv;

  ScenarioConfig u = base;
  u.name = "U";
  u.mix = {0.065, 0.312, 0.312, 0.311};
  m["U"] = u;

  ScenarioConfig t3 = base;
  t3.name = "T3";
  t3.mix = {0.065, 0.515, 0.2, 0.22};
  m["T3"] = t3;

  ScenarioConfig t5 = base;
  t5.name = "T5";
  t5.mix = {0.065, 0.2, 0.22, 0.515};
  m["T5"] = t5;

  for (auto& [k, v] : m) v.validate();
  return m;
}

void put4(std::ostream& os, const char* key, const std::array<double, 4>& a) {
  os << key;
  for (double v : a) os << ' ' << v;
  os << '\n';
}

}  // namespace

const std::map<std::string, ScenarioConfig>& scenario_presets() {
  static const std::map<std::string, ScenarioConfig> presets = build_presets();
  return presets;
}

ScenarioConfig load_scenario(const std::string& name_or_path) {
  const auto& presets = scenario_presets();
  auto it = presets.find(name_or_path);
  if (it != presets.end()) return it->second;
  std::ifstream is(name_or_path);
  if (!is) throw std::runtime_error("unknown scenario and unreadable file: " + name_or_path);
  return parse_scenario(is);
}

void save_scenario(const ScenarioConfig& sc, std::ostream& os) {
  os.precision(17);
  os << "# edsim scenario v1\n";
  os << "name " << sc.name << '\n';
  os << "hourly_rates";
  for (double r : sc.hourly_rates) os << ' ' << r;
  os << '\n';
  os << "rate_factor " << sc.rate_factor << '\n';
  put4(os, "mix", sc.mix);
  put4(os, "p_diagnostic", sc.p_diag);
  os << "p_ambulance2 " << sc.p_ambulance2 << '\n';
  put4(os, "importance", sc.importance);
  put4(os, "ttd_target", sc.ttd_target);
  put4(os, "ttd_share", sc.ttd_share);
  os << "register_tri " << sc.register_dur.lo << ' ' << sc.register_dur.mode << ' '
     << sc.register_dur.hi << '\n';
  for (int j = 0; j < kGradeCount; ++j)
    os << "triage_tri_" << j + kGradeMin << ' ' << sc.triage_dur[j].lo << ' '
       << sc.triage_dur[j].mode << ' ' << sc.triage_dur[j].hi << '\n';
  put4(os, "first_mean", sc.first_mean);
  put4(os, "second_mean", sc.second_mean);
  os << "sigma_consult " << sc.sigma_consult << '\n';
  os << "diag_tri " << sc.diag_dur.lo << ' ' << sc.diag_dur.mode << ' ' << sc.diag_dur.hi << '\n';
  os << "doctors " << sc.n_doctors << '\n';
  os << "nurses " << sc.n_nurses << '\n';
  os << "clerks " << sc.n_clerks << '\n';
  os << "eval_window " << sc.eval_start << ' ' << sc.eval_end << '\n';
}

ScenarioConfig parse_scenario(std::istream& is) {
  ScenarioConfig sc = scenario_presets().at("Base");  // file keys override Base
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    auto get4 = [&](std::array<double, 4>& a) { ls >> a[0] >> a[1] >> a[2] >> a[3]; };
    if (key == "name") ls >> sc.name;
    else if (key == "hourly_rates") for (double& r : sc.hourly_rates) ls >> r;
    else if (key == "rate_factor") ls >> sc.rate_factor;
    else if (key == "mix") get4(sc.mix);
    else if (key == "p_diagnostic") get4(sc.p_diag);
    else if (key == "p_ambulance2") ls >> sc.p_ambulance2;
    else if (key == "importance") get4(sc.importance);
    else if (key == "ttd_target") get4(sc.ttd_target);
    else if (key == "ttd_share") get4(sc.ttd_share);
    else if (key == "register_tri") ls >> sc.register_dur.lo >> sc.register_dur.mode >> sc.register_dur.hi;
    else if (key.rfind("triage_tri_", 0) == 0) {
      int g = std::stoi(key.substr(11));
      auto& t = sc.triage_dur[grade_index(g)];
      ls >> t.lo >> t.mode >> t.hi;
    }
    else if (key == "first_mean") get4(sc.first_mean);
    else if (key == "second_mean") get4(sc.second_mean);
    else if (key == "sigma_consult") ls >> sc.sigma_consult;
    else if (key == "diag_tri") ls >> sc.diag_dur.lo >> sc.diag_dur.mode >> sc.diag_dur.hi;
    else if (key == "doctors") ls >> sc.n_doctors;
    else if (key == "nurses") ls >> sc.n_nurses;
    else if (key == "clerks") ls >> sc.n_clerks;
    else if (key == "eval_window") ls >> sc.eval_start >> sc.eval_end;
    else throw std::runtime_error("unknown scenario key: " + key);
    if (!ls) throw std::runtime_error("malformed scenario line: " + line);
  }
  sc.validate();
  return sc;
}

const std::map<std::string, ObjectiveWeights>& objective_presets() {
  static const std::map<std::string, ObjectiveWeights> m = {
      {"ttdl", {"ttdl", 0.0, 1.0}},
      {"c30", {"c30", 1.0, 30.0}},
      {"c15", {"c15", 1.0, 15.0}},
      {"twt", {"twt", 1.0, 0.0}},
      {"c120", {"c120", 1.0, 120.0}},
  };
  return m;
}

ObjectiveWeights load_objective(const std::string& name) {
  auto it = objective_presets().find(name);
  if (it == objective_presets().end())
    throw std::runtime_error("unknown objective: " + name + " (use ttdl|c30|c15|twt)");
  return it->second;
}

}  // namespace edsim
