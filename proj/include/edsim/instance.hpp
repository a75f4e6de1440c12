#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "edsim/rng.hpp"
#include "edsim/scenario.hpp"
#include "edsim/types.hpp"

namespace edsim {

// One deterministic 24-hour realization: every patient with all attributes
// pre-drawn. Timestamps are absent until a simulation run fills them.
struct Instance {
  int32_t id = 0;
  std::string scenario_name;
  uint64_t seed = 0;
  std::vector<Patient> patients;  // sorted by arrival time
};

// Non-homogeneous Poisson arrivals over [0, horizon) minutes by thinning
// against factor * max(rates). Rates are per hour, one per hour of day.
// Returned times are strictly increasing.
std::vector<double> sample_arrivals(const std::array<double, 24>& hourly_rates, double rate_factor,
                                    double horizon, Rng& rng);

// Draws one patient's attributes. Grade-2 ambulance arrivals carry no register
// or triage duration; grade-2 walk-ins carry no register duration.
Patient sample_patient(int32_t id, double arrival, const ScenarioConfig& sc, Rng& rng);

Instance sample_instance(const ScenarioConfig& sc, int32_t id, uint64_t seed);

// Instance file format (documented in the header lines): version line,
// scenario/seed metadata, one patient per line with fixed columns and
// 6-fractional-digit minutes. Absent durations are written as -1.
void write_instance(const Instance& inst, std::ostream& os);
Instance read_instance(std::istream& is);

std::string instance_file_name(int32_t id);

// Generates `count` instances under out_dir, one file each. Instance i uses
// the RNG stream seed `stream_seed(master_seed, i)` so regeneration is
// byte-identical and instances are independent.
void gen_instances(const ScenarioConfig& sc, int count, uint64_t master_seed,
                   const std::string& out_dir, int workers = 1);

std::vector<Instance> load_instances(const std::string& dir);

}  // namespace edsim
