#include "edsim/instance.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "edsim/parallel.hpp"
#include "edsim/textio.hpp"

namespace edsim {

std::vector<double> sample_arrivals(const std::array<double, 24>& hourly_rates, double rate_factor,
                                    double horizon, Rng& rng) {
  double max_rate = *std::max_element(hourly_rates.begin(), hourly_rates.end());
  double lam_max = max_rate * rate_factor / 60.0;  // per minute
  std::vector<double> out;
  if (lam_max <= 0.0) return out;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(lam_max);
    if (t >= horizon) break;
    double lam_t = hourly_rates[size_t(t / 60.0)] * rate_factor / 60.0;
    if (rng.next_double() * lam_max < lam_t) {
      double arr = t;
      if (!out.empty() && arr <= out.back()) {
        // break exact duplicates with a sub-microsecond jitter
        double j;
        do j = rng.next_double() * 1e-6;
        while (j <= 0.0);
        arr = out.back() + j;
        if (arr >= horizon) continue;  // tie at the horizon edge, drop it
      }
      out.push_back(arr);
    }
  }
  return out;
}

Patient sample_patient(int32_t id, double arrival, const ScenarioConfig& sc, Rng& rng) {
  Patient p;
  p.id = id;
  p.arrival = arrival;

  double u = rng.next_double();
  double acc = 0.0;
  p.grade = kGradeMax;
  for (int j = 0; j < kGradeCount; ++j) {
    acc += sc.mix[j];
    if (u < acc) {
      p.grade = kGradeMin + j;
      break;
    }
  }
  int j = grade_index(p.grade);

  p.ambulance = p.grade == 2 && rng.next_double() < sc.p_ambulance2;
  p.diagnostic = rng.next_double() < sc.p_diag[j];

  bool skip_register = p.grade == 2;          // walk-ins register with the triage nurse
  bool skip_triage = p.grade == 2 && p.ambulance;  // triaged on the ambulance
  if (!skip_register)
    p.dur_register = rng.triangular(sc.register_dur.lo, sc.register_dur.mode, sc.register_dur.hi);
  if (!skip_triage)
    p.dur_triage = rng.triangular(sc.triage_dur[j].lo, sc.triage_dur[j].mode, sc.triage_dur[j].hi);
  p.dur_first = rng.lognormal(sc.first_mu(j), sc.sigma_consult);
  if (p.diagnostic) {
    p.dur_diag = rng.triangular(sc.diag_dur.lo, sc.diag_dur.mode, sc.diag_dur.hi);
    p.dur_second = rng.lognormal(sc.second_mu(j), sc.sigma_consult);
  }
  return p;
}

Instance sample_instance(const ScenarioConfig& sc, int32_t id, uint64_t seed) {
  Instance inst;
  inst.id = id;
  inst.scenario_name = sc.name;
  inst.seed = seed;
  Rng rng(seed);
  std::vector<double> arrivals = sample_arrivals(sc.hourly_rates, sc.rate_factor, 1440.0, rng);
  inst.patients.reserve(arrivals.size());
  for (size_t i = 0; i < arrivals.size(); ++i)
    inst.patients.push_back(sample_patient(int32_t(i), arrivals[i], sc, rng));
  return inst;
}

namespace {
constexpr const char* kInstanceHeader = "# edsim-instance v1";

std::string fmt_min(double v) {
  if (!is_set(v)) return "-1";
  return format_double(v, 6);
}
}  // namespace

void write_instance(const Instance& inst, std::ostream& os) {
  os << kInstanceHeader << '\n';
  os << "# scenario " << inst.scenario_name << " id " << inst.id << " seed " << inst.seed << '\n';
  os << "# columns id grade arrival ambulance diagnostic dur_register dur_triage dur_first"
        " dur_diag dur_second\n";
  for (const Patient& p : inst.patients) {
    os << p.id << ' ' << p.grade << ' ' << fmt_min(p.arrival) << ' ' << int(p.ambulance) << ' '
       << int(p.diagnostic) << ' ' << fmt_min(p.dur_register) << ' ' << fmt_min(p.dur_triage)
       << ' ' << fmt_min(p.dur_first) << ' ' << fmt_min(p.dur_diag) << ' ' << fmt_min(p.dur_second)
       << '\n';
  }
}

Instance read_instance(std::istream& is) {
  Instance inst;
  std::string line;
  if (!std::getline(is, line) || line != kInstanceHeader)
    throw std::runtime_error("not an edsim instance file");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line);
      std::string hash, key;
      ls >> hash >> key;
      if (key == "scenario") ls >> inst.scenario_name >> key >> inst.id >> key >> inst.seed;
      continue;
    }
    std::istringstream ls(line);
    Patient p;
    int amb = 0, diag = 0;
    ls >> p.id >> p.grade >> p.arrival >> amb >> diag >> p.dur_register >> p.dur_triage >>
        p.dur_first >> p.dur_diag >> p.dur_second;
    if (!ls) throw std::runtime_error("malformed instance line: " + line);
    p.ambulance = amb != 0;
    p.diagnostic = diag != 0;
    inst.patients.push_back(p);
  }
  return inst;
}

std::string instance_file_name(int32_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "instance_%06d.txt", id);
  return buf;
}

void gen_instances(const ScenarioConfig& sc, int count, uint64_t master_seed,
                   const std::string& out_dir, int workers) {
  if (count < 1) throw std::invalid_argument("gen_instances: count must be >= 1");
  ensure_dir(out_dir);
  parallel_for(count, workers, [&](int i) {
    Instance inst = sample_instance(sc, i, stream_seed(master_seed, uint64_t(i)));
    std::ostringstream os;
    write_instance(inst, os);
    atomic_write(out_dir + "/" + instance_file_name(i), os.str());
  });
}

std::vector<Instance> load_instances(const std::string& dir) {
  std::vector<Instance> out;
  for (const std::string& path : list_files(dir, "instance_")) {
    std::istringstream is(read_file(path));
    out.push_back(read_instance(is));
  }
  if (out.empty()) throw std::runtime_error("no instance files under " + dir);
  return out;
}

}  // namespace edsim
