#include "edsim/decode.hpp"

#include <sstream>
#include <stdexcept>

#include "edsim/textio.hpp"

namespace edsim {

std::array<int, kQueueClassCount> sequence_demand(const Instance& inst) {
  std::array<int, kQueueClassCount> d{};
  for (const Patient& p : inst.patients) {
    ++d[size_t(QueueClass(p.grade, Consult::First).idx)];
    if (p.diagnostic) ++d[size_t(QueueClass(p.grade, Consult::Second).idx)];
  }
  return d;
}

std::array<int, kQueueClassCount> sequence_counts(std::span<const uint8_t> seq) {
  std::array<int, kQueueClassCount> c{};
  for (uint8_t t : seq) ++c[size_t(t)];
  return c;
}

bool matches_demand(std::span<const uint8_t> seq, const Instance& inst) {
  return sequence_counts(seq) == sequence_demand(inst);
}

std::optional<QueueClass> SequencePolicy::select(const SimState& st, int doctor) {
  for (size_t i = 0; i < remaining_.size(); ++i) {
    QueueClass q = QueueClass::from_index(remaining_[i]);
    if (st.queue_len(q, doctor) > 0) {
      actual_.push_back(remaining_[i]);
      remaining_.erase(remaining_.begin() + std::ptrdiff_t(i));
      return q;
    }
  }
  if (!st.all_views_empty(doctor))
    throw std::runtime_error("sequence exhausted with waiting patients (multiplicity violation)");
  return std::nullopt;
}

DecodeResult decode(const QueueSequence& seq, const Instance& inst, const ScenarioConfig& sc,
                    const ObjectiveWeights& w, Engine& engine, DispatchObserver* observer) {
  SequencePolicy policy{seq};
  DecodeResult r;
  r.trace = engine.run(inst, policy, observer);
  r.actual = policy.actual();
  r.objective = objective_eval(r.trace.patients, w, sc);
  return r;
}

QueueSequence sequence_from_trace(const Trace& trace) {
  QueueSequence s;
  s.reserve(trace.dispatches.size());
  for (const DispatchRecord& d : trace.dispatches) s.push_back(d.queue.idx);
  return s;
}

InitialSolution encode_initial(const Instance& inst, const ScenarioConfig& sc,
                               const ObjectiveWeights& w, Engine& engine) {
  InitialSolution best;
  bool have = false;
  for (int k = 1; k <= 4; ++k) {
    QpPolicy policy(k);
    Trace tr = engine.run(inst, policy);
    double f = objective_eval(tr.patients, w, sc);
    if (!have || f < best.objective) {
      have = true;
      best.objective = f;
      best.sequence = sequence_from_trace(tr);
      best.trace = std::move(tr);
      best.qp_index = k;
    }
  }
  return best;
}

std::string sequence_to_text(std::span<const uint8_t> seq, double objective) {
  std::ostringstream os;
  os << "# edsim-sequence v1\n";
  os << "objective " << format_double_exact(objective) << '\n';
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i) os << ' ';
    os << QueueClass::from_index(seq[i]).name();
  }
  os << '\n';
  return os.str();
}

QueueSequence sequence_from_text(const std::string& text, double* objective) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "# edsim-sequence v1")
    throw std::runtime_error("not an edsim sequence file");
  QueueSequence seq;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "objective") {
      double f;
      ls >> f;
      if (objective) *objective = f;
      continue;
    }
    do seq.push_back(parse_queue_class(tok).idx);
    while (ls >> tok);
  }
  return seq;
}

// One file, two CSV sections: the dispatch log, then the per-patient outcome
// table. Values use 17 significant digits so a stored trace compares
// bit-exactly against a fresh decode.
Trace trace_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "# edsim-trace v1")
    throw std::runtime_error("not an edsim trace file");
  Trace tr;
  auto fields = [](const std::string& l) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= l.size(); ++i)
      if (i == l.size() || l[i] == ',') {
        out.push_back(l.substr(start, i - start));
        start = i + 1;
      }
    return out;
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = fields(line);
    if (f[0] == "d" && f.size() == 5) {
      DispatchRecord d;
      d.t = std::stod(f[1]);
      d.doctor = int16_t(std::stoi(f[2]));
      d.queue = parse_queue_class(f[3]);
      d.patient = std::stoi(f[4]);
      tr.dispatches.push_back(d);
    } else if (f[0] == "p" && f.size() == 15) {
      Patient p;
      p.id = std::stoi(f[1]);
      p.grade = std::stoi(f[2]);
      p.arrival = std::stod(f[3]);
      p.ambulance = f[4] == "1";
      p.diagnostic = f[5] == "1";
      double* slots[] = {&p.t_sw3, &p.t_sw4, &p.t_first, &p.t_second, &p.t_leave,
                         &p.w1,    &p.w2,    &p.w3,      &p.w4};
      for (size_t i = 0; i < 9; ++i) *slots[i] = std::stod(f[6 + i]);
      tr.patients.push_back(p);
    } else {
      throw std::runtime_error("malformed trace line: " + line);
    }
  }
  return tr;
}

std::string trace_to_text(const Trace& trace) {
  std::ostringstream os;
  os << "# edsim-trace v1\n";
  os << "# d,t,doctor,queue,patient\n";
  for (const DispatchRecord& d : trace.dispatches)
    os << "d," << format_double_exact(d.t) << ',' << d.doctor << ',' << d.queue.name() << ','
       << d.patient << '\n';
  os << "# p,id,grade,arrival,ambulance,diagnostic,t_sw3,t_sw4,t_first,t_second,t_leave,"
        "w1,w2,w3,w4\n";
  for (const Patient& p : trace.patients) {
    os << "p," << p.id << ',' << p.grade << ',' << format_double_exact(p.arrival) << ','
       << int(p.ambulance) << ',' << int(p.diagnostic);
    for (double v : {p.t_sw3, p.t_sw4, p.t_first, p.t_second, p.t_leave, p.w1, p.w2, p.w3, p.w4})
      os << ',' << format_double_exact(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace edsim
