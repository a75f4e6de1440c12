#include "edsim/policies.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edsim {

namespace {

QueueOrdering make_ordering(std::array<int, 8> idx) {
  QueueOrdering o;
  for (size_t i = 0; i < 8; ++i) o[i] = QueueClass::from_index(idx[i]);
  return o;
}

// Index layout: 0..3 first consultation grades 2..5, 4..7 second.
const QueueOrdering kQp1 = make_ordering({0, 1, 2, 3, 4, 5, 6, 7});
const QueueOrdering kQp2 = make_ordering({0, 4, 1, 5, 2, 6, 3, 7});
const QueueOrdering kQp3 = make_ordering({4, 5, 6, 7, 0, 1, 2, 3});
const QueueOrdering kQp4 = make_ordering({4, 0, 5, 1, 6, 2, 7, 3});

}  // namespace

const QueueOrdering& qp_ordering(int which) {
  switch (which) {
    case 1: return kQp1;
    case 2: return kQp2;
    case 3: return kQp3;
    case 4: return kQp4;
    default: throw std::invalid_argument("qp ordering must be 1..4");
  }
}

int qp2_rank(QueueClass q) { return 2 * (q.grade() - kGradeMin) + (q.is_second() ? 1 : 0); }

std::optional<QueueClass> qp_select(const QueueOrdering& ordering, const SimState& st, int doctor) {
  for (QueueClass q : ordering)
    if (st.queue_len(q, doctor) > 0) return q;
  return std::nullopt;
}

double BetaWeights::sum() const {
  double s = 0;
  for (double v : beta) s += v;
  return s;
}

bool BetaWeights::valid(std::string* why) const {
  for (double v : beta) {
    if (!(v >= 0)) {
      if (why) *why = "negative weight";
      return false;
    }
  }
  if (std::abs(sum() - 10.0) > 1e-9) {
    if (why) *why = "weights must sum to 10";
    return false;
  }
  for (int k = 0; k < 2; ++k)
    for (int g = 1; g < kGradeCount; ++g)
      if (!(beta[size_t(4 * k + g - 1)] > beta[size_t(4 * k + g)])) {
        if (why) *why = "weights must strictly decrease with grade per consultation type";
        return false;
      }
  return true;
}

void save_beta(const BetaWeights& b, double fitness, std::ostream& os) {
  os << "# edsim-apq-weights v1\n";
  char buf[64];
  for (int k = 0; k < 2; ++k)
    for (int g = kGradeMin; g <= kGradeMax; ++g) {
      QueueClass q(g, k == 0 ? Consult::First : Consult::Second);
      std::snprintf(buf, sizeof(buf), "%.17g", b[q]);
      os << "beta_" << g << '_' << k + 1 << ' ' << buf << '\n';
    }
  std::snprintf(buf, sizeof(buf), "%.17g", fitness);
  os << "fitness " << buf << '\n';
}

BetaWeights parse_beta(std::istream& is) {
  BetaWeights b;
  std::string line;
  int seen = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    double v;
    ls >> key >> v;
    if (!ls) throw std::runtime_error("malformed weights line: " + line);
    if (key == "fitness") continue;
    if (key.size() != 8 || key.rfind("beta_", 0) != 0)
      throw std::runtime_error("unknown weights key: " + key);
    int g = key[5] - '0';
    int k = key[7] - '0';
    b.at(g, k == 1 ? Consult::First : Consult::Second) = v;
    ++seen;
  }
  if (seen != 8) throw std::runtime_error("weights file must define all 8 beta values");
  return b;
}

BetaWeights load_beta(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read weights file " + path);
  return parse_beta(is);
}

std::optional<QueueClass> apq_select(const BetaWeights& beta, const SimState& st, int doctor,
                                     double t) {
  bool found = false;
  double best_score = 0;
  QueueClass best;
  for (int i = 0; i < kQueueClassCount; ++i) {
    QueueClass q = QueueClass::from_index(i);
    int32_t h = st.head(q, doctor);
    if (h < 0) continue;
    double waited = t - st.patient(h).arrival;
    if (waited < 0)
      throw std::runtime_error("apq_select: negative accumulated time, clock inconsistency");
    double score = beta[q] * waited;
    if (!found || score > best_score ||
        (score == best_score && qp2_rank(q) < qp2_rank(best))) {
      found = true;
      best_score = score;
      best = q;
    }
  }
  if (!found) return std::nullopt;
  return best;
}

}  // namespace edsim
