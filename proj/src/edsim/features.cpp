#include "edsim/features.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "edsim/textio.hpp"

namespace edsim {

namespace {

// head/last/median/mean of a per-patient measure over one queue view
template <class Measure>
void queue_stats(const SimState& st, QueueClass q, int doctor, Measure m, double* out) {
  int len = st.queue_len(q, doctor);
  if (len == 0) {
    out[0] = out[1] = out[2] = out[3] = kEmptyStat;
    return;
  }
  out[0] = m(st.head(q, doctor));
  out[1] = m(st.last(q, doctor));
  out[2] = m(st.median(q, doctor));
  double sum = 0;
  for (int i = 0; i < len; ++i) sum += m(st.queue_at(q, doctor, size_t(i)));
  out[3] = sum / len;
}

}  // namespace

void extract_features(const SimState& st, int doctor, double* out) {
  const ScenarioConfig& sc = st.scenario();
  int k = 0;

  // general block
  out[k++] = st.now();
  out[k++] = doctor;
  out[k++] = st.idle_doctor_count();
  for (int j = 0; j < kGradeCount; ++j) out[k++] = st.missed_target_count(j);
  for (int j = 0; j < kGradeCount; ++j) out[k++] = st.arrived_count(j);

  // first-consultation queues
  for (int j = 0; j < kGradeCount; ++j) {
    QueueClass q(j + kGradeMin, Consult::First);
    double target = sc.ttd_target[size_t(j)];
    int len = st.queue_len(q, doctor);
    out[k++] = len;
    queue_stats(st, q, doctor, [&](int32_t id) { return st.current_ttd(id); }, out + k);
    k += 4;
    out[k++] = len;
    queue_stats(st, q, doctor, [&](int32_t id) { return st.accumulated_w1(id); }, out + k);
    k += 4;
    int missed = 0;
    std::array<int, 6> bucket{};  // [t-5,t) [t-10,t-5) [t-15,t-10) [t-20,t-15) [t-30,t-20) [t-40,t-30)
    for (int i = 0; i < len; ++i) {
      double ttd = st.current_ttd(st.queue_at(q, doctor, size_t(i)));
      if (ttd >= target) { ++missed; continue; }
      double slack = target - ttd;  // > 0 here
      if (slack <= 5) ++bucket[0];
      else if (slack <= 10) ++bucket[1];
      else if (slack <= 15) ++bucket[2];
      else if (slack <= 20) ++bucket[3];
      else if (slack <= 30) ++bucket[4];
      else if (slack <= 40) ++bucket[5];
    }
    out[k++] = missed;
    int n_buckets = j == 0 ? 3 : (j == 1 ? 4 : 6);
    for (int b = 0; b < n_buckets; ++b) out[k++] = bucket[size_t(b)];
  }

  // second-consultation queues of the dispatching doctor
  for (int j = 0; j < kGradeCount; ++j) {
    QueueClass q(j + kGradeMin, Consult::Second);
    queue_stats(st, q, doctor, [&](int32_t id) { return st.accumulated_w(id); }, out + k);
    k += 4;
  }

  // register/triage/diagnostics block
  out[k++] = st.in_diagnostics();
  out[k++] = st.in_diagnostics_by(doctor);
  out[k++] = st.in_register_triage();

  if (k != kFeatureDim) throw std::logic_error("feature layout does not match kFeatureDim");
}

void SampleSet::push(const double* f, uint8_t label, int32_t inst) {
  for (int i = 0; i < dim; ++i) features.push_back(float(f[i]));
  labels.push_back(label);
  instance_id.push_back(inst);
}

void SampleSet::append(const SampleSet& other) {
  if (other.dim != dim) throw std::invalid_argument("sample dimension mismatch");
  features.insert(features.end(), other.features.begin(), other.features.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  instance_id.insert(instance_id.end(), other.instance_id.begin(), other.instance_id.end());
}

namespace {

// Follows a recorded trace record-for-record; the decision state then matches
// the optimizer's run and the observer can harvest it.
class TracePolicy final : public SelectionPolicy {
 public:
  explicit TracePolicy(const Trace& trace) : records_(&trace.dispatches) {}

  std::optional<QueueClass> select(const SimState& st, int doctor) override {
    if (st.all_views_empty(doctor)) return std::nullopt;
    if (pos_ >= records_->size())
      throw std::runtime_error("trace/instance mismatch: trace ended with patients waiting");
    const DispatchRecord& r = (*records_)[pos_];
    if (r.doctor != doctor)
      throw std::runtime_error("trace/instance mismatch: unexpected dispatching doctor");
    if (st.head(r.queue, doctor) != r.patient)
      throw std::runtime_error("trace/instance mismatch: queue head differs from trace");
    ++pos_;
    return r.queue;
  }

 private:
  const std::vector<DispatchRecord>* records_;
  size_t pos_ = 0;
};

class HarvestObserver final : public DispatchObserver {
 public:
  HarvestObserver(SampleSet& out, int32_t instance_id) : out_(&out), inst_(instance_id) {}
  void on_dispatch(const SimState& st, int doctor, QueueClass q, int32_t) override {
    double f[kFeatureDim];
    extract_features(st, doctor, f);
    out_->push(f, q.idx, inst_);
  }

 private:
  SampleSet* out_;
  int32_t inst_;
};

}  // namespace

SampleSet harvest_samples(const Trace& trace, const Instance& inst, const ScenarioConfig& sc) {
  SampleSet out;
  TracePolicy policy(trace);
  HarvestObserver obs(out, inst.id);
  Engine engine(sc);
  Trace replay = engine.run(inst, policy, &obs);
  if (replay.dispatches.size() != trace.dispatches.size())
    throw std::runtime_error("trace/instance mismatch: dispatch count differs");
  return out;
}

SampleSet oversample(const SampleSet& in, Rng& rng) {
  SampleSet out = in;
  for (int type = 0; type < 2; ++type) {
    std::array<std::vector<size_t>, kGradeCount> by_class;
    for (size_t i = 0; i < in.size(); ++i) {
      int c = in.labels[i];
      if (c / kGradeCount == type) by_class[size_t(c % kGradeCount)].push_back(i);
    }
    size_t target = 0;
    for (const auto& v : by_class) target = std::max(target, v.size());
    for (const auto& v : by_class) {
      if (v.empty()) continue;
      for (size_t add = v.size(); add < target; ++add) {
        size_t pick = v[size_t(rng.below(v.size()))];
        const float* row = in.row(pick);
        out.features.insert(out.features.end(), row, row + in.dim);
        out.labels.push_back(in.labels[pick]);
        out.instance_id.push_back(in.instance_id[pick]);
      }
    }
  }
  return out;
}

void save_samples(const SampleSet& s, const std::string& path) {
  std::string header = "# edsim-samples v1\n" + std::to_string(s.dim) + " " +
                       std::to_string(s.size()) + "\n";
  std::string blob = header;
  blob.append(reinterpret_cast<const char*>(s.features.data()), s.features.size() * sizeof(float));
  blob.append(reinterpret_cast<const char*>(s.labels.data()), s.labels.size());
  blob.append(reinterpret_cast<const char*>(s.instance_id.data()),
              s.instance_id.size() * sizeof(int32_t));
  atomic_write(path, blob);
}

SampleSet load_samples(const std::string& path) {
  std::string blob = read_file(path);
  size_t nl1 = blob.find('\n');
  if (nl1 == std::string::npos || blob.substr(0, nl1) != "# edsim-samples v1")
    throw std::runtime_error("not an edsim samples file: " + path);
  size_t nl2 = blob.find('\n', nl1 + 1);
  SampleSet s;
  size_t count = 0;
  if (std::sscanf(blob.c_str() + nl1 + 1, "%d %zu", &s.dim, &count) != 2)
    throw std::runtime_error("malformed samples header: " + path);
  size_t off = nl2 + 1;
  size_t fbytes = count * size_t(s.dim) * sizeof(float);
  if (blob.size() != off + fbytes + count + count * sizeof(int32_t))
    throw std::runtime_error("samples file truncated: " + path);
  s.features.resize(count * size_t(s.dim));
  std::memcpy(s.features.data(), blob.data() + off, fbytes);
  off += fbytes;
  s.labels.resize(count);
  std::memcpy(s.labels.data(), blob.data() + off, count);
  off += count;
  s.instance_id.resize(count);
  std::memcpy(s.instance_id.data(), blob.data() + off, count * sizeof(int32_t));
  return s;
}

}  // namespace edsim
