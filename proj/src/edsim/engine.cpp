#include "edsim/engine.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace edsim {

namespace {
enum CompletionKind : uint8_t {
  kRegisterDone = 0,
  kTriageDone = 1,
  kFirstDone = 2,
  kDiagDone = 3,
  kSecondDone = 4,
};
}  // namespace

int SimState::queue_len_all_doctors(QueueClass q) const {
  if (!q.is_second()) return int(first_q_[size_t(q.idx)].size());
  int n = 0;
  for (const auto& per_doc : second_q_) n += int(per_doc[size_t(q.idx - kGradeCount)].size());
  return n;
}

int32_t SimState::head(QueueClass q, int doctor) const {
  const PatientFifo& f = queue(q, doctor);
  return f.empty() ? -1 : f.front();
}

int32_t SimState::last(QueueClass q, int doctor) const {
  const PatientFifo& f = queue(q, doctor);
  return f.empty() ? -1 : f.back();
}

int32_t SimState::median(QueueClass q, int doctor) const {
  const PatientFifo& f = queue(q, doctor);
  return f.empty() ? -1 : f.at((f.size() - 1) / 2);
}

double SimState::current_ttd(int32_t id) const {
  const Patient& p = patients_[size_t(id)];
  return is_set(p.t_first) ? p.t_first - p.arrival : now_ - p.arrival;
}

double SimState::accumulated_w1(int32_t id) const {
  const Patient& p = patients_[size_t(id)];
  auto z = [](double v) { return is_set(v) ? v : 0.0; };
  return z(p.w1) + z(p.w2) + (now_ - p.t_sw3);
}

double SimState::accumulated_w(int32_t id) const {
  const Patient& p = patients_[size_t(id)];
  auto z = [](double v) { return is_set(v) ? v : 0.0; };
  return z(p.w1) + z(p.w2) + z(p.w3) + (now_ - p.t_sw4);
}

int SimState::idle_doctor_count() const {
  int n = 0;
  for (int32_t pid : doctor_patient_) n += pid < 0;
  return n;
}

int SimState::missed_target_count(int grade_idx) const {
  double target = sc_->ttd_target[size_t(grade_idx)];
  int n = 0;
  for (int32_t id : arrived_[size_t(grade_idx)]) n += current_ttd(id) >= target;
  return n;
}

std::vector<int> dispatch_order(std::span<const double> idle_since, std::span<const int> ids) {
  std::vector<size_t> idx(ids.size());
  std::iota(idx.begin(), idx.end(), size_t(0));
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (idle_since[a] != idle_since[b]) return idle_since[a] < idle_since[b];
    return ids[a] < ids[b];
  });
  std::vector<int> order;
  order.reserve(ids.size());
  for (size_t i : idx) order.push_back(ids[i]);
  return order;
}

void Engine::push_event(double t, uint8_t kind, int32_t patient) {
  events_.push_back(Event{t, kind, patient});
  std::push_heap(events_.begin(), events_.end(), std::greater<>());
}

void Engine::start_register(int32_t p) {
  Patient& pt = st_.patients_[size_t(p)];
  --free_clerks_;
  pt.w1 = st_.now_ - stage_wait_start_[size_t(p)];
  push_event(st_.now_ + pt.dur_register, kRegisterDone, p);
}

void Engine::start_triage(int32_t p) {
  Patient& pt = st_.patients_[size_t(p)];
  --free_nurses_;
  pt.w2 = st_.now_ - stage_wait_start_[size_t(p)];
  push_event(st_.now_ + pt.dur_triage, kTriageDone, p);
}

void Engine::enter_first_queue(int32_t p) {
  Patient& pt = st_.patients_[size_t(p)];
  pt.t_sw3 = st_.now_;
  st_.first_q_[size_t(grade_index(pt.grade))].push(p);
  ++st_.first_waiting_;
}

void Engine::handle_arrival(int32_t p) {
  Patient& pt = st_.patients_[size_t(p)];
  st_.arrived_[size_t(grade_index(pt.grade))].push_back(p);
  if (pt.grade == 2 && pt.ambulance) {
    enter_first_queue(p);  // triaged on the ambulance, straight to Q_{2,1}
    return;
  }
  ++st_.in_reg_triage_;
  stage_wait_start_[size_t(p)] = st_.now_;
  if (pt.grade == 2) {
    // walk-in grade 2: no registration, short triage only
    if (free_nurses_ > 0) start_triage(p);
    else triage_q_.push(p);
  } else {
    if (free_clerks_ > 0) start_register(p);
    else register_q_.push(p);
  }
}

void Engine::handle_completion(const Event& ev) {
  Patient& pt = st_.patients_[size_t(ev.patient)];
  switch (ev.kind) {
    case kRegisterDone: {
      ++free_clerks_;
      stage_wait_start_[size_t(ev.patient)] = st_.now_;
      if (free_nurses_ > 0) start_triage(ev.patient);
      else triage_q_.push(ev.patient);
      if (!register_q_.empty()) start_register(register_q_.pop());
      break;
    }
    case kTriageDone: {
      ++free_nurses_;
      --st_.in_reg_triage_;
      enter_first_queue(ev.patient);
      if (!triage_q_.empty()) start_triage(triage_q_.pop());
      break;
    }
    case kFirstDone: {
      int doc = int(st_.first_doctor_[size_t(ev.patient)]);
      st_.doctor_patient_[size_t(doc)] = -1;
      st_.doctor_idle_since_[size_t(doc)] = st_.now_;
      if (pt.diagnostic) {
        ++st_.in_diag_total_;
        ++st_.in_diag_by_doc_[size_t(doc)];
        push_event(st_.now_ + pt.dur_diag, kDiagDone, ev.patient);
      } else {
        pt.t_leave = st_.now_;
        ++discharged_;
      }
      break;
    }
    case kDiagDone: {
      int doc = int(st_.first_doctor_[size_t(ev.patient)]);
      --st_.in_diag_total_;
      --st_.in_diag_by_doc_[size_t(doc)];
      pt.t_sw4 = st_.now_;  // w4 starts exactly when the diagnostic delay ends
      st_.second_q_[size_t(doc)][size_t(grade_index(pt.grade))].push(ev.patient);
      ++st_.second_waiting_[size_t(doc)];
      break;
    }
    case kSecondDone: {
      int doc = int(st_.first_doctor_[size_t(ev.patient)]);
      st_.doctor_patient_[size_t(doc)] = -1;
      st_.doctor_idle_since_[size_t(doc)] = st_.now_;
      pt.t_leave = st_.now_;
      ++discharged_;
      break;
    }
    default:
      throw std::logic_error("unknown event kind");
  }
}

void Engine::perform_dispatch(int doctor, QueueClass q) {
  PatientFifo& fifo = st_.queue_mut(q, doctor);
  int32_t p = fifo.pop();
  Patient& pt = st_.patients_[size_t(p)];
  st_.doctor_patient_[size_t(doctor)] = p;
  if (q.is_second()) --st_.second_waiting_[size_t(doctor)];
  else --st_.first_waiting_;
  if (q.is_second()) {
    pt.w4 = st_.now_ - pt.t_sw4;
    pt.t_second = st_.now_;
    push_event(st_.now_ + pt.dur_second, kSecondDone, p);
  } else {
    pt.w3 = st_.now_ - pt.t_sw3;
    pt.t_first = st_.now_;
    st_.first_doctor_[size_t(p)] = int32_t(doctor);
    push_event(st_.now_ + pt.dur_first, kFirstDone, p);
  }
  trace_.dispatches.push_back(DispatchRecord{st_.now_, int16_t(doctor), q, p});
  std::array<uint16_t, 8> lens;
  for (int i = 0; i < kQueueClassCount; ++i)
    lens[size_t(i)] = uint16_t(st_.queue_len_all_doctors(QueueClass::from_index(i)));
  trace_.queue_lens_after.push_back(lens);
}

void Engine::dispatch_scan() {
  const int nd = st_.doctor_count();
  for (;;) {
    // idle doctors, longest idle first, ties by id
    int order[64];
    int n_idle = 0;
    for (int d = 0; d < nd; ++d)
      if (st_.doctor_idle(d)) order[n_idle++] = d;
    std::sort(order, order + n_idle, [&](int a, int b) {
      double ia = st_.doctor_idle_since_[size_t(a)], ib = st_.doctor_idle_since_[size_t(b)];
      if (ia != ib) return ia < ib;
      return a < b;
    });
    bool dispatched = false;
    for (int i = 0; i < n_idle; ++i) {
      int d = order[i];
      if (st_.all_views_empty(d)) continue;  // the policy must return none here anyway
      std::optional<QueueClass> choice = policy_->select(st_, d);
      if (!choice) {
        if (!st_.all_views_empty(d)) policy_fault(d, "policy returned none with non-empty views");
        continue;
      }
      if (st_.queue(*choice, d).empty()) policy_fault(d, "policy selected an empty queue");
      if (observer_) observer_->on_dispatch(st_, d, *choice, st_.head(*choice, d));
      perform_dispatch(d, *choice);
      dispatched = true;
      break;  // idle set changed, recompute the order
    }
    if (!dispatched) return;
  }
}

Trace Engine::run(const Instance& inst, SelectionPolicy& policy, DispatchObserver* observer) {
  inst_ = &inst;
  policy_ = &policy;
  observer_ = observer;
  if (sc_->n_doctors > 64) throw std::invalid_argument("more than 64 doctors not supported");

  const size_t n = inst.patients.size();
  st_.now_ = 0;
  st_.sc_ = sc_;
  st_.patients_ = inst.patients;
  st_.first_doctor_.assign(n, -1);
  for (auto& q : st_.first_q_) q.clear();
  if (st_.second_q_.size() != size_t(sc_->n_doctors))
    st_.second_q_.resize(size_t(sc_->n_doctors));
  for (auto& per_doc : st_.second_q_)
    for (auto& q : per_doc) q.clear();
  st_.doctor_idle_since_.assign(size_t(sc_->n_doctors), 0.0);
  st_.doctor_patient_.assign(size_t(sc_->n_doctors), -1);
  for (auto& a : st_.arrived_) a.clear();
  st_.in_diag_total_ = 0;
  st_.in_diag_by_doc_.assign(size_t(sc_->n_doctors), 0);
  st_.in_reg_triage_ = 0;
  st_.first_waiting_ = 0;
  st_.second_waiting_.assign(size_t(sc_->n_doctors), 0);

  events_.clear();
  register_q_.clear();
  triage_q_.clear();
  free_clerks_ = sc_->n_clerks;
  free_nurses_ = sc_->n_nurses;
  stage_wait_start_.assign(n, 0.0);
  discharged_ = 0;
  trace_ = Trace{};
  trace_.dispatches.reserve(n * 2);
  trace_.queue_lens_after.reserve(n * 2);

  size_t next_arrival = 0;  // instance patients are sorted by arrival time
  while (next_arrival < n || !events_.empty()) {
    double t_event = events_.empty() ? std::numeric_limits<double>::infinity() : events_.front().t;
    double t_arr = next_arrival < n ? inst.patients[next_arrival].arrival
                                    : std::numeric_limits<double>::infinity();
    double t = std::min(t_event, t_arr);
    st_.now_ = t;
    // at equal timestamps: completions first (by patient id), then arrivals
    while (!events_.empty() && events_.front().t == t) {
      std::pop_heap(events_.begin(), events_.end(), std::greater<>());
      Event ev = events_.back();
      events_.pop_back();
      handle_completion(ev);
    }
    while (next_arrival < n && inst.patients[next_arrival].arrival == t)
      handle_arrival(int32_t(next_arrival++));
    dispatch_scan();
  }

  if (discharged_ != int(n))
    throw std::logic_error("simulation ended with undischarged patients: " + state_dump());

  Trace out = std::move(trace_);
  out.patients = std::move(st_.patients_);
  return out;
}

void Engine::policy_fault(int doctor, const char* what) const {
  throw std::runtime_error(std::string("policy fault for doctor ") + std::to_string(doctor) +
                           ": " + what + "\n" + state_dump());
}

std::string Engine::state_dump() const {
  std::ostringstream os;
  os << "t=" << st_.now_ << " queue lengths:";
  for (int i = 0; i < kQueueClassCount; ++i) {
    QueueClass q = QueueClass::from_index(i);
    os << ' ' << q.name() << '=' << st_.queue_len_all_doctors(q);
  }
  os << " idle_doctors=" << st_.idle_doctor_count() << " discharged=" << discharged_ << '/'
     << (inst_ ? inst_->patients.size() : 0);
  return os.str();
}

std::vector<Patient> warmup_filter(std::span<const Patient> patients, const ScenarioConfig& sc) {
  std::vector<Patient> out;
  for (const Patient& p : patients)
    if (p.arrival >= sc.eval_start && p.arrival <= sc.eval_end) out.push_back(p);
  return out;
}

}  // namespace edsim
