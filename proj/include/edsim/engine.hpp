#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "edsim/instance.hpp"
#include "edsim/scenario.hpp"
#include "edsim/types.hpp"

namespace edsim {

class SimState;

// Doctor-dispatch policy. select() must return a queue class whose view for
// the given doctor is non-empty, or nullopt only when all 8 views are empty.
struct SelectionPolicy {
  virtual ~SelectionPolicy() = default;
  virtual std::optional<QueueClass> select(const SimState& state, int doctor) = 0;
};

// Observed immediately before each dispatch is applied, with the decision
// state, the dispatching doctor, the chosen class and the patient at its head.
struct DispatchObserver {
  virtual ~DispatchObserver() = default;
  virtual void on_dispatch(const SimState& state, int doctor, QueueClass q, int32_t patient) = 0;
};

struct DispatchRecord {
  double t = 0;
  int16_t doctor = 0;
  QueueClass queue;
  int32_t patient = 0;
};

struct Trace {
  std::vector<DispatchRecord> dispatches;
  std::vector<Patient> patients;  // completed records, indexed by patient id
  // Doctor-aggregated lengths of the 8 queue classes right after each
  // dispatch; consumed by the queue-insertion neighborhood.
  std::vector<std::array<uint16_t, 8>> queue_lens_after;
};

// FIFO of patient ids with a pop cursor; iteration is in wait-start order.
class PatientFifo {
 public:
  void clear() { v_.clear(); head_ = 0; }
  void push(int32_t x) { v_.push_back(x); }
  int32_t pop() { return v_[head_++]; }
  size_t size() const { return v_.size() - head_; }
  bool empty() const { return size() == 0; }
  int32_t at(size_t i) const { return v_[head_ + i]; }
  int32_t front() const { return v_[head_]; }
  int32_t back() const { return v_.back(); }

 private:
  std::vector<int32_t> v_;
  size_t head_ = 0;
};

// Read-only view of the running simulation, handed to policies, observers and
// the feature extractor. Second-consultation queues are per doctor; a patient
// waiting for doctor d is invisible to the views of other doctors.
class SimState {
 public:
  double now() const { return now_; }
  const ScenarioConfig& scenario() const { return *sc_; }
  int doctor_count() const { return int(doctor_idle_since_.size()); }

  int queue_len(QueueClass q, int doctor) const { return int(queue(q, doctor).size()); }
  int queue_len_all_doctors(QueueClass q) const;

  // Patient ids of the head/last/median member, -1 on an empty view. The
  // median of an even-length queue is the lower median.
  int32_t head(QueueClass q, int doctor) const;
  int32_t last(QueueClass q, int doctor) const;
  int32_t median(QueueClass q, int doctor) const;
  int32_t queue_at(QueueClass q, int doctor, size_t i) const { return queue(q, doctor).at(i); }

  const Patient& patient(int32_t id) const { return patients_[size_t(id)]; }

  // Live measures at the current clock. current_ttd freezes at the realized
  // value once the first consultation has started.
  double current_ttd(int32_t id) const;
  double accumulated_w1(int32_t id) const;  // waiting in a first-consultation queue
  double accumulated_w(int32_t id) const;   // waiting in a second-consultation queue

  bool doctor_idle(int doctor) const { return doctor_patient_[size_t(doctor)] < 0; }
  double doctor_idle_since(int doctor) const { return doctor_idle_since_[size_t(doctor)]; }
  int idle_doctor_count() const;

  int arrived_count(int grade_idx) const { return int(arrived_[size_t(grade_idx)].size()); }
  // Arrived grade-j patients whose (current or realized) time-to-doctor has
  // already reached the grade's target.
  int missed_target_count(int grade_idx) const;

  int in_diagnostics() const { return in_diag_total_; }
  int in_diagnostics_by(int doctor) const { return in_diag_by_doc_[size_t(doctor)]; }
  int in_register_triage() const { return in_reg_triage_; }

  bool all_views_empty(int doctor) const {
    return first_waiting_ == 0 && second_waiting_[size_t(doctor)] == 0;
  }

 private:
  friend class Engine;
  friend struct SimStateProbe;  // test fixture

  const PatientFifo& queue(QueueClass q, int doctor) const {
    return q.is_second() ? second_q_[size_t(doctor)][size_t(q.idx - kGradeCount)]
                         : first_q_[size_t(q.idx)];
  }
  PatientFifo& queue_mut(QueueClass q, int doctor) {
    return const_cast<PatientFifo&>(queue(q, doctor));
  }

  double now_ = 0;
  const ScenarioConfig* sc_ = nullptr;
  std::vector<Patient> patients_;
  std::vector<int32_t> first_doctor_;
  std::array<PatientFifo, kGradeCount> first_q_;
  std::vector<std::array<PatientFifo, kGradeCount>> second_q_;  // [doctor][grade]
  std::vector<double> doctor_idle_since_;
  std::vector<int32_t> doctor_patient_;  // -1 when idle
  std::array<std::vector<int32_t>, kGradeCount> arrived_;
  int in_diag_total_ = 0;
  std::vector<int> in_diag_by_doc_;
  int in_reg_triage_ = 0;
  int first_waiting_ = 0;            // total over the 4 first-consultation queues
  std::vector<int> second_waiting_;  // per doctor, over that doctor's 4 queues
};

// Idle doctors ordered longest-idle first (ascending idle-since), ties by id.
std::vector<int> dispatch_order(std::span<const double> idle_since, std::span<const int> ids);

// Event-driven simulation of the ED process. One Engine instance is
// single-threaded; distinct engines run concurrently without shared state.
class Engine {
 public:
  explicit Engine(const ScenarioConfig& sc) : sc_(&sc) {}

  // Runs the full instance until every patient is discharged (the clock may
  // pass 1440; there are no post-midnight arrivals). Deterministic given
  // (instance, policy). Throws on policy contract violations, with a state
  // dump in the message.
  Trace run(const Instance& inst, SelectionPolicy& policy, DispatchObserver* observer = nullptr);

 private:
  struct Event {
    double t;
    uint8_t kind;  // completion kinds only; arrivals are merged from the instance
    int32_t patient;
    bool operator>(const Event& o) const {
      if (t != o.t) return t > o.t;
      return patient > o.patient;
    }
  };

  void start_register(int32_t p);
  void start_triage(int32_t p);
  void enter_first_queue(int32_t p);
  void handle_completion(const Event& ev);
  void handle_arrival(int32_t p);
  void dispatch_scan();
  void perform_dispatch(int doctor, QueueClass q);
  [[noreturn]] void policy_fault(int doctor, const char* what) const;
  std::string state_dump() const;
  void push_event(double t, uint8_t kind, int32_t patient);

  const ScenarioConfig* sc_;
  const Instance* inst_ = nullptr;
  SelectionPolicy* policy_ = nullptr;
  DispatchObserver* observer_ = nullptr;

  SimState st_;
  std::vector<Event> events_;  // binary heap, min on top
  PatientFifo register_q_, triage_q_;
  int free_clerks_ = 0, free_nurses_ = 0;
  std::vector<double> stage_wait_start_;
  int discharged_ = 0;
  Trace trace_;
};

// Patients arriving inside the evaluation window [eval_start, eval_end],
// regardless of when they leave.
std::vector<Patient> warmup_filter(std::span<const Patient> patients, const ScenarioConfig& sc);

}  // namespace edsim
