#pragma once

// Test fixture that assembles SimState snapshots directly, so policies and
// the feature extractor can be probed on hand-crafted queue configurations.

#include "edsim/engine.hpp"

namespace edsim {

struct SimStateProbe {
  SimState st;

  explicit SimStateProbe(const ScenarioConfig& sc, double now = 0.0) {
    st.sc_ = &sc;
    st.now_ = now;
    st.second_q_.resize(size_t(sc.n_doctors));
    st.doctor_idle_since_.assign(size_t(sc.n_doctors), 0.0);
    st.doctor_patient_.assign(size_t(sc.n_doctors), -1);
    st.in_diag_by_doc_.assign(size_t(sc.n_doctors), 0);
    st.second_waiting_.assign(size_t(sc.n_doctors), 0);
  }

  void set_now(double t) { st.now_ = t; }

  int32_t new_patient(int grade, double arrival) {
    Patient p;
    p.id = int32_t(st.patients_.size());
    p.grade = grade;
    p.arrival = arrival;
    st.patients_.push_back(p);
    st.first_doctor_.push_back(-1);
    st.arrived_[size_t(grade_index(grade))].push_back(p.id);
    return p.id;
  }

  // patient waiting in Q_{grade,1}; waits before the queue default to zero
  int32_t add_first(int grade, double arrival, double t_sw3, double w1 = 0, double w2 = 0) {
    int32_t id = new_patient(grade, arrival);
    Patient& p = st.patients_[size_t(id)];
    p.t_sw3 = t_sw3;
    p.w1 = w1;
    p.w2 = w2;
    st.first_q_[size_t(grade_index(grade))].push(id);
    ++st.first_waiting_;
    return id;
  }

  // patient waiting in Q_{grade,2}^doctor
  int32_t add_second(int grade, int doctor, double arrival, double t_sw4, double prior_wait = 0) {
    int32_t id = new_patient(grade, arrival);
    Patient& p = st.patients_[size_t(id)];
    p.diagnostic = true;
    p.t_sw4 = t_sw4;
    p.w1 = 0;
    p.w2 = 0;
    p.w3 = prior_wait;
    p.t_first = arrival + prior_wait;
    st.first_doctor_[size_t(id)] = doctor;
    st.second_q_[size_t(doctor)][size_t(grade_index(grade))].push(id);
    ++st.second_waiting_[size_t(doctor)];
    return id;
  }

  // marks a patient as already seen at the given first-consultation time
  void set_seen(int32_t id, double t_first) { st.patients_[size_t(id)].t_first = t_first; }

  void set_doctor_busy(int doctor, int32_t patient) { st.doctor_patient_[size_t(doctor)] = patient; }
  void set_in_diag(int total) { st.in_diag_total_ = total; }
  void set_in_diag_by(int doctor, int n) { st.in_diag_by_doc_[size_t(doctor)] = n; }
  void set_in_reg_triage(int n) { st.in_reg_triage_ = n; }
};

}  // namespace edsim
