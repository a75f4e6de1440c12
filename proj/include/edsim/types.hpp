#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace edsim {

// Triage grades run from 2 (urgent) to 5 (non-urgent); grade 1 (resuscitation)
// does not compete for the modeled resources and is excluded.
inline constexpr int kGradeMin = 2;
inline constexpr int kGradeMax = 5;
inline constexpr int kGradeCount = 4;
inline constexpr int kQueueClassCount = 8;

// Sentinel for durations/timestamps that do not apply; all real values are >= 0.
inline constexpr double kAbsent = -1.0;
inline bool is_set(double v) { return v >= 0.0; }

inline int grade_index(int grade) { return grade - kGradeMin; }

enum class Consult : uint8_t { First = 1, Second = 2 };

// One of the 8 doctor-facing queue classes: (triage grade, consultation type).
// Index layout: 0..3 = first consultation grades 2..5, 4..7 = second.
struct QueueClass {
  uint8_t idx = 0;

  QueueClass() = default;
  constexpr QueueClass(int grade, Consult c)
      : idx(uint8_t((int(c) - 1) * kGradeCount + grade - kGradeMin)) {}

  static constexpr QueueClass from_index(int i) {
    QueueClass q;
    q.idx = uint8_t(i);
    return q;
  }

  constexpr int grade() const { return idx % kGradeCount + kGradeMin; }
  constexpr Consult consult() const { return idx < kGradeCount ? Consult::First : Consult::Second; }
  constexpr bool is_second() const { return idx >= kGradeCount; }

  std::string name() const {
    return "Q" + std::to_string(grade()) + (is_second() ? "2" : "1");
  }

  friend constexpr bool operator==(QueueClass a, QueueClass b) { return a.idx == b.idx; }
  friend constexpr bool operator!=(QueueClass a, QueueClass b) { return a.idx != b.idx; }
};

inline QueueClass parse_queue_class(std::string_view s) {
  if (s.size() != 3 || s[0] != 'Q' || s[1] < '2' || s[1] > '5' || (s[2] != '1' && s[2] != '2'))
    throw std::invalid_argument("bad queue class: " + std::string(s));
  return QueueClass(s[1] - '0', s[2] == '1' ? Consult::First : Consult::Second);
}

// One sampled patient. Durations are pre-drawn when the instance is generated;
// timestamps and waits are filled by the simulation engine.
struct Patient {
  int32_t id = 0;
  int grade = kGradeMin;
  double arrival = 0.0;  // t_a, minutes from midnight
  bool ambulance = false;
  bool diagnostic = false;  // needs diagnostic tests and a second consultation

  // Sampled activity durations in minutes; kAbsent when the step is skipped.
  double dur_register = kAbsent;
  double dur_triage = kAbsent;
  double dur_first = 0.0;
  double dur_diag = kAbsent;
  double dur_second = kAbsent;

  // Process timestamps (minutes) and stage waits, set by the engine.
  double t_sw3 = kAbsent;    // joined first-consultation queue
  double t_sw4 = kAbsent;    // joined second-consultation queue
  double t_first = kAbsent;  // start of first consultation (t_fc)
  double t_second = kAbsent; // start of second consultation (t_sc)
  double t_leave = kAbsent;  // discharge (t_l)
  double w1 = kAbsent;       // wait for register
  double w2 = kAbsent;       // wait for triage
  double w3 = kAbsent;       // wait for first consultation
  double w4 = kAbsent;       // wait for second consultation

  double ttd() const { return t_first - arrival; }
  double los() const { return t_leave - arrival; }

  // W1: total waiting until the first consultation; skipped stages count zero.
  double wait_to_first() const {
    auto z = [](double v) { return is_set(v) ? v : 0.0; };
    return z(w1) + z(w2) + z(w3);
  }

  // W: total waiting time over the whole stay.
  double total_wait() const { return wait_to_first() + (is_set(w4) ? w4 : 0.0); }
};

// Weights (lambda_W, lambda_ttd) of the combined performance measure.
struct ObjectiveWeights {
  std::string name = "c15";
  double lambda_w = 1.0;
  double lambda_ttd = 15.0;
};

}  // namespace edsim
