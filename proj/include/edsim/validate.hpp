#pragma once

#include <string>
#include <vector>

#include "edsim/engine.hpp"
#include "edsim/instance.hpp"

namespace edsim {

// Independent audit of a finished run. Works off the trace and the recorded
// patient timestamps only, not the engine internals. Checks:
//  - flow conservation: every instance patient discharged exactly once, one
//    dispatch per required consultation, grade counts preserved;
//  - within-queue FIFO: no service-order inversion against wait-start order
//    in any of the 4 + 4|D| queues;
//  - same-doctor pairing of first and second consultations;
//  - resource exclusivity for doctors, clerks and triage nurses;
//  - w4 starts exactly when the diagnostic delay ends;
//  - timestamp chains consistent with the sampled durations.
// Returns human-readable violations; empty means the trace is valid.
std::vector<std::string> check_trace(const Instance& inst, const ScenarioConfig& sc,
                                     const Trace& trace);

}  // namespace edsim
