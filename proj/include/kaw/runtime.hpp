#pragma once

#include "kaw/abstraction.hpp"
#include "kaw/scenario.hpp"
#include "kaw/spec.hpp"
#include "kaw/synthesis.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace kaw {

struct SensorState {
    CellSet known_signs;
    long last_detection_step = -1;
};

SensorState initial_sensor(const Interpretation& interp);

// Sign cells newly related to the current cell through a detection role;
// they are added to sensor.known_signs.
std::vector<CellId> sensor_step(const Interpretation& interp, const KnowledgeBase& kb, CellId current,
                                SensorState& sensor, long step = 0);

enum class Outcome { ReachedTarget, EnteredAvoid, SynthesisFailed, StepLimit };

std::string to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct TraceStep {
    std::size_t step = 0;
    double time = 0;
    Vec state;
    CellId cell;
    std::int32_t input_index = -1; // -1 on the final row
    Vec input;                     // empty on the final row
    std::vector<CellId> detected;
    bool resynthesized = false;
};

struct Trace {
    std::uint64_t seed = 0;
    std::vector<TraceStep> steps;
    Outcome outcome = Outcome::StepLimit;
    // Wall time of each synthesis, the initial one first. Not serialized.
    std::vector<double> synthesis_seconds;
};

/*
 * Closed loop: at every step the state is quantized, the sensor runs, the
 * game is re-solved when something new was detected, and the policy input
 * is applied for tau with a disturbance drawn uniformly from W (constant
 * over each step, seeded). The run stops on target entry, avoid entry, loss
 * of the winning set, or after max_steps inputs.
 */
Trace run_closed_loop(const World& world, const Abstraction& abs, std::uint64_t seed, std::size_t max_steps);

// Solves the game the runtime would face with the given signs known.
Controller synthesize(const World& world, const Abstraction& abs, const CellSet& known_signs);

void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::filesystem::path& path);

} // namespace kaw
