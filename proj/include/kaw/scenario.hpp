#pragma once

#include "kaw/dynamics.hpp"
#include "kaw/grid.hpp"
#include "kaw/knowledge.hpp"
#include "kaw/ltl.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace kaw {

struct RoleSpec {
    std::string name;
    double range = 0; // Proximity detection range in meters
};

// Validated contents of a scenario file.
struct Scenario {
    std::string name;

    std::string model;
    double tau = 0;
    HyperRect disturbance;
    HyperRect state_bounds;
    std::vector<bool> periodic;
    HyperRect input_bounds;
    Vec eta_x;
    Vec eta_u;

    std::vector<std::string> concepts;
    std::vector<RoleSpec> roles;
    std::vector<std::string> tbox;
    ConceptRegions regions;

    std::string objective_text;
    LtlFormula objective;
    Vec initial_state;
    std::uint64_t seed = 0;
    std::size_t max_steps = 0;
};

/*
 * Reads a scenario from JSON. Numbers may also be given as strings in
 * multiples of pi ("pi", "-2pi", "pi/2", "0.5pi"). Throws ParseError with
 * line and column for malformed JSON or an unparsable formula, and
 * ValidationError naming the offending field otherwise.
 */
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(std::string_view text, const std::string& name = "scenario");

// Multiplies the state grid spacing (input spacing unchanged).
void scale_state_eta(Scenario& scn, double factor);

// Everything derived from a scenario that the pipeline stages share.
struct World {
    Scenario scenario;
    ContinuousSystem system;
    Grid grid_x;
    Grid grid_u;
    KnowledgeBase kb;
    Interpretation interp;
};

World build_world(Scenario scn);

} // namespace kaw
