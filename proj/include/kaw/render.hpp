#pragma once

#include "kaw/runtime.hpp"
#include "kaw/scenario.hpp"

#include <ostream>

namespace kaw {

// Planar SVG of the map, the detection zones of the signs seen during the
// run, and the trajectory.
void render_svg(std::ostream& out, const World& world, const Trace& trace);

} // namespace kaw
