#include "kaw/audit.hpp"

#include "kaw/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace kaw {

bool AuditReport::passed() const
{
    for (const auto& i : items)
        if (!i.passed) return false;
    return !items.empty();
}

const AuditItem& AuditReport::item(const std::string& name) const
{
    for (const auto& i : items)
        if (i.name == name) return i;
    throw ValidationError("no audit item '" + name + "'");
}

namespace {

constexpr double kStateTolerance = 1e-7;

// Logged states carry 9 significant digits; allow for that when matching cells.
bool state_in_cell(const Grid& g, const Vec& x, CellId c)
{
    if (!g.valid(c) || x.size() != g.dim()) return false;
    const HyperRect r = g.cell_rect(c);
    for (std::size_t d = 0; d < g.dim(); ++d) {
        if (g.periodic()[d]) {
            const double period = g.bounds().upper[d] - g.bounds().lower[d];
            const double mid = 0.5 * (r.lower[d] + r.upper[d]);
            if (std::abs(wrapped_difference(x[d], mid, period)) > 0.5 * g.eta()[d] + kStateTolerance) return false;
        } else if (x[d] < r.lower[d] - kStateTolerance || x[d] > r.upper[d] + kStateTolerance) {
            return false;
        }
    }
    return true;
}

double planar_distance(const Vec& x, const HyperRect& r)
{
    const double dx = std::max({0.0, r.lower[0] - x[0], x[0] - r.upper[0]});
    const double dy = std::max({0.0, r.lower[1] - x[1], x[1] - r.upper[1]});
    return std::hypot(dx, dy);
}

std::string step_list(const std::vector<std::size_t>& steps)
{
    std::ostringstream s;
    for (std::size_t i = 0; i < steps.size() && i < 8; ++i) s << (i ? " " : "") << steps[i];
    if (steps.size() > 8) s << " ...";
    return s.str();
}

} // namespace

AuditReport audit_trace(const World& world, const Trace& trace)
{
    AuditReport rep;
    const Grid& gx = world.grid_x;
    const auto& steps = trace.steps;
    const LtlFormula& objective = world.scenario.objective;
    auto add = [&](std::string name, bool ok, std::string detail) {
        rep.items.push_back({std::move(name), ok, std::move(detail)});
    };
    if (steps.empty()) {
        add("nonempty", false, "trace has no rows");
        return rep;
    }

    {
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const double t = static_cast<double>(i) * world.scenario.tau;
            if (steps[i].step != i || std::abs(steps[i].time - t) > 1e-9 * std::max(1.0, t)) bad.push_back(i);
        }
        add("timing", bad.empty(), bad.empty() ? "times are i*tau" : "bad rows: " + step_list(bad));
    }
    {
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < steps.size(); ++i)
            if (!state_in_cell(gx, steps[i].state, steps[i].cell)) bad.push_back(i);
        add("quantization", bad.empty(), bad.empty() ? "every state lies in its logged cell" : "bad rows: " + step_list(bad));
    }
    for (const auto& s : steps) {
        if (!gx.valid(s.cell)) {
            add("cells", false, "logged cell outside the state grid");
            return rep;
        }
    }

    const CellSet forbidden = ~proposition_extent(world.interp, objective.lhs());
    {
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < steps.size(); ++i)
            if (forbidden.test(steps[i].cell.value)) bad.push_back(i);
        add("no_obstacle", bad.empty(), bad.empty() ? "no forbidden cell visited" : "visits at rows: " + step_list(bad));
    }

    // Sensor replay; known[i] is the sign knowledge after row i's detection.
    SensorState sensor = initial_sensor(world.interp);
    std::vector<CellSet> known;
    std::vector<std::size_t> replay_bad;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const bool last_target = i + 1 == steps.size() && trace.outcome == Outcome::ReachedTarget;
        std::vector<CellId> newly;
        if (!last_target) newly = sensor_step(world.interp, world.kb, steps[i].cell, sensor, static_cast<long>(i));
        if (newly != steps[i].detected || steps[i].resynthesized != !newly.empty()) replay_bad.push_back(i);
        known.push_back(sensor.known_signs);
    }
    add("detections", replay_bad.empty(),
        replay_bad.empty() ? "sensor replay matches the log" : "mismatch at rows: " + step_list(replay_bad));
    for (std::size_t i = 1; i < known.size(); ++i) {
        if (!known[i - 1].is_subset_of(known[i])) {
            add("knowledge_monotone", false, "known signs shrink at row " + std::to_string(i));
            break;
        }
    }
    if (rep.items.back().name != "knowledge_monotone") add("knowledge_monotone", true, "known signs only grow");

    {
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const CompositeSpec spec = compile_objective(world.kb, world.interp, objective, known[i]);
            for (const auto& id : spec.activated)
                if (world.interp.extent(id + "_scope").test(steps[i].cell.value)) bad.push_back(i);
        }
        add("streets", bad.empty(),
            bad.empty() ? "no guarded street entered after detection" : "entries at rows: " + step_list(bad));
    }

    std::vector<PropositionSet> labels;
    labels.reserve(steps.size());
    for (const auto& s : steps) labels.push_back(world.interp.labels(s.cell));
    const bool reached = trace.outcome == Outcome::ReachedTarget;
    add("objective", reached && check_trace(objective, labels),
        reached ? objective.to_string() + " checked on the trace" : "run ended with " + to_string(trace.outcome));

    {
        // Each controller is judged from the step it took over.
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (i != 0 && !steps[i].resynthesized) continue;
            const CompositeSpec spec = compile_objective(world.kb, world.interp, objective, known[i]);
            if (!check_trace(spec.composite(), labels, i)) bad.push_back(i);
        }
        add("segments", bad.empty(),
            bad.empty() ? "every composite formula holds from its activation"
                        : "violated from rows: " + step_list(bad));
    }

    {
        std::vector<std::string> problems;
        std::size_t count = 0;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (steps[i].detected.empty()) continue;
            const auto prev = i ? known[i - 1] : CellSet(gx.size());
            for (const auto& inst : world.interp.instances()) {
                if (inst.cells.intersects(prev) || !inst.cells.intersects(known[i])) continue;
                ++count;
                const Vec& x = steps[i].state;
                // Heading against the bearing to the street's center; distance to its nearest cell.
                double best = std::numeric_limits<double>::infinity();
                double cx = 0, cy = 0;
                for_each_member(inst.scope, [&](CellId c) {
                    const Vec m = gx.center(c);
                    cx += m[0];
                    cy += m[1];
                    best = std::min(best, planar_distance(x, gx.cell_rect(c)));
                });
                const auto cells = static_cast<double>(std::max<std::size_t>(inst.scope.count(), 1));
                const Vec center{cx / cells, cy / cells};
                const double toward = (center[0] - x[0]) * std::cos(x[2]) + (center[1] - x[1]) * std::sin(x[2]);
                if (!(toward > 0)) problems.push_back(inst.id + ": heading at row " + std::to_string(i) + " points away");
                double final_d = std::numeric_limits<double>::infinity();
                for_each_member(inst.scope, [&](CellId c) {
                    final_d = std::min(final_d, planar_distance(steps.back().state, gx.cell_rect(c)));
                });
                if (!(final_d > best))
                    problems.push_back(inst.id + ": final distance " + std::to_string(final_d) +
                                       " does not exceed " + std::to_string(best));
            }
        }
        std::string detail = problems.empty() ? std::to_string(count) + " detection(s) checked" : problems.front();
        add("reroute", problems.empty(), detail);
    }
    return rep;
}

void print_report(std::ostream& out, const AuditReport& report)
{
    for (const auto& i : report.items) out << (i.passed ? "PASS " : "FAIL ") << i.name << ": " << i.detail << '\n';
}

} // namespace kaw
