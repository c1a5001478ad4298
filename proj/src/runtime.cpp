#include "kaw/runtime.hpp"

#include "kaw/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace kaw {

SensorState initial_sensor(const Interpretation& interp) { return {CellSet(interp.domain_size()), -1}; }

std::vector<CellId> sensor_step(const Interpretation& interp, const KnowledgeBase& kb, CellId current,
                                SensorState& sensor, long step)
{
    if (!interp.grid().valid(current)) throw InvalidCell("sensor queried outside the state grid");
    std::vector<CellId> newly;
    for (const auto& rule : detection_rules(kb)) {
        const Role& role = interp.role(rule.role);
        const CellSet fresh = interp.extent(rule.obligation.forbidden) - sensor.known_signs;
        for_each_member(fresh, [&](CellId s) {
            if (role.related(current, s)) newly.push_back(s);
        });
    }
    std::sort(newly.begin(), newly.end());
    newly.erase(std::unique(newly.begin(), newly.end()), newly.end());
    for (auto s : newly) sensor.known_signs.set(s.value);
    if (!newly.empty()) sensor.last_detection_step = step;
    return newly;
}

std::string to_string(Outcome o)
{
    switch (o) {
    case Outcome::ReachedTarget: return "ReachedTarget";
    case Outcome::EnteredAvoid: return "EnteredAvoid";
    case Outcome::SynthesisFailed: return "SynthesisFailed";
    case Outcome::StepLimit: return "StepLimit";
    }
    return {};
}

Outcome outcome_from_string(const std::string& s)
{
    for (auto o : {Outcome::ReachedTarget, Outcome::EnteredAvoid, Outcome::SynthesisFailed, Outcome::StepLimit})
        if (to_string(o) == s) return o;
    throw ValidationError("unknown outcome '" + s + "'");
}

Controller synthesize(const World& world, const Abstraction& abs, const CellSet& known_signs)
{
    const CompositeSpec spec = compile_objective(world.kb, world.interp, world.scenario.objective, known_signs);
    return solve_reach_avoid(abs, spec.game);
}

Trace run_closed_loop(const World& world, const Abstraction& abs, std::uint64_t seed, std::size_t max_steps)
{
    const Grid& gx = world.grid_x;
    if (!(abs.grid_x() == gx) || !(abs.grid_u() == world.grid_u))
        throw ValidationError("abstraction was built for a different grid");
    Vec x = world.scenario.initial_state;
    if (x.size() != gx.dim() || !gx.bounds().contains(x))
        throw InitialStateOutsideDomain("initial state lies outside the state domain");

    Trace trace;
    trace.seed = seed;
    std::mt19937_64 rng(seed);
    const HyperRect& w = world.system.disturbance();

    SensorState sensor = initial_sensor(world.interp);
    auto solve = [&]() {
        const auto t0 = std::chrono::steady_clock::now();
        CompositeSpec spec = compile_objective(world.kb, world.interp, world.scenario.objective, sensor.known_signs);
        Controller c = solve_reach_avoid(abs, spec.game);
        trace.synthesis_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return std::make_pair(std::move(spec), std::move(c));
    };
    auto [spec0, ctrl0] = solve();
    CompositeSpec spec = std::move(spec0);
    Controller ctrl = std::move(ctrl0);

    Vec wpiece(gx.dim(), 0.0);
    for (std::size_t i = 0;; ++i) {
        TraceStep row;
        row.step = i;
        row.time = static_cast<double>(i) * abs.tau();
        row.state = x;
        row.cell = gx.quantize(x);

        auto finish = [&](Outcome o) {
            trace.steps.push_back(std::move(row));
            trace.outcome = o;
        };
        if (spec.game.target.test(row.cell.value)) {
            finish(Outcome::ReachedTarget);
            break;
        }
        row.detected = sensor_step(world.interp, world.kb, row.cell, sensor, static_cast<long>(i));
        if (!row.detected.empty()) {
            std::tie(spec, ctrl) = solve();
            row.resynthesized = true;
        }
        if (spec.game.avoid.test(row.cell.value)) {
            finish(Outcome::EnteredAvoid);
            break;
        }
        if (!ctrl.is_winning(row.cell)) {
            if (i == 0) throw InitialStateNotWinning("initial cell " + std::to_string(row.cell.value) +
                                                     " is not in the winning set");
            finish(Outcome::SynthesisFailed);
            break;
        }
        if (i == max_steps) {
            finish(Outcome::StepLimit);
            break;
        }

        row.input_index = ctrl.policy(row.cell);
        row.input = world.grid_u.center(CellId{static_cast<std::uint32_t>(row.input_index)});
        for (std::size_t d = 0; d < gx.dim(); ++d)
            wpiece[d] = w.lower[d] < w.upper[d] ? std::uniform_real_distribution<double>(w.lower[d], w.upper[d])(rng)
                                                : w.lower[d];
        trace.steps.push_back(row);
        flow_inplace(world.system, x, row.input, abs.tau(), wpiece);
        if (!gx.bounds().contains(x)) throw OutOfDomain("closed-loop state left the state domain");
    }
    return trace;
}

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

constexpr const char* kTraceHeader =
    "step,time,x1,x2,x3,cell,input_index,u_value,detected,resynth,outcome_at_end";

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

} // namespace

void write_trace_csv(std::ostream& out, const Trace& trace)
{
    out << kTraceHeader << '\n';
    for (std::size_t r = 0; r < trace.steps.size(); ++r) {
        const auto& s = trace.steps[r];
        out << s.step << ',' << fmt(s.time);
        for (std::size_t d = 0; d < 3; ++d) out << ',' << (d < s.state.size() ? fmt(s.state[d]) : "");
        out << ',' << s.cell.value << ',' << s.input_index << ',';
        for (std::size_t k = 0; k < s.input.size(); ++k) out << (k ? ";" : "") << fmt(s.input[k]);
        out << ',';
        for (std::size_t k = 0; k < s.detected.size(); ++k) out << (k ? ";" : "") << s.detected[k].value;
        out << ',' << (s.resynthesized ? 1 : 0) << ',';
        if (r + 1 == trace.steps.size()) out << to_string(trace.outcome);
        out << '\n';
    }
    if (!out) throw IoError("failed to write trace CSV");
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_trace_csv(out, trace);
}

Trace read_trace_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) throw ValidationError("trace CSV has an unexpected header");
    Trace trace;
    std::string outcome;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 11) throw ValidationError("trace line " + std::to_string(lineno) + " needs 11 fields");
        if (!outcome.empty()) throw ValidationError("trace has rows after the outcome");
        try {
            TraceStep s;
            s.step = std::stoul(f[0]);
            s.time = std::stod(f[1]);
            for (int d = 2; d < 5; ++d)
                if (!f[d].empty()) s.state.push_back(std::stod(f[d]));
            s.cell = CellId{static_cast<std::uint32_t>(std::stoul(f[5]))};
            s.input_index = static_cast<std::int32_t>(std::stol(f[6]));
            if (!f[7].empty())
                for (const auto& v : split(f[7], ';')) s.input.push_back(std::stod(v));
            if (!f[8].empty())
                for (const auto& v : split(f[8], ';'))
                    s.detected.push_back(CellId{static_cast<std::uint32_t>(std::stoul(v))});
            if (f[9] != "0" && f[9] != "1") throw std::invalid_argument("resynth");
            s.resynthesized = f[9] == "1";
            outcome = f[10];
            trace.steps.push_back(std::move(s));
        } catch (const std::logic_error&) {
            throw ValidationError("trace line " + std::to_string(lineno) + " is malformed");
        }
    }
    if (trace.steps.empty() || outcome.empty()) throw ValidationError("trace has no final outcome");
    trace.outcome = outcome_from_string(outcome);
    return trace;
}

Trace read_trace_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open trace " + path.string());
    return read_trace_csv(in);
}

} // namespace kaw
