// kaw: scenario-driven pipeline (abstract, synthesize, simulate, render, check).

#include "kaw/abstraction.hpp"
#include "kaw/audit.hpp"
#include "kaw/error.hpp"
#include "kaw/render.hpp"
#include "kaw/runtime.hpp"
#include "kaw/scenario.hpp"
#include "kaw/synthesis.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

kaw::World load_world(const std::string& path, double eta_scale)
{
    kaw::Scenario scn = kaw::load_scenario(path);
    if (eta_scale != 1.0) kaw::scale_state_eta(scn, eta_scale);
    return kaw::build_world(std::move(scn));
}

kaw::Abstraction load_cache(const std::string& path, const kaw::World& world)
{
    kaw::Abstraction abs = kaw::Abstraction::load(path);
    if (!(abs.grid_x() == world.grid_x) || !(abs.grid_u() == world.grid_u) || abs.tau() != world.scenario.tau)
        throw kaw::CacheError("cache " + path + " was built for a different grid or sampling time");
    return abs;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Knowledge-aware controller synthesis for a Dubins car"};
    app.require_subcommand(1);

    std::string log_level = "info";
    app.add_option("--log-level", log_level, "error, info or debug")
        ->check(CLI::IsMember({"error", "info", "debug"}));

    std::string scenario_path, cache_path, output_path, trace_path, known_signs = "none";
    double eta_scale = 1.0;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::size_t max_steps = 0;

    auto add_scale = [&](CLI::App* sub) {
        sub->add_option("--eta-scale", eta_scale, "Multiply the state grid spacing")->check(CLI::PositiveNumber);
    };

    auto* abstract = app.add_subcommand("abstract", "Build and save the finite abstraction");
    abstract->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
    abstract->add_option("-o,--output", output_path, "Cache file")->required();
    abstract->add_option("--threads", threads, "Worker threads (0: automatic)");
    add_scale(abstract);

    auto* synth = app.add_subcommand("synthesize", "Solve the reach-avoid game and export the controller");
    synth->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
    synth->add_option("--cache", cache_path)->required()->check(CLI::ExistingFile);
    synth->add_option("--known-signs", known_signs, "Signs assumed detected")->check(CLI::IsMember({"all", "none"}));
    synth->add_option("-o,--output", output_path, "Controller CSV")->capture_default_str();
    add_scale(synth);

    auto* sim = app.add_subcommand("simulate", "Run the closed loop and write the trace");
    sim->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
    sim->add_option("--cache", cache_path)->required()->check(CLI::ExistingFile);
    sim->add_option("-o,--output", output_path, "Trace CSV")->required();
    auto* seed_opt = sim->add_option("--seed", seed, "Disturbance seed (default: scenario seed)");
    sim->add_option("--max-steps", max_steps, "Step limit (default: scenario value)");
    add_scale(sim);

    auto* render = app.add_subcommand("render", "Draw map, detection zones and trajectory as SVG");
    render->add_option("trace", trace_path)->required()->check(CLI::ExistingFile);
    render->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
    render->add_option("-o,--output", output_path, "SVG file")->required();
    add_scale(render);

    auto* check = app.add_subcommand("check", "Audit a trace against the scenario");
    check->add_option("trace", trace_path)->required()->check(CLI::ExistingFile);
    check->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
    add_scale(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    seed_given = seed_opt->count() > 0;

    spdlog::set_pattern("%^[%l]%$ %v");
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (abstract->parsed()) {
            const kaw::World world = load_world(scenario_path, eta_scale);
            const auto t0 = Clock::now();
            kaw::BuildOptions opts;
            opts.threads = threads;
            spdlog::debug("building with {} worker(s)", kaw::worker_count(threads));
            const kaw::Abstraction abs = kaw::build_abstraction(world.system, world.grid_x, world.grid_u, opts);
            const double elapsed = seconds_since(t0);
            abs.save(output_path);
            const auto st = abs.stats();
            std::printf("states %zu\ninputs %zu\ntransitions %zu\nblocked_pairs %zu\nwall_time_s %.3f\n",
                        st.states, st.inputs, st.transitions, st.blocked_pairs, elapsed);
            spdlog::info("abstraction saved to {} ({} MB in memory)", output_path, st.memory_bytes >> 20);
        } else if (synth->parsed()) {
            const kaw::World world = load_world(scenario_path, eta_scale);
            const kaw::Abstraction abs = load_cache(cache_path, world);
            kaw::CellSet known(world.grid_x.size());
            if (known_signs == "all")
                for (const auto& inst : world.interp.instances()) known |= inst.cells;
            const kaw::CompositeSpec spec =
                kaw::compile_objective(world.kb, world.interp, world.scenario.objective, known);
            if (spec.target_unreachable) spdlog::warn("TargetUnreachable: every target cell is in the avoid set");
            const auto t0 = Clock::now();
            const kaw::Controller ctrl = kaw::solve_reach_avoid(abs, spec.game);
            const double elapsed = seconds_since(t0);
            if (output_path.empty()) output_path = "controller.csv";
            std::ofstream out(output_path, std::ios::binary);
            if (!out) throw kaw::IoError("cannot open " + output_path + " for writing");
            kaw::write_controller_csv(out, ctrl);
            const kaw::CellId start = world.grid_x.quantize(world.scenario.initial_state);
            std::printf("winning %zu\ntarget %zu\navoid %zu\ndepth %u\ninitial_winning %d\nwall_time_s %.3f\n",
                        ctrl.winning().count(), spec.game.target.count(), spec.game.avoid.count(), ctrl.depth(),
                        ctrl.is_winning(start) ? 1 : 0, elapsed);
            if (ctrl.trivial()) spdlog::warn("EmptyWinningSet: nothing outside the target is winning");
        } else if (sim->parsed()) {
            const kaw::World world = load_world(scenario_path, eta_scale);
            const kaw::Abstraction abs = load_cache(cache_path, world);
            const kaw::Trace trace = kaw::run_closed_loop(world, abs, seed_given ? seed : world.scenario.seed,
                                                          max_steps ? max_steps : world.scenario.max_steps);
            kaw::write_trace_csv(output_path, trace);
            std::size_t resynth = 0;
            for (const auto& s : trace.steps) resynth += s.resynthesized;
            std::printf("outcome %s\nsteps %zu\nresynthesized %zu\n", kaw::to_string(trace.outcome).c_str(),
                        trace.steps.size() - 1, resynth);
            for (std::size_t i = 0; i < trace.synthesis_seconds.size(); ++i)
                spdlog::info("synthesis {} took {:.3f} s", i, trace.synthesis_seconds[i]);
        } else if (render->parsed()) {
            const kaw::World world = load_world(scenario_path, eta_scale);
            const kaw::Trace trace = kaw::read_trace_csv(trace_path);
            std::ofstream out(output_path, std::ios::binary);
            if (!out) throw kaw::IoError("cannot open " + output_path + " for writing");
            kaw::render_svg(out, world, trace);
        } else if (check->parsed()) {
            const kaw::World world = load_world(scenario_path, eta_scale);
            const kaw::Trace trace = kaw::read_trace_csv(trace_path);
            const kaw::AuditReport rep = kaw::audit_trace(world, trace);
            kaw::print_report(std::cout, rep);
            return rep.passed() ? 0 : 1;
        }
    } catch (const kaw::Error& e) {
        std::cerr << "error: " << e.category() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
