#include "doctest.h"

#include "kaw/error.hpp"
#include "kaw/scenario.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

using namespace kaw;
using std::numbers::pi;

namespace {

std::string bundled_text()
{
    std::ifstream in(KAW_DATA_DIR "/urban.scn.json");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string replaced(std::string text, const std::string& from, const std::string& to)
{
    const auto p = text.find(from);
    REQUIRE(p != std::string::npos);
    return text.replace(p, from.size(), to);
}

// 1-based line and column of the first occurrence of needle.
std::pair<std::size_t, std::size_t> locate(const std::string& text, const std::string& needle)
{
    const auto p = text.find(needle);
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < p; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

TEST_CASE("bundled scenario")
{
    const Scenario scn = load_scenario(KAW_DATA_DIR "/urban.scn.json");
    CHECK(scn.model == "dubins_car");
    CHECK(scn.tau == doctest::Approx(0.2));
    CHECK(scn.eta_u == Vec{0.26});
    CHECK(scn.eta_x == Vec{0.15, 0.15, 0.26});
    CHECK(scn.input_bounds.lower[0] == doctest::Approx(-2 * pi));
    CHECK(scn.state_bounds.upper[2] == doctest::Approx(pi));
    CHECK(scn.periodic == std::vector<bool>{false, false, true});
    CHECK(scn.initial_state[2] == doctest::Approx(pi / 2));
    CHECK(scn.objective == parse_ltl("!Obstacle U Target"));
    CHECK(scn.regions.instances.size() == 2);
    CHECK(scn.seed == 7);

    const World w = build_world(scn);
    CHECK(w.grid_x.size() == 95904);
    CHECK(w.grid_u.size() == 49);
    CHECK(w.interp.extent("Target").any());
    CHECK(w.interp.extent("NoEntrySignDetected").any());
    CHECK((w.interp.extent("Target") & w.interp.extent("Obstacle")).none());
}

TEST_CASE("pi strings")
{
    const std::string text = bundled_text();
    for (auto [spelled, value] : std::vector<std::pair<std::string, double>>{
             {"\"pi/2\"", pi / 2}, {"\"0.5pi\"", pi / 2}, {"\"-pi/4\"", -pi / 4}, {"\"2*pi/8\"", pi / 4}, {"1.25", 1.25}}) {
        const Scenario scn = parse_scenario(replaced(text, "\"pi/2\"", spelled));
        CHECK(scn.initial_state[2] == doctest::Approx(value));
    }
    CHECK_THROWS_AS((void)parse_scenario(replaced(text, "\"pi/2\"", "\"half pi\"")), ValidationError);
}

TEST_CASE("semantic errors name the field")
{
    const std::string text = bundled_text();
    try {
        (void)parse_scenario(replaced(text, "\"lower\": [3.4, 9.6], \"upper\": [4.6, 10.6]",
                                      "\"lower\": [13.4, 9.6], \"upper\": [14.6, 10.6]"));
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("map.regions.Target") != std::string::npos);
    }
    CHECK_THROWS_AS((void)parse_scenario(replaced(text, "\"tau\": 0.2", "\"tau\": -0.2")), ValidationError);
    CHECK_THROWS_AS((void)parse_scenario(replaced(text, "\"eta_u\": [0.26]", "\"eta_u\": [0.26, 1]")), ValidationError);
    CHECK_THROWS_AS((void)parse_scenario(replaced(text, "\"seed\": 7", "\"seed\": -7")), ValidationError);
    CHECK_THROWS_AS((void)parse_scenario(replaced(text, "\"max_steps\": 1000", "\"max_steps\": 0")), ValidationError);
    CHECK_THROWS_AS((void)parse_scenario(replaced(text, "\"concept\": \"NoEntrySign\"", "\"concept\": \"Sign\"")),
                    ValidationError);
    CHECK_THROWS_AS((void)parse_scenario(replaced(text, "\"!Obstacle U Target\"", "\"!Wall U Target\"")),
                    ValidationError);
    // The model name is resolved when the world is built.
    const Scenario boat = parse_scenario(replaced(text, "\"model\": \"dubins_car\"", "\"model\": \"boat\""));
    CHECK_THROWS_AS((void)build_world(boat), ValidationError);
}

TEST_CASE("formula errors point into the file")
{
    const std::string bad = replaced(bundled_text(), "\"!Obstacle U Target\"", "\"!Obstacle U (Target\"");
    const auto [line, col] = locate(bad, "\"!Obstacle U (Target\"");
    try {
        (void)parse_scenario(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == line);
        CHECK(e.column() > col);
        CHECK(e.column() <= col + std::string("\"!Obstacle U (Target\"").size());
    }

    const std::string bad_axiom = replaced(bundled_text(), "exists Proximity.NoEntrySign", "exists Proximity.");
    try {
        (void)parse_scenario(bad_axiom);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == locate(bad_axiom, "NoEntrySignDetected ==").first);
    }
}

TEST_CASE("malformed json")
{
    const std::string broken = replaced(bundled_text(), "\"seed\": 7,", "\"seed\": 7,,");
    const auto [line, col] = locate(broken, ",,");
    try {
        (void)parse_scenario(broken);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == line);
        CHECK(e.column() >= col);
        CHECK(e.column() <= col + 2);
    }
    CHECK_THROWS_AS((void)load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST_CASE("eta scaling")
{
    Scenario scn = load_scenario(KAW_DATA_DIR "/urban.scn.json");
    scale_state_eta(scn, 2.0);
    CHECK(scn.eta_x == Vec{0.3, 0.3, 0.52});
    CHECK(scn.eta_u == Vec{0.26});
    CHECK(build_world(scn).grid_x.size() == 27 * 37 * 12);
    CHECK_THROWS_AS(scale_state_eta(scn, 0.0), ValidationError);
}
