#include "doctest.h"

#include "kaw/error.hpp"
#include "kaw/scenario.hpp"
#include "kaw/spec.hpp"

using namespace kaw;

namespace {

const World& urban()
{
    static const World w = build_world(load_scenario(KAW_DATA_DIR "/urban.scn.json"));
    return w;
}

CellSet signs_of(const World& w, std::initializer_list<const char*> ids)
{
    CellSet s(w.grid_x.size());
    for (const auto& inst : w.interp.instances())
        for (const char* id : ids)
            if (inst.id == id) s |= inst.cells;
    return s;
}

} // namespace

TEST_CASE("obligations and detection rules are read from the TBox")
{
    const auto obs = obligations(urban().kb);
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].name == "NoEntrySignRespected");
    CHECK(obs[0].trigger == "NoEntrySignDetected");
    CHECK(obs[0].forbidden == "NoEntrySign");
    const auto rules = detection_rules(urban().kb);
    REQUIRE(rules.size() == 1);
    CHECK(rules[0].role == "Proximity");
}

TEST_CASE("avoid set follows the known signs")
{
    const World& w = urban();
    const CellSet& obstacle = w.interp.extent("Obstacle");
    const CellSet& target = w.interp.extent("Target");

    const CompositeSpec none = compile_objective(w.kb, w.interp, w.scenario.objective, CellSet(w.grid_x.size()));
    CHECK(none.game.avoid == obstacle);
    CHECK(none.game.target == target);
    CHECK(none.activated.empty());
    CHECK(none.kb_part == LtlFormula::truth());
    CHECK_FALSE(none.target_unreachable);

    const CompositeSpec all = compile_objective(w.kb, w.interp, w.scenario.objective, signs_of(w, {"sign_a", "sign_b"}));
    CHECK(all.game.avoid == (obstacle | w.interp.extent("sign_a_scope") | w.interp.extent("sign_b_scope")));
    CHECK(all.activated == std::vector<std::string>{"sign_a", "sign_b"});
    CHECK(all.kb_part == parse_ltl("G !sign_a_scope & G !sign_b_scope"));
    CHECK(all.composite() == LtlFormula::conjunction(all.kb_part, w.scenario.objective));

    const CompositeSpec one = compile_objective(w.kb, w.interp, w.scenario.objective, signs_of(w, {"sign_a"}));
    const CellSet grown = one.game.avoid - none.game.avoid;
    CHECK(grown == (w.interp.extent("sign_a_scope") - obstacle));
    CHECK(grown.any());

    // Knowing a single sign cell activates its instance.
    CellSet single(w.grid_x.size());
    single.set(w.interp.extent("sign_b").find_first());
    const CompositeSpec b = compile_objective(w.kb, w.interp, w.scenario.objective, single);
    CHECK(b.activated == std::vector<std::string>{"sign_b"});

    // Monotone in the known signs.
    CHECK(none.game.avoid.is_subset_of(one.game.avoid));
    CHECK(one.game.avoid.is_subset_of(all.game.avoid));
    CHECK(all.game.target.is_subset_of(none.game.target));
}

TEST_CASE("unsupported objectives")
{
    const World& w = urban();
    const CellSet none(w.grid_x.size());
    // F Target is stored as true U Target: a plain reach game.
    const CompositeSpec reach = compile_objective(w.kb, w.interp, parse_ltl("F Target"), none);
    CHECK(reach.game.avoid.none());
    CHECK_THROWS_AS((void)compile_objective(w.kb, w.interp, parse_ltl("G !Obstacle"), none), UnsupportedObjective);
    CHECK_THROWS_AS((void)compile_objective(w.kb, w.interp, parse_ltl("(X !Obstacle) U Target"), none),
                    UnsupportedObjective);
    CHECK_THROWS_AS((void)compile_objective(w.kb, w.interp, parse_ltl("!Obstacle U Parking"), none), UndeclaredName);
    CHECK_THROWS_AS((void)compile_objective(w.kb, w.interp, w.scenario.objective, CellSet(3)), ValidationError);
}

TEST_CASE("proposition extents")
{
    const World& w = urban();
    const CellSet& obstacle = w.interp.extent("Obstacle");
    const CellSet& target = w.interp.extent("Target");
    CHECK(proposition_extent(w.interp, parse_ltl("Obstacle | Target")) == (obstacle | target));
    CHECK(proposition_extent(w.interp, parse_ltl("!Obstacle & true")) == ~obstacle);
    CHECK(proposition_extent(w.interp, parse_ltl("Obstacle -> Target")) == (~obstacle | target));
    CHECK_THROWS_AS((void)proposition_extent(w.interp, parse_ltl("F Target")), UnsupportedObjective);
}

TEST_CASE("game objectives reject overlapping sets")
{
    CHECK_THROWS_AS(GameObjective(make_cell_set(3, {0}), make_cell_set(3, {0, 1})), ValidationError);
    CHECK_THROWS_AS(GameObjective(make_cell_set(3, {0}), make_cell_set(4, {1})), ValidationError);
    CHECK_NOTHROW(GameObjective(make_cell_set(3, {0}), make_cell_set(3, {1})));
}

TEST_CASE("a target inside the avoid set is reported unreachable")
{
    Scenario scn = load_scenario(KAW_DATA_DIR "/urban.scn.json");
    scn.regions.instances[0].scope.push_back(scn.regions.regions.at("Target").front());
    const World w = build_world(std::move(scn));
    const CompositeSpec s = compile_objective(w.kb, w.interp, w.scenario.objective, signs_of(w, {"sign_a"}));
    CHECK(s.target_unreachable);
    CHECK(s.game.target.none());
}
