#include "doctest.h"
#include "oracles.hpp"

#include "kaw/error.hpp"
#include "kaw/knowledge.hpp"

#include <numbers>
#include <random>

using namespace kaw;
using std::numbers::pi;

namespace {

// One-dimensional toy model for the set semantics.
struct Toy {
    Grid grid;
    KnowledgeBase kb;
    Interpretation interp;
};

Toy toy(std::size_t n, std::vector<std::pair<CellId, CellId>> pairs, std::map<std::string, CellSet> extents)
{
    Grid g = oracle::line_grid(n);
    KnowledgeBase kb;
    kb.declare_role({"r", std::nullopt});
    Interpretation interp(g);
    interp.set_role("r", std::make_shared<ExplicitRole>(std::move(pairs)));
    for (auto& [name, ext] : extents) {
        kb.declare_concept(name);
        interp.set_extent(name, ext);
    }
    return {std::move(g), std::move(kb), std::move(interp)};
}

Concept random_concept(std::mt19937_64& rng, int depth)
{
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 9);
    static const char* names[] = {"A", "B", "C"};
    switch (pick(rng)) {
    case 0: return Concept::top();
    case 1: return Concept::bottom();
    case 2:
    case 3: return Concept::atomic(names[std::uniform_int_distribution<int>(0, 2)(rng)]);
    case 4: return Concept::negation(random_concept(rng, depth - 1));
    case 5: return Concept::conjunction(random_concept(rng, depth - 1), random_concept(rng, depth - 1));
    case 6: return Concept::disjunction(random_concept(rng, depth - 1), random_concept(rng, depth - 1));
    case 7:
    case 8: return Concept::exists("r", random_concept(rng, depth - 1));
    default: return Concept::forall("r", random_concept(rng, depth - 1));
    }
}

CellSet random_set(std::mt19937_64& rng, std::size_t n)
{
    CellSet s(n);
    std::bernoulli_distribution coin(0.4);
    for (std::size_t i = 0; i < n; ++i) s[i] = coin(rng);
    return s;
}

Grid proximity_grid() { return Grid(HyperRect({-2, -2, -pi}, {2, 2, pi}), {0.25, 0.25, 0.26}, {false, false, true}); }

} // namespace

TEST_CASE("concept semantics on three cells")
{
    const Toy t = toy(3, {{CellId{0}, CellId{1}}}, {{"C", make_cell_set(3, {1})}});
    const Concept c = Concept::atomic("C");
    CHECK(eval_concept(t.kb, t.interp, Concept::exists("r", c)) == make_cell_set(3, {0}));
    // Cells 1 and 2 have no r-successor, so both satisfy the universal vacuously.
    CHECK(eval_concept(t.kb, t.interp, Concept::forall("r", c)) == make_cell_set(3, {0, 1, 2}));
    CHECK(eval_concept(t.kb, t.interp, Concept::forall("r", Concept::negation(c))) == make_cell_set(3, {1, 2}));
    CHECK(eval_concept(t.kb, t.interp, Concept::top()).count() == 3);
    CHECK(eval_concept(t.kb, t.interp, Concept::bottom()).none());
    CHECK(eval_concept(t.kb, t.interp, Concept::negation(Concept::negation(c))) == make_cell_set(3, {1}));
    CHECK_THROWS_AS((void)eval_concept(t.kb, t.interp, Concept::atomic("D")), UndeclaredName);
    CHECK_THROWS_AS((void)eval_concept(t.kb, t.interp, Concept::exists("s", c)), UndeclaredName);
}

TEST_CASE("dualities on random concepts")
{
    std::mt19937_64 rng(8);
    for (int round = 0; round < 50; ++round) {
        std::vector<std::pair<CellId, CellId>> pairs;
        std::uniform_int_distribution<std::uint32_t> cell(0, 19);
        for (int k = 0; k < 30; ++k) pairs.emplace_back(CellId{cell(rng)}, CellId{cell(rng)});
        const Toy t = toy(20, pairs, {{"A", random_set(rng, 20)}, {"B", random_set(rng, 20)}, {"C", random_set(rng, 20)}});
        for (int k = 0; k < 20; ++k) {
            const Concept c = random_concept(rng, 4);
            const Concept d = random_concept(rng, 4);
            const CellSet lhs = eval_concept(t.kb, t.interp, Concept::negation(Concept::conjunction(c, d)));
            const CellSet rhs =
                eval_concept(t.kb, t.interp, Concept::disjunction(Concept::negation(c), Concept::negation(d)));
            CHECK(lhs == rhs);
            CHECK(eval_concept(t.kb, t.interp, Concept::forall("r", c)) ==
                  ~eval_concept(t.kb, t.interp, Concept::exists("r", Concept::negation(c))));
            CHECK(eval_concept(t.kb, t.interp, Concept::negation(Concept::negation(c))) ==
                  eval_concept(t.kb, t.interp, c));
            // Direct transcription of the existential.
            const CellSet cs = eval_concept(t.kb, t.interp, c);
            CellSet ex(20);
            for (auto [x, y] : pairs)
                if (cs.test(y.value)) ex.set(x.value);
            CHECK(eval_concept(t.kb, t.interp, Concept::exists("r", c)) == ex);
        }
    }
}

TEST_CASE("concept parsing")
{
    const Concept c = parse_concept("exists Proximity.NoEntrySign");
    CHECK(c.kind() == Concept::Kind::Exists);
    CHECK(c.name() == "Proximity");
    CHECK(c.lhs() == Concept::atomic("NoEntrySign"));
    CHECK(parse_concept("!A & (B | forall r.top)") ==
          Concept::conjunction(Concept::negation(Concept::atomic("A")),
                               Concept::disjunction(Concept::atomic("B"), Concept::forall("r", Concept::top()))));
    CHECK(parse_concept(c.to_string()) == c);
    CHECK_THROWS_AS((void)parse_concept("exists .A"), SyntaxError);
    CHECK_THROWS_AS((void)parse_concept("A &"), SyntaxError);

    const TBoxAxiom eq = parse_axiom("NoEntrySignDetected == exists Proximity.NoEntrySign");
    CHECK(eq.kind == TBoxAxiom::Kind::Equivalence);
    CHECK(eq.defined == "NoEntrySignDetected");
    const TBoxAxiom tmp = parse_axiom("NoEntrySignRespected == G (NoEntrySignDetected -> G !NoEntrySign)");
    CHECK(tmp.kind == TBoxAxiom::Kind::TemporalEquivalence);
    CHECK(tmp.temporal == parse_ltl("G (NoEntrySignDetected -> G !NoEntrySign)"));
    CHECK(parse_axiom("A <= B").kind == TBoxAxiom::Kind::Inclusion);
    CHECK_THROWS_AS((void)parse_axiom("A B"), SyntaxError);
}

TEST_CASE("knowledge base validation")
{
    KnowledgeBase kb;
    kb.declare_concept("NoEntrySign");
    CHECK_THROWS_AS(kb.add_axiom(parse_axiom("D == exists Proximity.NoEntrySign")), UndeclaredName);
    kb.declare_role({"Proximity", 1.0});
    kb.add_axiom(parse_axiom("D == exists Proximity.NoEntrySign"));
    CHECK(kb.has_concept("D"));
    CHECK_THROWS_AS(kb.add_axiom(parse_axiom("D == NoEntrySign")), ValidationError);
    CHECK_THROWS_AS(kb.add_axiom(parse_axiom("R == G (D -> G !Street)")), UndeclaredName);
    CHECK_THROWS_AS(kb.declare_role({"Near", 0.0}), ValidationError);
}

TEST_CASE("proximity examples")
{
    const Grid g = proximity_grid();
    const CellId here = g.quantize(std::vector{0.0, 0.0, 0.0});
    const CellId ahead = g.quantize(std::vector{1.0, 0.0, 0.0});
    const CellId behind = g.quantize(std::vector{-1.0, 0.0, 0.0});
    CHECK(proximity(g, here, ahead, 2.0));
    CHECK_FALSE(proximity(g, here, behind, 2.0));
    // The planar gap between the cells is 0.75.
    CHECK_FALSE(proximity(g, here, ahead, 0.5));
    CHECK_FALSE(proximity(g, here, ahead, 0.75));
    CHECK(proximity(g, here, ahead, 0.76));
    const CellId facing_back = g.quantize(std::vector{0.0, 0.0, pi});
    CHECK(proximity(g, facing_back, behind, 2.0));
    CHECK_FALSE(proximity(g, facing_back, ahead, 2.0));
}

TEST_CASE("proximity agrees with the sampling oracle")
{
    const Grid g = proximity_grid();
    const double range = 1.0;
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::uint32_t> cell(0, static_cast<std::uint32_t>(g.size() - 1));
    std::uniform_int_distribution<int> step(-5, 5);
    int compared = 0, positives = 0;
    while (compared < 500) {
        const CellId a{cell(rng)};
        const auto k = g.multi_index(a);
        // Pick a neighbour within a few cells so both outcomes occur.
        std::vector<std::size_t> m = k;
        bool inside = true;
        for (int d = 0; d < 2; ++d) {
            const long v = static_cast<long>(k[d]) + step(rng);
            inside = inside && v >= 0 && v < static_cast<long>(g.counts()[d]);
            m[d] = static_cast<std::size_t>(std::max(0L, v));
        }
        m[2] = cell(rng) % g.counts()[2];
        if (!inside) continue;
        const CellId b = g.flatten(m);
        const auto s = oracle::sample_proximity(g.cell_rect(a), g.cell_rect(b));
        if (std::abs(s.distance - range) < 1e-9 || std::abs(s.ahead) < 1e-9) continue;
        const bool expected = s.distance < range && s.ahead > 0;
        CHECK(proximity(g, a, b, range) == expected);
        positives += expected;
        ++compared;
    }
    CHECK(positives > 50);
    CHECK(positives < 450);
}

TEST_CASE("proximity role matches the pairwise test")
{
    const Grid g(HyperRect({0, 0, -pi}, {2, 2, pi}), {0.5, 0.5, pi / 2}, {false, false, true});
    const ProximityRole role(g, 0.8);
    for (std::uint32_t to = 0; to < g.size(); to += 7) {
        std::vector<CellId> preds;
        role.predecessors(CellId{to}, preds);
        std::vector<CellId> expected;
        for (std::uint32_t from = 0; from < g.size(); ++from)
            if (proximity(g, CellId{from}, CellId{to}, 0.8)) expected.push_back(CellId{from});
        CHECK(preds == expected);
        for (auto p : preds) CHECK(role.related(p, CellId{to}));
    }
}

TEST_CASE("assembled interpretation")
{
    const Grid g(HyperRect({0, 0, -pi}, {4, 4, pi}), {0.5, 0.5, pi / 4}, {false, false, true});
    KnowledgeBase kb;
    for (const char* c : {"Target", "Obstacle", "NoEntrySign"}) kb.declare_concept(c);
    kb.declare_role({"Proximity", 1.0});
    kb.add_axiom(parse_axiom("NoEntrySignDetected == exists Proximity.NoEntrySign"));
    kb.add_axiom(parse_axiom("NoEntrySignRespected == G (NoEntrySignDetected -> G !NoEntrySign)"));

    ConceptRegions regions;
    const HyperRect target({3.1, 3.1, -pi}, {3.9, 3.9, pi});
    regions.regions["Target"] = {target};
    regions.instances.push_back({"sign", "NoEntrySign", {HyperRect({1.9, 1.9, -pi}, {2.1, 2.1, pi})},
                                 {HyperRect({1.5, 1.5, -pi}, {2.5, 3.0, pi})}});
    const Interpretation in = assemble_interpretation(kb, regions, g);

    CHECK(in.extent("Obstacle").none());
    const CellSet& tgt = in.extent("Target");
    REQUIRE(tgt.any());
    for (std::uint32_t c = 0; c < g.size(); ++c) {
        const HyperRect r = g.cell_rect(CellId{c});
        const bool meets = r.lower[0] <= target.upper[0] && target.lower[0] <= r.upper[0] &&
                           r.lower[1] <= target.upper[1] && target.lower[1] <= r.upper[1];
        CHECK(tgt.test(c) == meets);
    }

    const CellSet& signs = in.extent("NoEntrySign");
    CHECK(signs == in.extent("sign"));
    CHECK(in.extent("sign_scope").count() > signs.count());
    CellSet detected(g.size());
    for (std::uint32_t x = 0; x < g.size(); ++x)
        for_each_member(signs, [&](CellId s) {
            if (proximity(g, CellId{x}, s, 1.0)) detected.set(x);
        });
    CHECK(in.extent("NoEntrySignDetected") == detected);
    CHECK_FALSE(in.has_extent("NoEntrySignRespected"));
    CHECK(in.labels(signs.find_first() == CellSet::npos ? CellId{0} : CellId{static_cast<std::uint32_t>(signs.find_first())})
              .contains("NoEntrySign"));

    // Enlarging a region never shrinks positive extents built on it.
    ConceptRegions bigger = regions;
    bigger.instances[0].boxes.push_back(HyperRect({0.4, 0.4, -pi}, {0.6, 0.6, pi}));
    const Interpretation in2 = assemble_interpretation(kb, bigger, g);
    CHECK(in.extent("NoEntrySign").is_subset_of(in2.extent("NoEntrySign")));
    CHECK(in.extent("NoEntrySignDetected").is_subset_of(in2.extent("NoEntrySignDetected")));
    CHECK(in.extent("NoEntrySignDetected") != in2.extent("NoEntrySignDetected"));

    ConceptRegions bad = regions;
    bad.regions["Street"] = {target};
    CHECK_THROWS_AS((void)assemble_interpretation(kb, bad, g), UndeclaredName);
}

TEST_CASE("inclusion axioms are checked in the model")
{
    const Toy base = toy(4, {}, {{"A", make_cell_set(4, {0, 1})}, {"B", make_cell_set(4, {1, 2})}});
    KnowledgeBase kb = base.kb;
    kb.add_axiom(parse_axiom("A <= B"));
    kb.add_axiom(parse_axiom("A & B <= B"));
    const auto violated = violated_inclusions(kb, base.interp);
    REQUIRE(violated.size() == 1);
    CHECK(violated[0].to_string() == "A <= B");
}
