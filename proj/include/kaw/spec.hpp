#pragma once

#include "kaw/cell_set.hpp"
#include "kaw/knowledge.hpp"
#include "kaw/ltl.hpp"

#include <string>
#include <vector>

namespace kaw {

// Reach-avoid game: reach target while never visiting avoid.
struct GameObjective {
    CellSet target;
    CellSet avoid;

    GameObjective() = default;
    // Throws ValidationError when the sets overlap or have different domains.
    GameObjective(CellSet target, CellSet avoid);
};

// "A == G (D -> G !S)": once a cell of D is visited, S must be avoided forever.
struct Obligation {
    std::string name;    // A
    std::string trigger; // D
    std::string forbidden; // S
};

std::vector<Obligation> obligations(const KnowledgeBase& kb);

// A trigger defined as "exists R.S" is detected through role R.
struct DetectionRule {
    Obligation obligation;
    std::string role;
};

std::vector<DetectionRule> detection_rules(const KnowledgeBase& kb);

// Cells satisfying a propositional formula; proposition names resolve to
// extents of the interpretation.
CellSet proposition_extent(const Interpretation& interp, const LtlFormula& phi);

struct CompositeSpec {
    LtlFormula objective;
    LtlFormula kb_part; // conjunction of G !<instance>_scope over activated instances, or true
    GameObjective game;
    std::vector<std::string> activated; // instance ids whose obligation is in force
    bool target_unreachable = false;    // target swallowed by the enlarged avoid set

    [[nodiscard]] LtlFormula composite() const { return LtlFormula::conjunction(kb_part, objective); }
};

/*
 * Folds the objective "phi1 U phi2" and the obligations of every instance
 * with a known cell into one game: target = cells of phi2, avoid = cells
 * violating phi1 plus the scopes of the activated instances. Target cells
 * inside the enlarged avoid set are dropped (target_unreachable reports when
 * none are left). Throws UnsupportedObjective for other objective shapes.
 */
CompositeSpec compile_objective(const KnowledgeBase& kb, const Interpretation& interp, const LtlFormula& objective,
                                const CellSet& known_signs);

} // namespace kaw
