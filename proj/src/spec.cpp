#include "kaw/spec.hpp"

#include "kaw/error.hpp"

namespace kaw {

GameObjective::GameObjective(CellSet t, CellSet a) : target(std::move(t)), avoid(std::move(a))
{
    if (target.size() != avoid.size()) throw ValidationError("target and avoid sets have different domains");
    if (target.intersects(avoid)) throw ValidationError("target and avoid sets overlap");
}

namespace {

bool is_prop(const LtlFormula& f) { return f.sugar() == LtlFormula::Sugar::None && f.kind() == LtlFormula::Kind::Prop; }

bool is_negated_prop(const LtlFormula& f)
{
    return f.sugar() == LtlFormula::Sugar::None && f.kind() == LtlFormula::Kind::Not && is_prop(f.lhs());
}

} // namespace

std::vector<Obligation> obligations(const KnowledgeBase& kb)
{
    using S = LtlFormula::Sugar;
    std::vector<Obligation> out;
    for (const auto& ax : kb.tbox()) {
        if (ax.kind != TBoxAxiom::Kind::TemporalEquivalence) continue;
        const LtlFormula& f = ax.temporal;
        if (f.sugar() != S::Always) continue;
        const LtlFormula& imp = f.sugar_operand();
        if (imp.sugar() != S::Implies || !is_prop(imp.sugar_lhs())) continue;
        const LtlFormula& inner = imp.sugar_rhs();
        if (inner.sugar() != S::Always || !is_negated_prop(inner.sugar_operand())) continue;
        out.push_back({ax.defined, imp.sugar_lhs().name(), inner.sugar_operand().lhs().name()});
    }
    return out;
}

std::vector<DetectionRule> detection_rules(const KnowledgeBase& kb)
{
    std::vector<DetectionRule> out;
    for (auto& ob : obligations(kb)) {
        const TBoxAxiom* def = kb.definition_of(ob.trigger);
        if (!def || def->kind != TBoxAxiom::Kind::Equivalence) continue;
        const Concept& rhs = def->rhs;
        if (rhs.kind() != Concept::Kind::Exists || rhs.lhs().kind() != Concept::Kind::Atomic ||
            rhs.lhs().name() != ob.forbidden)
            continue;
        out.push_back({ob, rhs.name()});
    }
    return out;
}

CellSet proposition_extent(const Interpretation& interp, const LtlFormula& phi)
{
    using K = LtlFormula::Kind;
    const std::size_t n = interp.domain_size();
    switch (phi.kind()) {
    case K::True: return CellSet(n).set();
    case K::Prop: return interp.extent(phi.name());
    case K::Not: return ~proposition_extent(interp, phi.lhs());
    case K::And: return proposition_extent(interp, phi.lhs()) & proposition_extent(interp, phi.rhs());
    case K::Or: return proposition_extent(interp, phi.lhs()) | proposition_extent(interp, phi.rhs());
    case K::Next:
    case K::Until: break;
    }
    throw UnsupportedObjective("temporal operator inside a state formula: " + phi.to_string());
}

CompositeSpec compile_objective(const KnowledgeBase& kb, const Interpretation& interp, const LtlFormula& objective,
                                const CellSet& known_signs)
{
    if (objective.kind() != LtlFormula::Kind::Until || !objective.lhs().propositional() ||
        !objective.rhs().propositional())
        throw UnsupportedObjective("objective must have the form 'phi1 U phi2' with state formulas phi1, phi2");
    if (known_signs.size() != interp.domain_size()) throw ValidationError("known sign set has the wrong domain");

    for (const auto& p : objective.propositions())
        if (!kb.has_concept(p)) throw UndeclaredName("objective mentions undeclared concept '" + p + "'");

    CompositeSpec spec;
    spec.objective = objective;
    spec.kb_part = LtlFormula::truth();

    CellSet target = proposition_extent(interp, objective.rhs());
    CellSet avoid = ~proposition_extent(interp, objective.lhs());

    bool first = true;
    for (const auto& ob : obligations(kb)) {
        for (const auto& inst : interp.instances()) {
            if (inst.concept_name != ob.forbidden || !inst.cells.intersects(known_signs)) continue;
            avoid |= inst.scope;
            spec.activated.push_back(inst.id);
            const LtlFormula g = LtlFormula::always(LtlFormula::negation(LtlFormula::prop(inst.id + "_scope")));
            spec.kb_part = first ? g : LtlFormula::conjunction(spec.kb_part, g);
            first = false;
        }
    }

    target -= avoid;
    spec.target_unreachable = target.none();
    spec.game = GameObjective(std::move(target), std::move(avoid));
    return spec;
}

} // namespace kaw
