#include "kaw/knowledge.hpp"

#include "kaw/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace kaw {

// ---------------------------------------------------------------- Concept

Concept Concept::make(Kind k, std::string name, const Concept* a, const Concept* b)
{
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->name = std::move(name);
    if (a) n->lhs = std::make_shared<const Concept>(*a);
    if (b) n->rhs = std::make_shared<const Concept>(*b);
    return Concept(std::move(n));
}

Concept Concept::top() { return make(Kind::Top, {}, nullptr, nullptr); }
Concept Concept::bottom() { return make(Kind::Bottom, {}, nullptr, nullptr); }
Concept Concept::atomic(std::string name) { return make(Kind::Atomic, std::move(name), nullptr, nullptr); }
Concept Concept::negation(Concept c) { return make(Kind::Not, {}, &c, nullptr); }
Concept Concept::conjunction(Concept a, Concept b) { return make(Kind::And, {}, &a, &b); }
Concept Concept::disjunction(Concept a, Concept b) { return make(Kind::Or, {}, &a, &b); }
Concept Concept::exists(std::string role, Concept c) { return make(Kind::Exists, std::move(role), &c, nullptr); }
Concept Concept::forall(std::string role, Concept c) { return make(Kind::Forall, std::move(role), &c, nullptr); }

std::set<std::string> Concept::concept_names() const
{
    std::set<std::string> out;
    std::function<void(const Concept&)> walk = [&](const Concept& c) {
        if (c.kind() == Kind::Atomic) out.insert(c.name());
        if (c.node_->lhs) walk(c.lhs());
        if (c.node_->rhs) walk(c.rhs());
    };
    walk(*this);
    return out;
}

std::set<std::string> Concept::role_names() const
{
    std::set<std::string> out;
    std::function<void(const Concept&)> walk = [&](const Concept& c) {
        if (c.kind() == Kind::Exists || c.kind() == Kind::Forall) out.insert(c.name());
        if (c.node_->lhs) walk(c.lhs());
        if (c.node_->rhs) walk(c.rhs());
    };
    walk(*this);
    return out;
}

std::string Concept::to_string() const
{
    switch (kind()) {
    case Kind::Top: return "top";
    case Kind::Bottom: return "bottom";
    case Kind::Atomic: return name();
    case Kind::Not: return "!" + lhs().to_string();
    case Kind::And: return "(" + lhs().to_string() + " & " + rhs().to_string() + ")";
    case Kind::Or: return "(" + lhs().to_string() + " | " + rhs().to_string() + ")";
    case Kind::Exists: return "exists " + name() + "." + lhs().to_string();
    case Kind::Forall: return "forall " + name() + "." + lhs().to_string();
    }
    return {};
}

bool operator==(const Concept& a, const Concept& b)
{
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind() || a.name() != b.name()) return false;
    if (a.node_->lhs && !(a.lhs() == b.lhs())) return false;
    if (a.node_->rhs && !(a.rhs() == b.rhs())) return false;
    return true;
}

std::string TBoxAxiom::to_string() const
{
    switch (kind) {
    case Kind::Inclusion: return lhs.to_string() + " <= " + rhs.to_string();
    case Kind::Equivalence: return lhs.to_string() + " == " + rhs.to_string();
    case Kind::TemporalEquivalence: return defined + " == " + temporal.to_string();
    }
    return {};
}

// ---------------------------------------------------------- KnowledgeBase

void KnowledgeBase::declare_concept(const std::string& name) { concepts_.insert(name); }

void KnowledgeBase::declare_role(RoleDecl role)
{
    if (role.proximity_range && !(*role.proximity_range > 0))
        throw ValidationError("proximity range of role '" + role.name + "' must be positive");
    auto name = role.name;
    roles_[name] = std::move(role);
}

const TBoxAxiom* KnowledgeBase::definition_of(const std::string& name) const
{
    for (const auto& ax : tbox_)
        if (ax.kind != TBoxAxiom::Kind::Inclusion && ax.defined == name) return &ax;
    return nullptr;
}

void KnowledgeBase::add_axiom(TBoxAxiom axiom)
{
    auto require_concepts = [&](const std::set<std::string>& names) {
        for (const auto& n : names)
            if (!has_concept(n)) throw UndeclaredName("concept '" + n + "' is not declared");
    };
    auto require_roles = [&](const Concept& c) {
        for (const auto& r : c.role_names())
            if (!has_role(r)) throw UndeclaredName("role '" + r + "' is not declared");
    };

    switch (axiom.kind) {
    case TBoxAxiom::Kind::Inclusion:
        require_concepts(axiom.lhs.concept_names());
        require_concepts(axiom.rhs.concept_names());
        require_roles(axiom.lhs);
        require_roles(axiom.rhs);
        break;
    case TBoxAxiom::Kind::Equivalence:
        require_concepts(axiom.rhs.concept_names());
        require_roles(axiom.rhs);
        if (!axiom.defined.empty()) {
            if (definition_of(axiom.defined))
                throw ValidationError("concept '" + axiom.defined + "' is defined twice");
            declare_concept(axiom.defined);
        } else {
            require_concepts(axiom.lhs.concept_names());
            require_roles(axiom.lhs);
        }
        break;
    case TBoxAxiom::Kind::TemporalEquivalence:
        if (has_concept(axiom.defined))
            throw ValidationError("temporal definition of '" + axiom.defined + "' needs a fresh name");
        require_concepts(axiom.temporal.propositions());
        declare_concept(axiom.defined);
        break;
    }
    tbox_.push_back(std::move(axiom));
}

void KnowledgeBase::add_assertion(ABoxAssertion assertion)
{
    if (assertion.kind == ABoxAssertion::Kind::Concept && !has_concept(assertion.name))
        throw UndeclaredName("concept '" + assertion.name + "' is not declared");
    if (assertion.kind == ABoxAssertion::Kind::Role && !has_role(assertion.name))
        throw UndeclaredName("role '" + assertion.name + "' is not declared");
    abox_.push_back(std::move(assertion));
}

// -------------------------------------------------------------- Proximity

namespace {

// theta in the closed arc [lo, hi] of length < 2 pi, modulo 2 pi.
bool angle_in_arc(double theta, double lo, double hi)
{
    constexpr double two_pi = 2 * std::numbers::pi;
    double d = std::fmod(theta - lo, two_pi);
    if (d < 0) d += two_pi;
    return d <= hi - lo;
}

} // namespace

bool proximity(const Grid& grid_x, CellId from, CellId to, double range)
{
    if (grid_x.dim() < 3) throw ValidationError("proximity needs (x1, x2, heading) state cells");
    const HyperRect a = grid_x.cell_rect(from);
    const HyperRect b = grid_x.cell_rect(to);

    double gap2 = 0;
    for (int i = 0; i < 2; ++i) {
        const double gap = std::max({0.0, b.lower[i] - a.upper[i], a.lower[i] - b.upper[i]});
        gap2 += gap * gap;
    }
    if (!(std::sqrt(gap2) < range)) return false;

    // Offsets x' - x range over a rectangle; a linear function of the offset
    // peaks at a corner, and for each corner the heading term peaks either at
    // an arc endpoint or at the corner's own bearing.
    const double dx[2] = {b.lower[0] - a.upper[0], b.upper[0] - a.lower[0]};
    const double dy[2] = {b.lower[1] - a.upper[1], b.upper[1] - a.lower[1]};
    const double th_lo = a.lower[2];
    const double th_hi = a.upper[2];
    double best = -std::numeric_limits<double>::infinity();
    for (double ox : dx) {
        for (double oy : dy) {
            best = std::max(best, ox * std::cos(th_lo) + oy * std::sin(th_lo));
            best = std::max(best, ox * std::cos(th_hi) + oy * std::sin(th_hi));
            if ((ox != 0 || oy != 0) && angle_in_arc(std::atan2(oy, ox), th_lo, th_hi))
                best = std::max(best, std::hypot(ox, oy));
        }
    }
    return best > 0;
}

ExplicitRole::ExplicitRole(std::vector<std::pair<CellId, CellId>> pairs)
{
    by_target_.reserve(pairs.size());
    for (auto [from, to] : pairs) by_target_.emplace_back(to, from);
    std::sort(by_target_.begin(), by_target_.end());
    by_target_.erase(std::unique(by_target_.begin(), by_target_.end()), by_target_.end());
}

bool ExplicitRole::related(CellId from, CellId to) const
{
    return std::binary_search(by_target_.begin(), by_target_.end(), std::make_pair(to, from));
}

void ExplicitRole::predecessors(CellId to, std::vector<CellId>& out) const
{
    out.clear();
    auto it = std::lower_bound(by_target_.begin(), by_target_.end(), std::make_pair(to, CellId{0}));
    for (; it != by_target_.end() && it->first == to; ++it) out.push_back(it->second);
}

ProximityRole::ProximityRole(const Grid& grid_x, double range) : grid_(grid_x), range_(range)
{
    if (grid_.dim() < 3) throw ValidationError("proximity needs (x1, x2, heading) state cells");
    if (!(range_ > 0)) throw ValidationError("proximity range must be positive");
}

bool ProximityRole::related(CellId from, CellId to) const { return proximity(grid_, from, to, range_); }

void ProximityRole::window(CellId center, std::vector<CellId>& out) const
{
    // Cells whose planar rectangles can be within range of the center cell.
    HyperRect box = grid_.cell_rect(center);
    for (int i = 0; i < 2; ++i) {
        box.lower[i] -= range_;
        box.upper[i] += range_;
    }
    for (std::size_t i = 2; i < grid_.dim(); ++i) {
        box.lower[i] = grid_.bounds().lower[i];
        box.upper[i] = grid_.bounds().upper[i];
    }
    grid_.cells_intersecting(box, out);
}

void ProximityRole::predecessors(CellId to, std::vector<CellId>& out) const
{
    std::vector<CellId> candidates;
    window(to, candidates);
    out.clear();
    for (auto x : candidates)
        if (related(x, to)) out.push_back(x);
}

std::shared_ptr<const std::vector<CellId>> ProximityRole::successors(CellId from) const
{
    {
        std::lock_guard lock(memo_mutex_);
        if (auto it = memo_.find(from); it != memo_.end()) return it->second;
    }
    std::vector<CellId> candidates;
    window(from, candidates);
    auto list = std::make_shared<std::vector<CellId>>();
    for (auto y : candidates)
        if (related(from, y)) list->push_back(y);
    std::lock_guard lock(memo_mutex_);
    // Idempotent fill: a concurrent writer computed the same list.
    return memo_.emplace(from, std::move(list)).first->second;
}

// --------------------------------------------------------- Interpretation

Interpretation::Interpretation(const Grid& grid_x) : grid_(grid_x) {}

void Interpretation::set_extent(const std::string& name, CellSet extent)
{
    if (extent.size() != domain_size()) throw ValidationError("extent of '" + name + "' has the wrong domain");
    extents_[name] = std::move(extent);
}

const CellSet& Interpretation::extent(const std::string& name) const
{
    auto it = extents_.find(name);
    if (it == extents_.end()) throw UndeclaredName("no extent for concept '" + name + "'");
    return it->second;
}

void Interpretation::set_role(const std::string& name, std::shared_ptr<const Role> role)
{
    roles_[name] = std::move(role);
}

const Role& Interpretation::role(const std::string& name) const { return *role_ptr(name); }

std::shared_ptr<const Role> Interpretation::role_ptr(const std::string& name) const
{
    auto it = roles_.find(name);
    if (it == roles_.end()) throw UndeclaredName("role '" + name + "' is not interpreted");
    return it->second;
}

void Interpretation::add_instance(ScopedInstance instance) { instances_.push_back(std::move(instance)); }

PropositionSet Interpretation::labels(CellId cell) const
{
    PropositionSet out;
    for (const auto& [name, ext] : extents_)
        if (ext.test(cell.value)) out.insert(name);
    return out;
}

CellSet eval_concept(const KnowledgeBase& kb, const Interpretation& interp, const Concept& c)
{
    const std::size_t n = interp.domain_size();
    switch (c.kind()) {
    case Concept::Kind::Top: return CellSet(n).set();
    case Concept::Kind::Bottom: return CellSet(n);
    case Concept::Kind::Atomic:
        if (!kb.has_concept(c.name())) throw UndeclaredName("concept '" + c.name() + "' is not declared");
        return interp.extent(c.name());
    case Concept::Kind::Not: return ~eval_concept(kb, interp, c.lhs());
    case Concept::Kind::And: return eval_concept(kb, interp, c.lhs()) & eval_concept(kb, interp, c.rhs());
    case Concept::Kind::Or: return eval_concept(kb, interp, c.lhs()) | eval_concept(kb, interp, c.rhs());
    case Concept::Kind::Exists:
    case Concept::Kind::Forall: {
        if (!kb.has_role(c.name())) throw UndeclaredName("role '" + c.name() + "' is not declared");
        const Role& role = interp.role(c.name());
        // forall r.C = !exists r.!C
        CellSet body = eval_concept(kb, interp, c.lhs());
        if (c.kind() == Concept::Kind::Forall) body.flip();
        CellSet out(n);
        std::vector<CellId> preds;
        for_each_member(body, [&](CellId y) {
            role.predecessors(y, preds);
            for (auto x : preds) out.set(x.value);
        });
        if (c.kind() == Concept::Kind::Forall) out.flip();
        return out;
    }
    }
    return CellSet(n);
}

Interpretation assemble_interpretation(const KnowledgeBase& kb, const ConceptRegions& regions, const Grid& grid_x)
{
    Interpretation interp(grid_x);
    const std::size_t n = grid_x.size();

    for (const auto& name : kb.concepts())
        if (!kb.definition_of(name)) interp.set_extent(name, CellSet(n));

    auto cells_of = [&](const std::vector<HyperRect>& boxes) {
        CellSet s(n);
        for (const auto& b : boxes) s |= grid_x.cell_set_intersecting(b);
        return s;
    };

    for (const auto& [name, boxes] : regions.regions) {
        if (!kb.has_concept(name)) throw UndeclaredName("region for undeclared concept '" + name + "'");
        if (kb.definition_of(name)) throw ValidationError("concept '" + name + "' is defined, not primitive");
        interp.set_extent(name, interp.extent(name) | cells_of(boxes));
    }

    for (const auto& inst : regions.instances) {
        if (!kb.has_concept(inst.concept_name))
            throw UndeclaredName("instance '" + inst.id + "' of undeclared concept '" + inst.concept_name + "'");
        ScopedInstance si{inst.id, inst.concept_name, cells_of(inst.boxes), cells_of(inst.scope)};
        interp.set_extent(inst.concept_name, interp.extent(inst.concept_name) | si.cells);
        interp.set_extent(inst.id, si.cells);
        interp.set_extent(inst.id + "_scope", si.scope);
        interp.add_instance(std::move(si));
    }

    std::map<std::string, std::vector<std::pair<CellId, CellId>>> role_pairs;
    for (const auto& a : kb.abox()) {
        if (!grid_x.valid(a.individual) || (a.kind == ABoxAssertion::Kind::Role && !grid_x.valid(a.other)))
            throw InvalidCell("ABox assertion on a cell outside the state grid");
        if (a.kind == ABoxAssertion::Kind::Concept) {
            CellSet e = interp.extent(a.name);
            e.set(a.individual.value);
            interp.set_extent(a.name, std::move(e));
        } else {
            role_pairs[a.name].emplace_back(a.individual, a.other);
        }
    }
    for (const auto& [name, decl] : kb.roles()) {
        if (decl.proximity_range)
            interp.set_role(name, std::make_shared<ProximityRole>(grid_x, *decl.proximity_range));
        else
            interp.set_role(name, std::make_shared<ExplicitRole>(role_pairs[name]));
    }

    for (const auto& ax : kb.tbox())
        if (ax.kind == TBoxAxiom::Kind::Equivalence && !ax.defined.empty())
            interp.set_extent(ax.defined, eval_concept(kb, interp, ax.rhs));
    return interp;
}

std::vector<TBoxAxiom> violated_inclusions(const KnowledgeBase& kb, const Interpretation& interp)
{
    std::vector<TBoxAxiom> out;
    for (const auto& ax : kb.tbox()) {
        if (ax.kind == TBoxAxiom::Kind::Inclusion && !eval_concept(kb, interp, ax.lhs).is_subset_of(
                                                         eval_concept(kb, interp, ax.rhs)))
            out.push_back(ax);
        if (ax.kind == TBoxAxiom::Kind::Equivalence && ax.defined.empty() &&
            eval_concept(kb, interp, ax.lhs) != eval_concept(kb, interp, ax.rhs))
            out.push_back(ax);
    }
    return out;
}

} // namespace kaw
