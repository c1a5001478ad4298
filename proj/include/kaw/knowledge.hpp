#pragma once

#include "kaw/cell_set.hpp"
#include "kaw/grid.hpp"
#include "kaw/ltl.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kaw {

// ALC concept description.
class Concept {
public:
    enum class Kind { Top, Bottom, Atomic, Not, And, Or, Exists, Forall };

    static Concept top();
    static Concept bottom();
    static Concept atomic(std::string name);
    static Concept negation(Concept c);
    static Concept conjunction(Concept a, Concept b);
    static Concept disjunction(Concept a, Concept b);
    static Concept exists(std::string role, Concept c);
    static Concept forall(std::string role, Concept c);

    [[nodiscard]] Kind kind() const noexcept { return node_->kind; }
    // Concept name for Atomic, role name for Exists/Forall.
    [[nodiscard]] const std::string& name() const noexcept { return node_->name; }
    [[nodiscard]] const Concept& lhs() const noexcept { return *node_->lhs; }
    [[nodiscard]] const Concept& rhs() const noexcept { return *node_->rhs; }

    [[nodiscard]] std::set<std::string> concept_names() const;
    [[nodiscard]] std::set<std::string> role_names() const;
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const Concept& a, const Concept& b);

private:
    struct Node {
        Kind kind = Kind::Top;
        std::string name;
        std::shared_ptr<const Concept> lhs;
        std::shared_ptr<const Concept> rhs;
    };
    explicit Concept(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Concept make(Kind k, std::string name, const Concept* a, const Concept* b);

    std::shared_ptr<const Node> node_;
};

// Concept syntax: identifiers, top, bottom, !C, C & D, C | D,
// exists R.C, forall R.C, parentheses. Throws SyntaxError.
Concept parse_concept(std::string_view text);

struct TBoxAxiom {
    enum class Kind { Inclusion, Equivalence, TemporalEquivalence };

    Kind kind = Kind::Equivalence;
    Concept lhs = Concept::top();    // Inclusion / Equivalence
    Concept rhs = Concept::top();
    std::string defined;             // Equivalence (atomic lhs) / TemporalEquivalence
    LtlFormula temporal;             // TemporalEquivalence

    [[nodiscard]] std::string to_string() const;
};

// Axiom syntax: "C <= D" (inclusion), "A == C" (equivalence), or
// "A == <ltl>" when the right side uses temporal operators.
TBoxAxiom parse_axiom(std::string_view text);

struct ABoxAssertion {
    enum class Kind { Concept, Role };

    Kind kind = Kind::Concept;
    CellId individual;
    CellId other; // Role assertions: (individual, other)
    std::string name;
};

struct RoleDecl {
    std::string name;
    // Present for the built-in Proximity role: detection range in meters.
    std::optional<double> proximity_range;
};

class KnowledgeBase {
public:
    void declare_concept(const std::string& name);
    void declare_role(RoleDecl role);
    // Validates referenced names; defined names (axiom left sides) must be fresh.
    void add_axiom(TBoxAxiom axiom);
    void add_assertion(ABoxAssertion assertion);

    [[nodiscard]] bool has_concept(const std::string& name) const { return concepts_.contains(name); }
    [[nodiscard]] bool has_role(const std::string& name) const { return roles_.contains(name); }
    [[nodiscard]] const std::set<std::string>& concepts() const noexcept { return concepts_; }
    [[nodiscard]] const std::map<std::string, RoleDecl>& roles() const noexcept { return roles_; }
    [[nodiscard]] const std::vector<TBoxAxiom>& tbox() const noexcept { return tbox_; }
    [[nodiscard]] const std::vector<ABoxAssertion>& abox() const noexcept { return abox_; }
    [[nodiscard]] const TBoxAxiom* definition_of(const std::string& name) const;

private:
    std::set<std::string> concepts_;
    std::map<std::string, RoleDecl> roles_;
    std::vector<TBoxAxiom> tbox_;
    std::vector<ABoxAssertion> abox_;
};

// Proximity between two state cells: the planar rectangles are closer than D
// and, for some heading in the first cell, the second lies ahead.
bool proximity(const Grid& grid_x, CellId from, CellId to, double range);

// Binary relation over state cells.
class Role {
public:
    virtual ~Role() = default;
    [[nodiscard]] virtual bool related(CellId from, CellId to) const = 0;
    // All x with (x, to) in the relation.
    virtual void predecessors(CellId to, std::vector<CellId>& out) const = 0;
};

class ExplicitRole final : public Role {
public:
    explicit ExplicitRole(std::vector<std::pair<CellId, CellId>> pairs);
    [[nodiscard]] bool related(CellId from, CellId to) const override;
    void predecessors(CellId to, std::vector<CellId>& out) const override;

private:
    std::vector<std::pair<CellId, CellId>> by_target_; // sorted by (to, from)
};

// Proximity materialized lazily: successor lists are memoized per source cell.
class ProximityRole final : public Role {
public:
    ProximityRole(const Grid& grid_x, double range);
    [[nodiscard]] bool related(CellId from, CellId to) const override;
    void predecessors(CellId to, std::vector<CellId>& out) const override;
    // All y with (from, y) related; cached.
    [[nodiscard]] std::shared_ptr<const std::vector<CellId>> successors(CellId from) const;
    [[nodiscard]] double range() const noexcept { return range_; }

private:
    void window(CellId center, std::vector<CellId>& out) const;

    Grid grid_;
    double range_;
    mutable std::mutex memo_mutex_;
    mutable std::unordered_map<CellId, std::shared_ptr<const std::vector<CellId>>> memo_;
};

// A named individual region of some concept, with the region its temporal
// obligation applies to (e.g. a no-entry sign and the street it guards).
struct ScopedInstance {
    std::string id;
    std::string concept_name;
    CellSet cells;
    CellSet scope;
};

class Interpretation {
public:
    explicit Interpretation(const Grid& grid_x);

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t domain_size() const noexcept { return grid_.size(); }

    void set_extent(const std::string& name, CellSet extent);
    [[nodiscard]] bool has_extent(const std::string& name) const { return extents_.contains(name); }
    [[nodiscard]] const CellSet& extent(const std::string& name) const;
    [[nodiscard]] const std::map<std::string, CellSet>& extents() const noexcept { return extents_; }

    void set_role(const std::string& name, std::shared_ptr<const Role> role);
    [[nodiscard]] const Role& role(const std::string& name) const;
    [[nodiscard]] std::shared_ptr<const Role> role_ptr(const std::string& name) const;

    void add_instance(ScopedInstance instance);
    [[nodiscard]] const std::vector<ScopedInstance>& instances() const noexcept { return instances_; }

    // Names of every extent containing the cell.
    [[nodiscard]] PropositionSet labels(CellId cell) const;

private:
    Grid grid_;
    std::map<std::string, CellSet> extents_;
    std::map<std::string, std::shared_ptr<const Role>> roles_;
    std::vector<ScopedInstance> instances_;
};

CellSet eval_concept(const KnowledgeBase& kb, const Interpretation& interp, const Concept& c);

struct ScopedRegion {
    std::string id;
    std::string concept_name;
    std::vector<HyperRect> boxes;
    std::vector<HyperRect> scope;
};

struct ConceptRegions {
    std::map<std::string, std::vector<HyperRect>> regions;
    std::vector<ScopedRegion> instances;
};

/*
 * Builds the single intended model over the state grid: atomic extents are
 * the cells meeting each region, ABox assertions add individuals, roles are
 * bound (Proximity lazily), and non-temporal equivalences are evaluated in
 * declaration order and cached as extents of their defined names.
 */
Interpretation assemble_interpretation(const KnowledgeBase& kb, const ConceptRegions& regions, const Grid& grid_x);

// Inclusion axioms C <= D violated in the model.
std::vector<TBoxAxiom> violated_inclusions(const KnowledgeBase& kb, const Interpretation& interp);

} // namespace kaw
