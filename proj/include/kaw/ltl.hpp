#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kaw {

/*
 * LTL over concept names.
 *
 * The core connectives are true, p, !, &, |, X and U. Eventually, Always and
 * Implies are stored desugared (F a = true U a, G a = !(true U !a),
 * a -> b = !a | b); the outermost node of a desugared subtree remembers the
 * surface operator so printing reproduces it.
 */
class LtlFormula {
public:
    enum class Kind { True, Prop, Not, And, Or, Next, Until };
    enum class Sugar { None, Eventually, Always, Implies };

    LtlFormula(); // true

    static LtlFormula truth();
    static LtlFormula prop(std::string name);
    static LtlFormula negation(LtlFormula a);
    static LtlFormula conjunction(LtlFormula a, LtlFormula b);
    static LtlFormula disjunction(LtlFormula a, LtlFormula b);
    static LtlFormula next(LtlFormula a);
    static LtlFormula until(LtlFormula a, LtlFormula b);
    static LtlFormula eventually(LtlFormula a);
    static LtlFormula always(LtlFormula a);
    static LtlFormula implies(LtlFormula a, LtlFormula b);

    [[nodiscard]] Kind kind() const noexcept { return node_->kind; }
    [[nodiscard]] Sugar sugar() const noexcept { return node_->sugar; }
    [[nodiscard]] const std::string& name() const noexcept { return node_->name; }
    [[nodiscard]] const LtlFormula& lhs() const noexcept { return *node_->lhs; }
    [[nodiscard]] const LtlFormula& rhs() const noexcept { return *node_->rhs; }

    // Operand of a sugared unary node (F a / G a), or the two sides of a -> b.
    [[nodiscard]] const LtlFormula& sugar_operand() const;
    [[nodiscard]] const LtlFormula& sugar_lhs() const;
    [[nodiscard]] const LtlFormula& sugar_rhs() const;

    // No temporal operator anywhere below.
    [[nodiscard]] bool propositional() const noexcept;
    [[nodiscard]] std::set<std::string> propositions() const;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const LtlFormula& a, const LtlFormula& b);

private:
    struct Node {
        Kind kind = Kind::True;
        Sugar sugar = Sugar::None;
        std::string name;
        std::shared_ptr<const LtlFormula> lhs;
        std::shared_ptr<const LtlFormula> rhs;
    };
    explicit LtlFormula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    static LtlFormula make(Kind k, Sugar s, std::string name, const LtlFormula* a, const LtlFormula* b);

    std::shared_ptr<const Node> node_;
};

// Grammar: atoms are identifiers, true, false; operators ! X F G (prefix),
// U (right-assoc), &, |, -> (right-assoc), parentheses. Precedence from
// tightest: prefix operators, U, &, |, ->. Throws SyntaxError.
LtlFormula parse_ltl(std::string_view text);

using PropositionSet = std::set<std::string>;

// Bounded (finite-trace) semantics: U needs its witness inside the trace,
// X at the last position is false, G ranges over the remaining positions.
bool check_trace(const LtlFormula& phi, const std::vector<PropositionSet>& trace, std::size_t position = 0);

} // namespace kaw
