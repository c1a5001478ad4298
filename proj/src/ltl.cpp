#include "kaw/ltl.hpp"

#include "kaw/error.hpp"

#include <functional>
#include <stdexcept>

namespace kaw {

LtlFormula::LtlFormula() : node_(std::make_shared<const Node>()) {}

LtlFormula LtlFormula::make(Kind k, Sugar s, std::string name, const LtlFormula* a, const LtlFormula* b)
{
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->sugar = s;
    n->name = std::move(name);
    if (a) n->lhs = std::make_shared<const LtlFormula>(*a);
    if (b) n->rhs = std::make_shared<const LtlFormula>(*b);
    return LtlFormula(std::move(n));
}

LtlFormula LtlFormula::truth() { return LtlFormula(); }
LtlFormula LtlFormula::prop(std::string name) { return make(Kind::Prop, Sugar::None, std::move(name), nullptr, nullptr); }
LtlFormula LtlFormula::negation(LtlFormula a) { return make(Kind::Not, Sugar::None, {}, &a, nullptr); }
LtlFormula LtlFormula::conjunction(LtlFormula a, LtlFormula b) { return make(Kind::And, Sugar::None, {}, &a, &b); }
LtlFormula LtlFormula::disjunction(LtlFormula a, LtlFormula b) { return make(Kind::Or, Sugar::None, {}, &a, &b); }
LtlFormula LtlFormula::next(LtlFormula a) { return make(Kind::Next, Sugar::None, {}, &a, nullptr); }
LtlFormula LtlFormula::until(LtlFormula a, LtlFormula b) { return make(Kind::Until, Sugar::None, {}, &a, &b); }

LtlFormula LtlFormula::eventually(LtlFormula a)
{
    const LtlFormula t = truth();
    return make(Kind::Until, Sugar::Eventually, {}, &t, &a);
}

LtlFormula LtlFormula::always(LtlFormula a)
{
    const LtlFormula inner = until(truth(), negation(std::move(a)));
    return make(Kind::Not, Sugar::Always, {}, &inner, nullptr);
}

LtlFormula LtlFormula::implies(LtlFormula a, LtlFormula b)
{
    const LtlFormula na = negation(std::move(a));
    return make(Kind::Or, Sugar::Implies, {}, &na, &b);
}

const LtlFormula& LtlFormula::sugar_operand() const
{
    switch (sugar()) {
    case Sugar::Eventually: return rhs();
    case Sugar::Always: return lhs().rhs().lhs();
    default: throw std::logic_error("not a sugared unary formula");
    }
}

const LtlFormula& LtlFormula::sugar_lhs() const
{
    if (sugar() != Sugar::Implies) throw std::logic_error("not an implication");
    return lhs().lhs();
}

const LtlFormula& LtlFormula::sugar_rhs() const
{
    if (sugar() != Sugar::Implies) throw std::logic_error("not an implication");
    return rhs();
}

bool LtlFormula::propositional() const noexcept
{
    switch (kind()) {
    case Kind::True:
    case Kind::Prop: return true;
    case Kind::Not: return lhs().propositional();
    case Kind::And:
    case Kind::Or: return lhs().propositional() && rhs().propositional();
    case Kind::Next:
    case Kind::Until: return false;
    }
    return false;
}

std::set<std::string> LtlFormula::propositions() const
{
    std::set<std::string> out;
    std::function<void(const LtlFormula&)> walk = [&](const LtlFormula& f) {
        if (f.kind() == Kind::Prop) out.insert(f.name());
        if (f.node_->lhs) walk(f.lhs());
        if (f.node_->rhs) walk(f.rhs());
    };
    walk(*this);
    return out;
}

std::string LtlFormula::to_string() const
{
    switch (sugar()) {
    case Sugar::Eventually: return "F " + sugar_operand().to_string();
    case Sugar::Always: return "G " + sugar_operand().to_string();
    case Sugar::Implies: return "(" + sugar_lhs().to_string() + " -> " + sugar_rhs().to_string() + ")";
    case Sugar::None: break;
    }
    switch (kind()) {
    case Kind::True: return "true";
    case Kind::Prop: return name();
    case Kind::Not: return "!" + lhs().to_string();
    case Kind::And: return "(" + lhs().to_string() + " & " + rhs().to_string() + ")";
    case Kind::Or: return "(" + lhs().to_string() + " | " + rhs().to_string() + ")";
    case Kind::Next: return "X " + lhs().to_string();
    case Kind::Until: return "(" + lhs().to_string() + " U " + rhs().to_string() + ")";
    }
    return {};
}

bool operator==(const LtlFormula& a, const LtlFormula& b)
{
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind() || a.sugar() != b.sugar() || a.name() != b.name()) return false;
    if (static_cast<bool>(a.node_->lhs) != static_cast<bool>(b.node_->lhs)) return false;
    if (static_cast<bool>(a.node_->rhs) != static_cast<bool>(b.node_->rhs)) return false;
    if (a.node_->lhs && !(a.lhs() == b.lhs())) return false;
    if (a.node_->rhs && !(a.rhs() == b.rhs())) return false;
    return true;
}

namespace {

// Bottom-up evaluation: one truth vector per subformula over the positions.
std::vector<char> evaluate(const LtlFormula& f, const std::vector<PropositionSet>& trace)
{
    using K = LtlFormula::Kind;
    const std::size_t n = trace.size();
    std::vector<char> v(n, 0);
    switch (f.kind()) {
    case K::True:
        std::fill(v.begin(), v.end(), 1);
        break;
    case K::Prop:
        for (std::size_t i = 0; i < n; ++i) v[i] = trace[i].contains(f.name());
        break;
    case K::Not: {
        const auto a = evaluate(f.lhs(), trace);
        for (std::size_t i = 0; i < n; ++i) v[i] = !a[i];
        break;
    }
    case K::And:
    case K::Or: {
        const auto a = evaluate(f.lhs(), trace);
        const auto b = evaluate(f.rhs(), trace);
        for (std::size_t i = 0; i < n; ++i) v[i] = f.kind() == K::And ? (a[i] && b[i]) : (a[i] || b[i]);
        break;
    }
    case K::Next: {
        const auto a = evaluate(f.lhs(), trace);
        for (std::size_t i = 0; i + 1 < n; ++i) v[i] = a[i + 1];
        break;
    }
    case K::Until: {
        const auto a = evaluate(f.lhs(), trace);
        const auto b = evaluate(f.rhs(), trace);
        char later = 0;
        for (std::size_t i = n; i-- > 0;) {
            later = b[i] || (a[i] && later);
            v[i] = later;
        }
        break;
    }
    }
    return v;
}

} // namespace

bool check_trace(const LtlFormula& phi, const std::vector<PropositionSet>& trace, std::size_t position)
{
    if (trace.empty()) throw ValidationError("cannot check an empty trace");
    if (position >= trace.size()) throw ValidationError("trace position out of range");
    return evaluate(phi, trace)[position] != 0;
}

} // namespace kaw
