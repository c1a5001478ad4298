// Recursive-descent parsers for LTL formulas, ALC concepts and TBox axioms.

#include "kaw/error.hpp"
#include "kaw/knowledge.hpp"
#include "kaw/ltl.hpp"

#include <cctype>
#include <optional>
#include <set>

namespace kaw {

namespace {

enum class Tok { Ident, LParen, RParen, Bang, Amp, Bar, Arrow, Dot, Equiv, Subsume, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

const std::set<std::string, std::less<>> kReserved = {"X",   "U",      "F",      "G",     "true",
                                                      "false", "top", "bottom", "exists", "forall"};

std::vector<Token> lex(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = i;
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
            continue;
        }
        auto two = [&](std::string_view t) { return s.substr(i, 2) == t; };
        if (two("->")) {
            out.push_back({Tok::Arrow, "->", i});
            i += 2;
        } else if (two("==")) {
            out.push_back({Tok::Equiv, "==", i});
            i += 2;
        } else if (two("<=")) {
            out.push_back({Tok::Subsume, "<=", i});
            i += 2;
        } else {
            Tok k;
            switch (c) {
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case '!': k = Tok::Bang; break;
            case '&': k = Tok::Amp; break;
            case '|': k = Tok::Bar; break;
            case '.': k = Tok::Dot; break;
            default: throw SyntaxError(std::string("unexpected character '") + c + "'", i);
            }
            out.push_back({k, std::string(1, c), i});
            ++i;
        }
    }
    out.push_back({Tok::End, "", s.size()});
    return out;
}

class Cursor {
public:
    explicit Cursor(std::vector<Token> toks) : toks_(std::move(toks)) {}

    [[nodiscard]] const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool accept(Tok k)
    {
        if (peek().kind != k) return false;
        take();
        return true;
    }
    bool accept_word(std::string_view w)
    {
        if (peek().kind != Tok::Ident || peek().text != w) return false;
        take();
        return true;
    }
    void expect(Tok k, const char* what)
    {
        if (!accept(k)) fail(std::string("expected ") + what);
    }
    [[noreturn]] void fail(const std::string& msg) const
    {
        const auto& t = peek();
        throw SyntaxError(msg + (t.kind == Tok::End ? " but reached end of input" : " near '" + t.text + "'"),
                          t.pos);
    }
    std::string identifier(const char* what)
    {
        if (peek().kind != Tok::Ident || kReserved.contains(peek().text)) fail(std::string("expected ") + what);
        return take().text;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

class LtlParser {
public:
    explicit LtlParser(Cursor& c) : c_(c) {}

    LtlFormula implication()
    {
        LtlFormula lhs = disjunction();
        if (c_.accept(Tok::Arrow)) return LtlFormula::implies(lhs, implication());
        return lhs;
    }

private:
    LtlFormula disjunction()
    {
        LtlFormula f = conjunction();
        while (c_.accept(Tok::Bar)) f = LtlFormula::disjunction(f, conjunction());
        return f;
    }
    LtlFormula conjunction()
    {
        LtlFormula f = until();
        while (c_.accept(Tok::Amp)) f = LtlFormula::conjunction(f, until());
        return f;
    }
    LtlFormula until()
    {
        LtlFormula lhs = unary();
        if (c_.accept_word("U")) return LtlFormula::until(lhs, until());
        return lhs;
    }
    LtlFormula unary()
    {
        if (c_.accept(Tok::Bang)) return LtlFormula::negation(unary());
        if (c_.accept_word("X")) return LtlFormula::next(unary());
        if (c_.accept_word("F")) return LtlFormula::eventually(unary());
        if (c_.accept_word("G")) return LtlFormula::always(unary());
        return atom();
    }
    LtlFormula atom()
    {
        if (c_.accept(Tok::LParen)) {
            LtlFormula f = implication();
            c_.expect(Tok::RParen, "')'");
            return f;
        }
        if (c_.accept_word("true")) return LtlFormula::truth();
        if (c_.accept_word("false")) return LtlFormula::negation(LtlFormula::truth());
        return LtlFormula::prop(c_.identifier("a proposition"));
    }

    Cursor& c_;
};

class ConceptParser {
public:
    explicit ConceptParser(Cursor& c) : c_(c) {}

    Concept disjunction()
    {
        Concept f = conjunction();
        while (c_.accept(Tok::Bar)) f = Concept::disjunction(f, conjunction());
        return f;
    }

private:
    Concept conjunction()
    {
        Concept f = unary();
        while (c_.accept(Tok::Amp)) f = Concept::conjunction(f, unary());
        return f;
    }
    Concept unary()
    {
        if (c_.accept(Tok::Bang)) return Concept::negation(unary());
        for (const char* q : {"exists", "forall"}) {
            if (c_.accept_word(q)) {
                std::string role = c_.identifier("a role name");
                c_.expect(Tok::Dot, "'.' after role name");
                Concept body = unary();
                return q[0] == 'e' ? Concept::exists(std::move(role), body) : Concept::forall(std::move(role), body);
            }
        }
        if (c_.accept(Tok::LParen)) {
            Concept f = disjunction();
            c_.expect(Tok::RParen, "')'");
            return f;
        }
        if (c_.accept_word("top")) return Concept::top();
        if (c_.accept_word("bottom")) return Concept::bottom();
        return Concept::atomic(c_.identifier("a concept name"));
    }

    Cursor& c_;
};

bool has_temporal_tokens(const std::vector<Token>& toks)
{
    for (const auto& t : toks) {
        if (t.kind == Tok::Arrow) return true;
        if (t.kind == Tok::Ident &&
            (t.text == "X" || t.text == "U" || t.text == "F" || t.text == "G" || t.text == "true" ||
             t.text == "false"))
            return true;
    }
    return false;
}

} // namespace

LtlFormula parse_ltl(std::string_view text)
{
    Cursor c(lex(text));
    LtlFormula f = LtlParser(c).implication();
    if (c.peek().kind != Tok::End) c.fail("unexpected trailing input");
    return f;
}

Concept parse_concept(std::string_view text)
{
    Cursor c(lex(text));
    Concept f = ConceptParser(c).disjunction();
    if (c.peek().kind != Tok::End) c.fail("unexpected trailing input");
    return f;
}

TBoxAxiom parse_axiom(std::string_view text)
{
    const auto toks = lex(text);
    std::optional<std::size_t> split;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind == Tok::Equiv || toks[i].kind == Tok::Subsume) {
            if (split) throw SyntaxError("axiom has more than one '==' or '<='", toks[i].pos);
            split = i;
        }
    }
    if (!split) throw SyntaxError("axiom needs '==' or '<='", 0);

    const Token& op = toks[*split];
    const std::string_view left = text.substr(0, op.pos);
    const std::string_view right = text.substr(op.pos + 2);
    const std::vector<Token> right_toks(toks.begin() + static_cast<std::ptrdiff_t>(*split) + 1, toks.end());

    // Re-raise errors with positions relative to the whole axiom.
    auto shifted = [&](auto&& parse, std::string_view part, std::size_t offset) {
        try {
            return parse(part);
        } catch (const SyntaxError& e) {
            const std::string what = e.what();
            throw SyntaxError(what.substr(0, what.rfind(" at position")), e.position() + offset);
        }
    };

    TBoxAxiom ax;
    ax.lhs = shifted(parse_concept, left, 0);
    if (op.kind == Tok::Subsume) {
        ax.kind = TBoxAxiom::Kind::Inclusion;
        ax.rhs = shifted(parse_concept, right, op.pos + 2);
        return ax;
    }
    if (has_temporal_tokens(right_toks)) {
        if (ax.lhs.kind() != Concept::Kind::Atomic)
            throw SyntaxError("temporal definitions need an atomic left-hand side", 0);
        ax.kind = TBoxAxiom::Kind::TemporalEquivalence;
        ax.defined = ax.lhs.name();
        ax.temporal = shifted(parse_ltl, right, op.pos + 2);
        return ax;
    }
    ax.kind = TBoxAxiom::Kind::Equivalence;
    ax.rhs = shifted(parse_concept, right, op.pos + 2);
    if (ax.lhs.kind() == Concept::Kind::Atomic) ax.defined = ax.lhs.name();
    return ax;
}

} // namespace kaw
