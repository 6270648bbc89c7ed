#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocheck {

// ── finite-domain variables ─────────────────────────────────────────────────

// Guard variables range over small finite domains. Booleans get the implicit
// domain {false, true}; enumerated variables list their symbols explicitly.
struct VarDecl {
    std::string name;
    std::vector<std::string> values;

    bool is_boolean() const {
        return values.size() == 2 && values[0] == "false" && values[1] == "true";
    }
};

// One total valuation of all declared variables, packed mixed-radix.
using Assignment = std::uint32_t;

// Set of admissible valuations, kept sorted and deduplicated.
using AssignSet = std::vector<Assignment>;

class VarTable {
public:
    static VarTable boolean_vars(const std::vector<std::string>& names) {
        VarTable t;
        for (const auto& n : names) t.declare(n, {"false", "true"});
        return t;
    }

    void declare(const std::string& name, std::vector<std::string> values) {
        if (values.empty()) throw std::runtime_error("variable '" + name + "' has empty domain");
        if (index_of(name) >= 0) throw std::runtime_error("variable '" + name + "' declared twice");
        decls_.push_back({name, std::move(values)});
        rebuild();
    }

    const std::vector<VarDecl>& decls() const { return decls_; }
    bool empty() const { return decls_.empty(); }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < decls_.size(); ++i)
            if (decls_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    int value_index(int var, const std::string& symbol) const {
        const auto& vs = decls_[static_cast<std::size_t>(var)].values;
        for (std::size_t i = 0; i < vs.size(); ++i)
            if (vs[i] == symbol) return static_cast<int>(i);
        return -1;
    }

    // Total number of assignments (product of domain sizes).
    std::uint64_t assignment_count() const { return total_; }

    int value_of(Assignment a, int var) const {
        return static_cast<int>((a / strides_[static_cast<std::size_t>(var)]) %
                                decls_[static_cast<std::size_t>(var)].values.size());
    }

    AssignSet all_assignments() const {
        AssignSet out;
        out.reserve(static_cast<std::size_t>(total_));
        for (std::uint64_t a = 0; a < total_; ++a) out.push_back(static_cast<Assignment>(a));
        return out;
    }

    Assignment pack(const std::vector<int>& values) const {
        Assignment a = 0;
        for (std::size_t v = 0; v < decls_.size(); ++v)
            a += static_cast<Assignment>(values[v]) * strides_[v];
        return a;
    }

private:
    void rebuild() {
        strides_.assign(decls_.size(), 1);
        total_ = 1;
        for (std::size_t v = 0; v < decls_.size(); ++v) {
            strides_[v] = static_cast<Assignment>(total_);
            total_ *= decls_[v].values.size();
        }
        if (total_ > (1u << 20))
            throw std::runtime_error("variable domain product too large");
    }

    std::vector<VarDecl> decls_;
    std::vector<Assignment> strides_{};
    std::uint64_t total_ = 1;
};

// ── expressions ─────────────────────────────────────────────────────────────

// Guards over variables: literals, bare boolean variables, equality tests
// against a domain symbol, and the usual connectives.
struct BoolExpr;
using BoolExprPtr = std::shared_ptr<const BoolExpr>;

struct BoolExpr {
    enum class Kind { True, False, Var, Eq, Not, And, Or };

    Kind kind = Kind::True;
    std::string var;       // Var, Eq
    std::string value;     // Eq: the compared symbol
    BoolExprPtr lhs, rhs;  // Not uses lhs only

    static BoolExprPtr mk_true() { return leaf(Kind::True); }
    static BoolExprPtr mk_false() { return leaf(Kind::False); }
    static BoolExprPtr mk_var(std::string v) {
        auto e = std::make_shared<BoolExpr>();
        e->kind = Kind::Var;
        e->var = std::move(v);
        return e;
    }
    static BoolExprPtr mk_eq(std::string v, std::string val) {
        auto e = std::make_shared<BoolExpr>();
        e->kind = Kind::Eq;
        e->var = std::move(v);
        e->value = std::move(val);
        return e;
    }
    static BoolExprPtr mk_not(BoolExprPtr a) {
        if (a->kind == Kind::True) return mk_false();
        if (a->kind == Kind::False) return mk_true();
        auto e = std::make_shared<BoolExpr>();
        e->kind = Kind::Not;
        e->lhs = std::move(a);
        return e;
    }
    static BoolExprPtr mk_and(BoolExprPtr a, BoolExprPtr b) {
        if (a->kind == Kind::True) return b;
        if (b->kind == Kind::True) return a;
        if (a->kind == Kind::False || b->kind == Kind::False) return mk_false();
        auto e = std::make_shared<BoolExpr>();
        e->kind = Kind::And;
        e->lhs = std::move(a);
        e->rhs = std::move(b);
        return e;
    }
    static BoolExprPtr mk_or(BoolExprPtr a, BoolExprPtr b) {
        if (a->kind == Kind::False) return b;
        if (b->kind == Kind::False) return a;
        if (a->kind == Kind::True || b->kind == Kind::True) return mk_true();
        auto e = std::make_shared<BoolExpr>();
        e->kind = Kind::Or;
        e->lhs = std::move(a);
        e->rhs = std::move(b);
        return e;
    }

    bool is_true() const { return kind == Kind::True; }

private:
    static BoolExprPtr leaf(Kind k) {
        auto e = std::make_shared<BoolExpr>();
        e->kind = k;
        return e;
    }
};

inline bool eval(const BoolExpr& e, const VarTable& vars, Assignment a) {
    switch (e.kind) {
        case BoolExpr::Kind::True: return true;
        case BoolExpr::Kind::False: return false;
        case BoolExpr::Kind::Var: {
            int v = vars.index_of(e.var);
            if (v < 0) throw std::runtime_error("undeclared variable '" + e.var + "'");
            return vars.decls()[static_cast<std::size_t>(v)].values[
                       static_cast<std::size_t>(vars.value_of(a, v))] == "true";
        }
        case BoolExpr::Kind::Eq: {
            int v = vars.index_of(e.var);
            if (v < 0) throw std::runtime_error("undeclared variable '" + e.var + "'");
            int val = vars.value_index(v, e.value);
            if (val < 0)
                throw std::runtime_error("value '" + e.value + "' not in domain of '" + e.var + "'");
            return vars.value_of(a, v) == val;
        }
        case BoolExpr::Kind::Not: return !eval(*e.lhs, vars, a);
        case BoolExpr::Kind::And: return eval(*e.lhs, vars, a) && eval(*e.rhs, vars, a);
        case BoolExpr::Kind::Or: return eval(*e.lhs, vars, a) || eval(*e.rhs, vars, a);
    }
    return false;
}

inline AssignSet filter(const BoolExprPtr& e, const VarTable& vars, const AssignSet& in) {
    if (!e || e->is_true()) return in;
    AssignSet out;
    out.reserve(in.size());
    for (Assignment a : in)
        if (eval(*e, vars, a)) out.push_back(a);
    return out;
}

// Substitutes fixed bindings (variable -> domain symbol) and simplifies.
inline BoolExprPtr substitute(const BoolExprPtr& e,
                              const std::map<std::string, std::string>& bindings) {
    if (!e) return BoolExpr::mk_true();
    switch (e->kind) {
        case BoolExpr::Kind::True:
        case BoolExpr::Kind::False: return e;
        case BoolExpr::Kind::Var: {
            auto it = bindings.find(e->var);
            if (it == bindings.end()) return e;
            return it->second == "true" ? BoolExpr::mk_true() : BoolExpr::mk_false();
        }
        case BoolExpr::Kind::Eq: {
            auto it = bindings.find(e->var);
            if (it == bindings.end()) return e;
            return it->second == e->value ? BoolExpr::mk_true() : BoolExpr::mk_false();
        }
        case BoolExpr::Kind::Not: return BoolExpr::mk_not(substitute(e->lhs, bindings));
        case BoolExpr::Kind::And:
            return BoolExpr::mk_and(substitute(e->lhs, bindings), substitute(e->rhs, bindings));
        case BoolExpr::Kind::Or:
            return BoolExpr::mk_or(substitute(e->lhs, bindings), substitute(e->rhs, bindings));
    }
    return e;
}

inline void collect_vars(const BoolExprPtr& e, std::vector<std::string>& out) {
    if (!e) return;
    if (e->kind == BoolExpr::Kind::Var || e->kind == BoolExpr::Kind::Eq) {
        if (std::find(out.begin(), out.end(), e->var) == out.end()) out.push_back(e->var);
        return;
    }
    collect_vars(e->lhs, out);
    collect_vars(e->rhs, out);
}

// ── concrete syntax ─────────────────────────────────────────────────────────
//
//   expr  := term ('||' term)*
//   term  := fact ('&&' fact)*
//   fact  := '!' fact | '(' expr ')' | 'true' | 'false' | ident ('==' symbol)?

inline std::string to_string(const BoolExprPtr& e) {
    if (!e) return "true";
    auto paren = [](const BoolExprPtr& sub, bool need) {
        std::string s = to_string(sub);
        return need ? "(" + s + ")" : s;
    };
    switch (e->kind) {
        case BoolExpr::Kind::True: return "true";
        case BoolExpr::Kind::False: return "false";
        case BoolExpr::Kind::Var: return e->var;
        case BoolExpr::Kind::Eq: return e->var + " == " + e->value;
        case BoolExpr::Kind::Not:
            return "!" + paren(e->lhs, e->lhs->kind == BoolExpr::Kind::And ||
                                           e->lhs->kind == BoolExpr::Kind::Or ||
                                           e->lhs->kind == BoolExpr::Kind::Eq);
        case BoolExpr::Kind::And:
            return paren(e->lhs, e->lhs->kind == BoolExpr::Kind::Or) + " && " +
                   paren(e->rhs, e->rhs->kind == BoolExpr::Kind::Or);
        case BoolExpr::Kind::Or: return to_string(e->lhs) + " || " + to_string(e->rhs);
    }
    return "true";
}

namespace detail {

struct ExprCursor {
    const std::string& s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool eat(const char* tok) {
        skip_ws();
        std::size_t n = std::char_traits<char>::length(tok);
        if (s.compare(pos, n, tok) == 0) {
            pos += n;
            return true;
        }
        return false;
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) ||
                                  s[pos] == '_'))
            ++pos;
        return s.substr(start, pos - start);
    }
};

inline BoolExprPtr parse_or(ExprCursor& c);

inline BoolExprPtr parse_fact(ExprCursor& c) {
    if (c.eat("!")) return BoolExpr::mk_not(parse_fact(c));
    if (c.eat("(")) {
        auto e = parse_or(c);
        if (!c.eat(")")) throw std::runtime_error("expected ')' in guard: " + c.s);
        return e;
    }
    std::string id = c.ident();
    if (id.empty()) throw std::runtime_error("malformed guard expression: " + c.s);
    if (id == "true") return BoolExpr::mk_true();
    if (id == "false") return BoolExpr::mk_false();
    if (c.eat("==")) {
        std::string val = c.ident();
        if (val.empty()) throw std::runtime_error("expected value after '==' in guard: " + c.s);
        return BoolExpr::mk_eq(id, val);
    }
    return BoolExpr::mk_var(id);
}

inline BoolExprPtr parse_and(ExprCursor& c) {
    auto e = parse_fact(c);
    while (c.eat("&&")) e = BoolExpr::mk_and(e, parse_fact(c));
    return e;
}

inline BoolExprPtr parse_or(ExprCursor& c) {
    auto e = parse_and(c);
    while (c.eat("||")) e = BoolExpr::mk_or(e, parse_and(c));
    return e;
}

}  // namespace detail

inline BoolExprPtr parse_bool_expr(const std::string& text) {
    if (text.empty()) return BoolExpr::mk_true();
    detail::ExprCursor c{text};
    auto e = detail::parse_or(c);
    c.skip_ws();
    if (c.pos != text.size())
        throw std::runtime_error("trailing characters in guard expression: " + text);
    return e;
}

inline bool structurally_equal(const BoolExprPtr& a, const BoolExprPtr& b) {
    if (!a || !b) return (!a || a->is_true()) && (!b || b->is_true());
    if (a->kind != b->kind || a->var != b->var || a->value != b->value) return false;
    if (a->kind == BoolExpr::Kind::Not) return structurally_equal(a->lhs, b->lhs);
    if (a->kind == BoolExpr::Kind::And || a->kind == BoolExpr::Kind::Or)
        return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    return true;
}

}  // namespace cocheck
