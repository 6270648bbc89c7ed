#pragma once

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diagram.hpp"

namespace cocheck {

// ── errors ──────────────────────────────────────────────────────────────────

struct ParseError : std::runtime_error {
    int line, col;

    ParseError(int line_, int col_, const std::string& what_)
        : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                             std::to_string(col_) + ": " + what_),
          line(line_),
          col(col_) {}
};

struct DiagramError : std::runtime_error {
    std::vector<Finding> findings;

    explicit DiagramError(std::vector<Finding> f)
        : std::runtime_error(render(f)), findings(std::move(f)) {}

    static std::string render(const std::vector<Finding>& fs) {
        std::string s = "ill-formed contract:";
        for (const auto& f : fs) s += "\n  [" + std::string(to_string(f.kind)) + "] " + f.message;
        return s;
    }
};

// ── lexer ───────────────────────────────────────────────────────────────────

namespace dsl_detail {

struct Token {
    enum class Kind { Ident, Int, Punct, End };

    Kind kind = Kind::End;
    std::string text;
    long value = 0;
    int line = 0, col = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws_and_comments();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) return;
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_'))
                step();
            tok_.kind = Token::Kind::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                step();
            tok_.kind = Token::Kind::Int;
            tok_.text = src_.substr(start, pos_ - start);
            tok_.value = std::stol(tok_.text);
            return;
        }
        for (const char* p : {"&&", "||", "==", "<="}) {
            if (src_.compare(pos_, 2, p) == 0) {
                tok_.kind = Token::Kind::Punct;
                tok_.text = p;
                step();
                step();
                return;
            }
        }
        if (std::string("{}:,()!").find(c) != std::string::npos) {
            tok_.kind = Token::Kind::Punct;
            tok_.text = std::string(1, c);
            step();
            return;
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

    void skip_ws_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') step();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                step();
            } else {
                break;
            }
        }
    }

    void step() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

// ── parser ──────────────────────────────────────────────────────────────────

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    ContractDiagram parse() {
        expect_ident("contract");
        ContractDiagram d;
        d.name = ident("contract name");
        expect_punct("{");
        while (at_ident("agents") || at_ident("vars") || at_ident("actions")) preamble(d);
        expect_ident("clause");
        d.root = clause(d);
        while (at_ident("reparation")) {
            lex_.take();
            std::string ref = ident("reparation name");
            expect_ident("clause");
            d.reparation_defs.emplace_back(ref, clause(d));
        }
        expect_punct("}");
        if (lex_.peek().kind != Token::Kind::End)
            fail("trailing input after contract");
        auto rep = validate_diagram(d);
        if (!rep.ok()) throw DiagramError(std::move(rep.findings));
        return d;
    }

private:
    void preamble(ContractDiagram& d) {
        std::string kw = lex_.take().text;
        if (kw == "agents") {
            d.agents = ident_list("agent name");
        } else if (kw == "actions") {
            d.declared_actions = ident_list("action name");
        } else {  // vars
            do {
                std::string name = ident("variable name");
                if (at_ident("in")) {
                    lex_.take();
                    expect_punct("{");
                    auto values = ident_list("domain value");
                    expect_punct("}");
                    d.vars.declare(name, std::move(values));
                } else {
                    d.vars.declare(name, {"false", "true"});
                }
            } while (eat_punct(","));
        }
    }

    ClausePtr clause(ContractDiagram& d) {
        auto c = std::make_shared<Clause>();
        c->name = ident("clause name");
        if (at_ident("alias")) {
            lex_.take();
            c->alias = static_cast<int>(integer("alias number"));
        }
        expect_punct("{");
        bool has_body = false;
        while (!at_punct("}")) {
            if (at_ident("agent")) {
                lex_.take();
                c->agent = ident("agent name");
            } else if (at_ident("guard")) {
                lex_.take();
                c->guard = guard_expr();
            } else if (at_ident("within")) {
                lex_.take();
                TimeRestriction tr;
                tr.clock = ident("clock name");
                expect_punct("<=");
                tr.bound = static_cast<int>(integer("time bound"));
                c->window = tr;
            } else if (at_ident("obligation") || at_ident("permission") ||
                       at_ident("prohibition")) {
                std::string kw = lex_.take().text;
                c->form = Clause::Form::Norm;
                c->kind = kw == "obligation"  ? NormKind::Obligation
                          : kw == "permission" ? NormKind::Permission
                                               : NormKind::Prohibition;
                c->body = action_expr();
                has_body = true;
            } else if (at_ident("reparation")) {
                lex_.take();
                Reparation r;
                if (at_ident("clause")) {
                    lex_.take();
                    r.inline_clause = clause(d);
                } else {
                    r.ref = ident("reparation name");
                }
                c->reparation = std::move(r);
            } else if (at_ident("and") || at_ident("or") || at_ident("seq")) {
                std::string kw = lex_.take().text;
                c->form = Clause::Form::Composite;
                c->refinement = kw == "and"  ? RefinementKind::And
                                : kw == "or" ? RefinementKind::Or
                                             : RefinementKind::Seq;
                expect_punct("{");
                while (at_ident("clause")) {
                    lex_.take();
                    c->children.push_back(clause(d));
                }
                expect_punct("}");
                has_body = true;
            } else {
                fail("expected a clause item (agent, guard, within, obligation, permission, "
                     "prohibition, reparation, and, or, seq)");
            }
        }
        expect_punct("}");
        if (!has_body) fail("clause '" + c->name + "' has no norm or refinement");
        return c;
    }

    std::shared_ptr<ActionExpr> action_expr() {
        auto e = std::make_shared<ActionExpr>();
        if (at_ident("and") || at_ident("or") || at_ident("seq")) {
            std::string kw = lex_.take().text;
            e->atomic = false;
            e->refinement = kw == "and"  ? RefinementKind::And
                            : kw == "or" ? RefinementKind::Or
                                         : RefinementKind::Seq;
            expect_punct("{");
            while (!at_punct("}")) {
                NamedAction na;
                na.name = ident("part name");
                if (at_ident("alias")) {
                    lex_.take();
                    na.alias = static_cast<int>(integer("alias number"));
                }
                expect_punct(":");
                na.expr = action_expr();
                e->children.push_back(std::move(na));
            }
            expect_punct("}");
        } else {
            e->atomic = true;
            e->action = ident("action name");
        }
        return e;
    }

    // guard := gterm ('||' gterm)* ; gterm := gfact ('&&' gfact)*
    // gfact := '!' gfact | '(' guard ')' | true | false | var ('==' symbol)?
    BoolExprPtr guard_expr() {
        auto e = guard_term();
        while (eat_punct("||")) e = BoolExpr::mk_or(e, guard_term());
        return e;
    }

    BoolExprPtr guard_term() {
        auto e = guard_fact();
        while (eat_punct("&&")) e = BoolExpr::mk_and(e, guard_fact());
        return e;
    }

    BoolExprPtr guard_fact() {
        if (eat_punct("!")) return BoolExpr::mk_not(guard_fact());
        if (eat_punct("(")) {
            auto e = guard_expr();
            expect_punct(")");
            return e;
        }
        std::string id = ident("guard variable");
        if (id == "true") return BoolExpr::mk_true();
        if (id == "false") return BoolExpr::mk_false();
        if (eat_punct("==")) return BoolExpr::mk_eq(id, ident("value"));
        return BoolExpr::mk_var(id);
    }

    std::vector<std::string> ident_list(const char* what) {
        std::vector<std::string> out;
        out.push_back(ident(what));
        while (eat_punct(",")) out.push_back(ident(what));
        return out;
    }

    bool at_ident(const char* kw) const {
        return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == kw;
    }
    bool at_punct(const char* p) const {
        return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
    }
    bool eat_punct(const char* p) {
        if (!at_punct(p)) return false;
        lex_.take();
        return true;
    }
    void expect_punct(const char* p) {
        if (!at_punct(p)) fail(std::string("expected '") + p + "'");
        lex_.take();
    }
    void expect_ident(const char* kw) {
        if (!at_ident(kw)) fail(std::string("expected '") + kw + "'");
        lex_.take();
    }
    std::string ident(const char* what) {
        if (lex_.peek().kind != Token::Kind::Ident)
            fail(std::string("expected ") + what);
        return lex_.take().text;
    }
    long integer(const char* what) {
        if (lex_.peek().kind != Token::Kind::Int)
            fail(std::string("expected ") + what);
        return lex_.take().value;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = lex_.peek();
        std::string got = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.line, t.col, msg + ", got " + got);
    }

    Lexer lex_;
};

}  // namespace dsl_detail

inline ContractDiagram parse_diagram(const std::string& source) {
    return dsl_detail::Parser(source).parse();
}

// ── printer ─────────────────────────────────────────────────────────────────

namespace dsl_detail {

inline void print_action_expr(std::ostream& os, const ActionExpr& e, int indent);

inline void print_named_action(std::ostream& os, const NamedAction& na, int indent) {
    os << std::string(static_cast<std::size_t>(indent), ' ') << na.name;
    if (na.alias) os << " alias " << *na.alias;
    os << ": ";
    if (na.expr->atomic) {
        os << na.expr->action << "\n";
    } else {
        print_action_expr(os, *na.expr, indent);
    }
}

inline void print_action_expr(std::ostream& os, const ActionExpr& e, int indent) {
    // caller has already emitted the leading context for atomic bodies
    os << to_string(e.refinement) << " {\n";
    for (const auto& na : e.children) print_named_action(os, na, indent + 2);
    os << std::string(static_cast<std::size_t>(indent), ' ') << "}\n";
}

inline void print_clause(std::ostream& os, const ContractDiagram& d, const Clause& c,
                         int indent) {
    std::string pad(static_cast<std::size_t>(indent), ' ');
    os << pad << "clause " << c.name;
    if (c.alias) os << " alias " << *c.alias;
    os << " {\n";
    std::string inner = pad + "  ";
    if (!c.agent.empty()) os << inner << "agent " << c.agent << "\n";
    if (c.guard && !c.guard->is_true()) os << inner << "guard " << to_string(c.guard) << "\n";
    if (c.window)
        os << inner << "within " << c.window->clock << " <= " << c.window->bound << "\n";
    if (c.form == Clause::Form::Norm) {
        os << inner << to_string(c.kind) << " ";
        if (c.body->atomic) {
            os << c.body->action << "\n";
        } else {
            print_action_expr(os, *c.body, indent + 2);
        }
        if (c.reparation) {
            if (c.reparation->is_inline()) {
                os << inner << "reparation ";
                // print the inline clause header on the same line
                std::ostringstream sub;
                print_clause(sub, d, *c.reparation->inline_clause, indent + 2);
                std::string s = sub.str();
                os << s.substr(static_cast<std::size_t>(indent) + 2);
            } else {
                os << inner << "reparation " << c.reparation->ref << "\n";
            }
        }
    } else {
        os << inner << to_string(c.refinement) << " {\n";
        for (const auto& ch : c.children) print_clause(os, d, *ch, indent + 4);
        os << inner << "}\n";
    }
    os << pad << "}\n";
}

}  // namespace dsl_detail

inline std::string print_diagram(const ContractDiagram& d) {
    std::ostringstream os;
    os << "contract " << d.name << " {\n";
    if (!d.agents.empty()) {
        os << "  agents ";
        for (std::size_t i = 0; i < d.agents.size(); ++i)
            os << (i ? ", " : "") << d.agents[i];
        os << "\n";
    }
    if (!d.vars.empty()) {
        os << "  vars ";
        const auto& decls = d.vars.decls();
        for (std::size_t i = 0; i < decls.size(); ++i) {
            os << (i ? ", " : "") << decls[i].name;
            if (!decls[i].is_boolean()) {
                os << " in {";
                for (std::size_t j = 0; j < decls[i].values.size(); ++j)
                    os << (j ? ", " : "") << decls[i].values[j];
                os << "}";
            }
        }
        os << "\n";
    }
    if (!d.declared_actions.empty()) {
        os << "  actions ";
        for (std::size_t i = 0; i < d.declared_actions.size(); ++i)
            os << (i ? ", " : "") << d.declared_actions[i];
        os << "\n";
    }
    os << "\n";
    dsl_detail::print_clause(os, d, *d.root, 2);
    for (const auto& [ref, def] : d.reparation_defs) {
        os << "\n  reparation " << ref << " ";
        std::ostringstream sub;
        dsl_detail::print_clause(sub, d, *def, 2);
        os << sub.str().substr(2);
    }
    os << "}\n";
    return os.str();
}

}  // namespace cocheck
