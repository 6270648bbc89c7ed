#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "boolexpr.hpp"

namespace cocheck {

// ── contract AST ────────────────────────────────────────────────────────────

enum class NormKind { Obligation, Permission, Prohibition };
enum class RefinementKind { And, Or, Seq };

inline const char* to_string(NormKind k) {
    switch (k) {
        case NormKind::Obligation: return "obligation";
        case NormKind::Permission: return "permission";
        case NormKind::Prohibition: return "prohibition";
    }
    return "?";
}

inline const char* to_string(RefinementKind k) {
    switch (k) {
        case RefinementKind::And: return "and";
        case RefinementKind::Or: return "or";
        case RefinementKind::Seq: return "seq";
    }
    return "?";
}

// Upper-bounded window on a dedicated clock: the clause's actions are due
// while clock <= bound.
struct TimeRestriction {
    std::string clock;
    int bound = 0;

    bool operator==(const TimeRestriction&) const = default;
};

// Body of a norm: an atomic action or a named refinement of sub-bodies.
struct ActionExpr;

struct NamedAction {
    std::string name;
    std::optional<int> alias;
    std::shared_ptr<ActionExpr> expr;
};

struct ActionExpr {
    bool atomic = true;
    std::string action;                 // atomic only
    RefinementKind refinement = RefinementKind::And;
    std::vector<NamedAction> children;  // compound only, size >= 2
};

struct Clause;
using ClausePtr = std::shared_ptr<Clause>;

// Either an inline clause or a reference to a named reparation definition.
struct Reparation {
    std::string ref;
    ClausePtr inline_clause;

    bool is_inline() const { return inline_clause != nullptr; }
};

struct Clause {
    enum class Form { Norm, Composite };

    Form form = Form::Norm;
    std::string name;
    std::optional<int> alias;
    std::string agent;  // norms only, may be empty
    BoolExprPtr guard;  // null means true
    std::optional<TimeRestriction> window;

    // Norm
    NormKind kind = NormKind::Obligation;
    std::shared_ptr<ActionExpr> body;
    std::optional<Reparation> reparation;

    // Composite
    RefinementKind refinement = RefinementKind::And;
    std::vector<ClausePtr> children;
};

struct ContractDiagram {
    std::string name;
    std::vector<std::string> agents;
    VarTable vars;
    std::vector<std::string> declared_actions;
    ClausePtr root;
    // Named reparation definitions, in declaration order.
    std::vector<std::pair<std::string, ClausePtr>> reparation_defs;

    const Clause* find_reparation(const std::string& ref) const {
        for (const auto& [n, c] : reparation_defs)
            if (n == ref) return c.get();
        return nullptr;
    }
};

// Canonical identity of a clause or body part in decorations, CN/CP sets and
// reports: the alias rendered as a string when one is declared, else the name.
inline std::string clause_key(const Clause& c) {
    return c.alias ? std::to_string(*c.alias) : c.name;
}

inline std::string part_key(const NamedAction& na) {
    return na.alias ? std::to_string(*na.alias) : na.name;
}

// True when every norm in the subtree is a permission. Such a subtree can
// neither be violated nor satisfied, so composites treat it as optional.
inline bool permission_only(const Clause& c) {
    if (c.form == Clause::Form::Norm) return c.kind == NormKind::Permission;
    for (const auto& ch : c.children)
        if (!permission_only(*ch)) return false;
    return true;
}

// ── traversal ───────────────────────────────────────────────────────────────

// Visits every clause reachable from the root, following named reparation
// references into their definitions. `visit` also receives whether the clause
// sits inside a reparation.
template <typename F>
inline void for_each_clause(const ContractDiagram& d, F&& visit) {
    struct Walker {
        const ContractDiagram& d;
        F& visit;
        std::set<const Clause*> seen;

        void walk(const Clause* c, bool in_reparation) {
            if (!c || seen.count(c)) return;
            seen.insert(c);
            visit(*c, in_reparation);
            if (c->form == Clause::Form::Composite) {
                for (const auto& ch : c->children) walk(ch.get(), in_reparation);
            } else if (c->reparation) {
                if (c->reparation->is_inline())
                    walk(c->reparation->inline_clause.get(), true);
                else
                    walk(d.find_reparation(c->reparation->ref), true);
            }
        }
    } w{d, visit, {}};
    w.walk(d.root.get(), false);
}

template <typename F>
inline void for_each_action_leaf(const ActionExpr& e, F&& visit) {
    if (e.atomic) return;
    for (const auto& na : e.children) {
        if (na.expr->atomic)
            visit(na);
        else
            for_each_action_leaf(*na.expr, visit);
    }
}

// Atomic actions appearing anywhere in the diagram's norm bodies.
inline std::set<std::string> action_alphabet(const ContractDiagram& d) {
    std::set<std::string> out;
    for_each_clause(d, [&](const Clause& c, bool) {
        if (c.form != Clause::Form::Norm || !c.body) return;
        if (c.body->atomic) {
            out.insert(c.body->action);
        } else {
            for_each_action_leaf(*c.body, [&](const NamedAction& na) {
                out.insert(na.expr->action);
            });
        }
    });
    return out;
}

// ── norm index ──────────────────────────────────────────────────────────────

// CN: names whose violation or satisfaction the automata record (norm clauses
// under O or F, plus the named parts of their refined bodies). CP: likewise
// for permissions.
struct NormIndex {
    std::set<std::string> CN;
    std::set<std::string> CP;
};

namespace detail {

inline void index_body_names(const ActionExpr& e, std::set<std::string>& into) {
    if (e.atomic) return;
    for (const auto& na : e.children) {
        into.insert(part_key(na));
        index_body_names(*na.expr, into);
    }
}

}  // namespace detail

inline NormIndex norm_index(const ContractDiagram& d) {
    NormIndex ix;
    for_each_clause(d, [&](const Clause& c, bool) {
        if (c.form != Clause::Form::Norm) return;
        auto& into = (c.kind == NormKind::Permission) ? ix.CP : ix.CN;
        into.insert(clause_key(c));
        if (c.body) detail::index_body_names(*c.body, into);
    });
    return ix;
}

// Alias number -> clause or named-part name, for rendering and lookups.
inline std::map<int, std::string> alias_map(const ContractDiagram& d) {
    std::map<int, std::string> out;
    for_each_clause(d, [&](const Clause& c, bool) {
        if (c.alias) out[*c.alias] = c.name;
        if (c.form == Clause::Form::Norm && c.body && !c.body->atomic) {
            struct R {
                std::map<int, std::string>& out;
                void walk(const ActionExpr& e) {
                    if (e.atomic) return;
                    for (const auto& na : e.children) {
                        if (na.alias) out[*na.alias] = na.name;
                        walk(*na.expr);
                    }
                }
            } r{out};
            r.walk(*c.body);
        }
    });
    return out;
}

// ── satisfaction implications ───────────────────────────────────────────────

// A compound-bodied norm is satisfied once its refinement condition is met by
// the recorded leaf names: one child for Or, all children for And and Seq.
// The implications let analyses credit the parent name when only leaf names
// appear in S sets.
struct Implication {
    std::string name;
    RefinementKind refinement;
    std::vector<std::string> children;
};

inline std::vector<Implication> satisfaction_implications(const ContractDiagram& d) {
    std::vector<Implication> out;
    struct R {
        std::vector<Implication>& out;
        void walk(const std::string& parent, const ActionExpr& e) {
            if (e.atomic) return;
            Implication imp{parent, e.refinement, {}};
            for (const auto& na : e.children) imp.children.push_back(part_key(na));
            out.push_back(std::move(imp));
            for (const auto& na : e.children) walk(part_key(na), *na.expr);
        }
    } r{out};
    for_each_clause(d, [&](const Clause& c, bool) {
        if (c.form == Clause::Form::Norm && c.body) r.walk(clause_key(c), *c.body);
        if (c.form == Clause::Form::Composite) {
            Implication imp{clause_key(c), c.refinement, {}};
            for (const auto& ch : c.children)
                if (!permission_only(*ch)) imp.children.push_back(clause_key(*ch));
            if (!imp.children.empty()) out.push_back(std::move(imp));
        }
    });
    return out;
}

// Closes a satisfied-name set under the implications (fixpoint).
inline std::set<std::string> close_satisfaction(const std::vector<Implication>& imps,
                                                std::set<std::string> s) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& imp : imps) {
            if (s.count(imp.name)) continue;
            bool met = false;
            if (imp.refinement == RefinementKind::Or) {
                for (const auto& ch : imp.children)
                    if (s.count(ch)) { met = true; break; }
            } else {
                met = true;
                for (const auto& ch : imp.children)
                    if (!s.count(ch)) { met = false; break; }
            }
            if (met) {
                s.insert(imp.name);
                changed = true;
            }
        }
    }
    return s;
}

// ── validation ──────────────────────────────────────────────────────────────

struct Finding {
    enum class Kind {
        DuplicateClauseName,
        DuplicateAlias,
        DuplicateClock,
        UnresolvedReparation,
        ReparationCycle,
        PermissionWithReparation,
        UndeclaredVariable,
        UndeclaredAction,
        UndeclaredAgent,
        CompositeArity,
        EmptyBody,
        CompoundProhibition,
        UnsupportedBody,
    };

    Kind kind;
    std::string clause;
    std::string message;
};

inline const char* to_string(Finding::Kind k) {
    switch (k) {
        case Finding::Kind::DuplicateClauseName: return "DuplicateClauseName";
        case Finding::Kind::DuplicateAlias: return "DuplicateAlias";
        case Finding::Kind::DuplicateClock: return "DuplicateClock";
        case Finding::Kind::UnresolvedReparation: return "UnresolvedReparation";
        case Finding::Kind::ReparationCycle: return "ReparationCycle";
        case Finding::Kind::PermissionWithReparation: return "PermissionWithReparation";
        case Finding::Kind::UndeclaredVariable: return "UndeclaredVariable";
        case Finding::Kind::UndeclaredAction: return "UndeclaredAction";
        case Finding::Kind::UndeclaredAgent: return "UndeclaredAgent";
        case Finding::Kind::CompositeArity: return "CompositeArity";
        case Finding::Kind::EmptyBody: return "EmptyBody";
        case Finding::Kind::CompoundProhibition: return "CompoundProhibition";
        case Finding::Kind::UnsupportedBody: return "UnsupportedBody";
    }
    return "?";
}

struct ValidationReport {
    std::vector<Finding> findings;

    bool ok() const { return findings.empty(); }
};

inline ValidationReport validate_diagram(const ContractDiagram& d) {
    ValidationReport rep;
    auto add = [&](Finding::Kind k, const std::string& clause, std::string msg) {
        rep.findings.push_back({k, clause, std::move(msg)});
    };

    if (!d.root) {
        add(Finding::Kind::EmptyBody, "", "contract has no root clause");
        return rep;
    }

    std::set<std::string> names;
    std::set<int> aliases;
    std::set<std::string> clocks;
    auto check_name = [&](const std::string& n, const std::optional<int>& alias) {
        if (!names.insert(n).second)
            add(Finding::Kind::DuplicateClauseName, n, "clause name '" + n + "' appears twice");
        if (alias && !aliases.insert(*alias).second)
            add(Finding::Kind::DuplicateAlias, n,
                "alias " + std::to_string(*alias) + " appears twice");
    };
    auto check_guard = [&](const Clause& c) {
        std::vector<std::string> used;
        collect_vars(c.guard, used);
        for (const auto& v : used)
            if (d.vars.index_of(v) < 0)
                add(Finding::Kind::UndeclaredVariable, c.name,
                    "guard of '" + c.name + "' uses undeclared variable '" + v + "'");
    };
    auto check_body = [&](const Clause& c, const ActionExpr& e, auto&& self) -> void {
        if (e.atomic) {
            bool declared = std::find(d.declared_actions.begin(), d.declared_actions.end(),
                                      e.action) != d.declared_actions.end();
            if (!declared)
                add(Finding::Kind::UndeclaredAction, c.name,
                    "action '" + e.action + "' in '" + c.name + "' is not declared");
            return;
        }
        if (e.children.size() < 2)
            add(Finding::Kind::CompositeArity, c.name,
                "refinement in '" + c.name + "' needs at least two parts");
        for (const auto& na : e.children) {
            check_name(na.name, na.alias);
            self(c, *na.expr, self);
        }
    };

    for_each_clause(d, [&](const Clause& c, bool) {
        check_name(c.name, c.alias);
        check_guard(c);
        if (c.window && !clocks.insert(c.window->clock).second)
            add(Finding::Kind::DuplicateClock, c.name,
                "clock '" + c.window->clock + "' is used by two clauses");
        if (c.form == Clause::Form::Norm) {
            if (!c.agent.empty() &&
                std::find(d.agents.begin(), d.agents.end(), c.agent) == d.agents.end())
                add(Finding::Kind::UndeclaredAgent, c.name,
                    "agent '" + c.agent + "' of '" + c.name + "' is not declared");
            if (!c.body) {
                add(Finding::Kind::EmptyBody, c.name, "norm '" + c.name + "' has no body");
            } else {
                check_body(c, *c.body, check_body);
                if (c.kind == NormKind::Prohibition && !c.body->atomic)
                    add(Finding::Kind::CompoundProhibition, c.name,
                        "prohibition '" + c.name + "' needs an atomic action");
                // Interleaved parts step through fixed action sequences, so an
                // and-refined body only admits atomic or seq-of-atomic parts.
                struct B {
                    ValidationReport& rep;
                    const Clause& c;
                    void walk(const ActionExpr& e, bool under_and) {
                        if (e.atomic) return;
                        if (under_and && e.refinement != RefinementKind::Seq) {
                            rep.findings.push_back(
                                {Finding::Kind::UnsupportedBody, c.name,
                                 "part of an 'and' refinement in '" + c.name +
                                     "' must be an action or a seq of actions"});
                            return;
                        }
                        for (const auto& na : e.children)
                            walk(*na.expr,
                                 under_and || e.refinement == RefinementKind::And);
                    }
                } b{rep, c};
                b.walk(*c.body, false);
            }
            if (c.reparation) {
                if (c.kind == NormKind::Permission)
                    add(Finding::Kind::PermissionWithReparation, c.name,
                        "permission '" + c.name + "' cannot carry a reparation");
                if (!c.reparation->is_inline() && !d.find_reparation(c.reparation->ref))
                    add(Finding::Kind::UnresolvedReparation, c.name,
                        "reparation '" + c.reparation->ref + "' of '" + c.name +
                            "' is not defined");
            }
        } else {
            if (c.children.size() < 2)
                add(Finding::Kind::CompositeArity, c.name,
                    "composite '" + c.name + "' needs at least two children");
        }
    });

    // A named reparation definition must not reach itself through further
    // reparation references.
    for (const auto& [ref, def] : d.reparation_defs) {
        std::set<std::string> visiting{ref};
        struct C {
            const ContractDiagram& d;
            std::set<std::string>& visiting;
            bool cycle = false;

            void walk(const Clause* c) {
                if (!c || cycle) return;
                if (c->form == Clause::Form::Composite) {
                    for (const auto& ch : c->children) walk(ch.get());
                    return;
                }
                if (!c->reparation) return;
                if (c->reparation->is_inline()) {
                    walk(c->reparation->inline_clause.get());
                } else {
                    if (visiting.count(c->reparation->ref)) {
                        cycle = true;
                        return;
                    }
                    visiting.insert(c->reparation->ref);
                    walk(d.find_reparation(c->reparation->ref));
                    visiting.erase(c->reparation->ref);
                }
            }
        } chk{d, visiting};
        chk.walk(def.get());
        if (chk.cycle)
            add(Finding::Kind::ReparationCycle, ref,
                "reparation '" + ref + "' reaches itself");
    }

    return rep;
}

// ── structural equality ─────────────────────────────────────────────────────

inline bool structurally_equal(const ActionExpr& a, const ActionExpr& b) {
    if (a.atomic != b.atomic) return false;
    if (a.atomic) return a.action == b.action;
    if (a.refinement != b.refinement || a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (a.children[i].name != b.children[i].name) return false;
        if (a.children[i].alias != b.children[i].alias) return false;
        if (!structurally_equal(*a.children[i].expr, *b.children[i].expr)) return false;
    }
    return true;
}

inline bool structurally_equal(const Clause& a, const Clause& b);

inline bool structurally_equal(const Reparation& a, const Reparation& b) {
    if (a.is_inline() != b.is_inline()) return false;
    if (a.is_inline()) return structurally_equal(*a.inline_clause, *b.inline_clause);
    return a.ref == b.ref;
}

inline bool structurally_equal(const Clause& a, const Clause& b) {
    if (a.form != b.form || a.name != b.name || a.alias != b.alias || a.agent != b.agent)
        return false;
    if (!structurally_equal(a.guard, b.guard)) return false;
    if (a.window != b.window) return false;
    if (a.form == Clause::Form::Norm) {
        if (a.kind != b.kind) return false;
        if (static_cast<bool>(a.body) != static_cast<bool>(b.body)) return false;
        if (a.body && !structurally_equal(*a.body, *b.body)) return false;
        if (a.reparation.has_value() != b.reparation.has_value()) return false;
        if (a.reparation && !structurally_equal(*a.reparation, *b.reparation)) return false;
        return true;
    }
    if (a.refinement != b.refinement || a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurally_equal(*a.children[i], *b.children[i])) return false;
    return true;
}

inline bool structurally_equal(const ContractDiagram& a, const ContractDiagram& b) {
    if (a.name != b.name || a.agents != b.agents ||
        a.declared_actions != b.declared_actions)
        return false;
    if (a.vars.decls().size() != b.vars.decls().size()) return false;
    for (std::size_t i = 0; i < a.vars.decls().size(); ++i) {
        if (a.vars.decls()[i].name != b.vars.decls()[i].name) return false;
        if (a.vars.decls()[i].values != b.vars.decls()[i].values) return false;
    }
    if (static_cast<bool>(a.root) != static_cast<bool>(b.root)) return false;
    if (a.root && !structurally_equal(*a.root, *b.root)) return false;
    if (a.reparation_defs.size() != b.reparation_defs.size()) return false;
    for (std::size_t i = 0; i < a.reparation_defs.size(); ++i) {
        if (a.reparation_defs[i].first != b.reparation_defs[i].first) return false;
        if (!structurally_equal(*a.reparation_defs[i].second, *b.reparation_defs[i].second))
            return false;
    }
    return true;
}

}  // namespace cocheck
