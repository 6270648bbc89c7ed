#pragma once

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diagram.hpp"
#include "network.hpp"

namespace cocheck {

struct CompileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Result of compiling a contract: the decorated network plus the bookkeeping
// analyses and tools need to relate it back to the diagram.
struct CompilationUnit {
    Network network;
    ContractDiagram diagram;
    std::map<std::string, int> clause_clock;  // clause key -> clock index
    std::vector<std::pair<std::string, std::string>> channels;  // begin/end pairs
    int default_horizon = 0;
};

namespace compile_detail {

// Active window: the clause's clock must stay within bound for its actions to
// count. Enclosing composite windows stack on top of a norm's own.
struct Window {
    int clock = 0;
    int bound = 0;
};

// Decoration context threaded along one control path of the automaton under
// construction. `resolve_here` lists violated norms repaired as soon as the
// clause currently being compiled completes.
struct Ctx {
    ClauseSet V, S, P;
    std::vector<Window> windows;
    bool in_reparation = false;
    std::vector<std::string> resolve_here;
};

// A pending edge whose target node has not been materialized yet. Completion
// callbacks receive the plan and create the target, so decoration edits made
// by outer scopes land on the completing node itself.
struct Plan {
    int src = 0;
    ClockConstraint guard;
    BoolExprPtr data_guard;
    ActionLabel label;
    std::vector<int> resets;
    bool urgent = false;
};

using Cont = std::function<void(Plan, Ctx)>;

// Materializes the next wait node given its invariant and decoration context.
using WaitSource = std::function<int(const ClockConstraint&, const Ctx&)>;

class Builder {
public:
    Builder(const ContractDiagram& d, const std::map<std::string, std::string>& env)
        : d_(d), env_(env) {}

    CompilationUnit build() {
        check_env();
        for (const auto& decl : d_.vars.decls())
            if (!env_.count(decl.name)) net_.vars.declare(decl.name, decl.values);

        TimedAutomaton& root = aut_.emplace_back();
        root.name = "A0";
        Ctx ctx;
        int entry = new_node(root, {}, ctx);
        root.initial = entry;
        compile_clause(root, *d_.root, entry, ctx, [this, &root](Plan p, Ctx c) {
            int f = new_node(root, {}, c, true);
            add_edge(root, p, f);
        });

        net_.automata.assign(aut_.begin(), aut_.end());
        NormIndex ix = norm_index(d_);
        ContractInfo info;
        info.CN = ix.CN;
        info.CP = ix.CP;
        info.aliases = alias_map(d_);
        for (const auto& imp : satisfaction_implications(d_))
            info.implications.push_back(
                {imp.name, imp.refinement == RefinementKind::Or ? "or" : "all", imp.children});
        net_.contract = info;

        std::set<std::string> on_edges;
        for (const auto& a : net_.automata)
            for (const auto& e : a.edges)
                if (e.label.kind == ActionLabel::Kind::Internal ||
                    e.label.kind == ActionLabel::Kind::Complement)
                    on_edges.insert(e.label.name);
        for (const auto& act : d_.declared_actions)
            if (!on_edges.count(act)) net_.extra_alphabet.push_back(act);

        check_network(net_);
        for (const auto& w : decoration_warnings(net_))
            throw CompileError("internal decoration defect: " + w);

        unit_.network = net_;
        unit_.diagram = d_;
        unit_.default_horizon = sufficient_horizon(net_);
        return unit_;
    }

private:
    const ContractDiagram& d_;
    std::map<std::string, std::string> env_;
    Network net_;
    CompilationUnit unit_;
    std::deque<TimedAutomaton> aut_;  // stable references while spawning
    int next_spawn_ = 1;
    const Clause* site_ = nullptr;  // reparation site, for spawn sharing
    std::map<std::pair<const Clause*, const Clause*>,
             std::vector<std::pair<std::string, std::string>>>
        spawned_;

    // ── plumbing ────────────────────────────────────────────────────────────

    void check_env() {
        for (const auto& [var, val] : env_) {
            int v = d_.vars.index_of(var);
            if (v < 0) throw CompileError("binding for undeclared variable '" + var + "'");
            if (d_.vars.value_index(v, val) < 0)
                throw CompileError("variable '" + var + "' has no value '" + val + "'");
        }
    }

    int new_node(TimedAutomaton& a, ClockConstraint inv, const Ctx& c, bool final_node = false) {
        Node n;
        n.id = static_cast<int>(a.nodes.size());
        n.invariant = std::move(inv);
        n.V = c.V;
        n.S = c.S;
        n.P = c.P;
        n.is_final = final_node;
        a.nodes.push_back(std::move(n));
        return a.nodes.back().id;
    }

    void add_edge(TimedAutomaton& a, const Plan& p, int dst) {
        a.edges.push_back({p.src, dst, p.guard, p.data_guard, p.label, p.resets, p.urgent});
    }

    std::string fresh_channel(const std::string& want) {
        std::string name = want;
        for (int n = 2; net_.has_channel(name); ++n) name = want + "_" + std::to_string(n);
        net_.channels.push_back(name);
        net_.hidden_channels.insert(name);
        return name;
    }

    static Ctx resolved(Ctx c) {
        for (const auto& n : c.resolve_here) {
            c.V.erase(n);
            c.S.insert(n);
        }
        c.resolve_here.clear();
        return c;
    }

    static ClockConstraint act_guard(const std::vector<Window>& ws) {
        ClockConstraint g;
        for (const auto& w : ws) g.add(w.clock, ClockAtom::Op::Le, w.bound);
        return g;
    }

    static ClockConstraint wait_invariant(const std::vector<Window>& ws) {
        ClockConstraint g;
        for (const auto& w : ws) g.add(w.clock, ClockAtom::Op::Le, w.bound + 1);
        return g;
    }

    // ── clauses ─────────────────────────────────────────────────────────────

    void compile_clause(TimedAutomaton& a, const Clause& c, int entry, Ctx ctx,
                        const Cont& cont) {
        // Completion restores the enclosing scope before continuing.
        Cont done = [cont, outer_w = ctx.windows, outer_r = ctx.in_reparation](Plan p, Ctx c2) {
            c2.windows = outer_w;
            c2.in_reparation = outer_r;
            cont(std::move(p), std::move(c2));
        };

        BoolExprPtr g = c.guard ? substitute(c.guard, env_) : nullptr;
        if (g && g->kind == BoolExpr::Kind::False) {
            done({entry, {}, nullptr, ActionLabel::tau(), {}, true}, resolved(ctx));
            return;
        }
        if (g && g->is_true()) g = nullptr;
        if (g) done({entry, {}, BoolExpr::mk_not(g), ActionLabel::tau(), {}, true}, resolved(ctx));

        Ctx inner = ctx;
        std::vector<int> resets;
        if (c.window) {
            int ci = net_.add_clock(c.window->clock);
            unit_.clause_clock[clause_key(c)] = ci;
            inner.windows.push_back({ci, c.window->bound});
            resets.push_back(ci);
        }

        if (c.form == Clause::Form::Norm) {
            compile_norm(a, c, entry, std::move(inner), ctx.windows, g, resets, done);
            return;
        }
        switch (c.refinement) {
            case RefinementKind::Seq:
                compile_seq(a, c, entry, std::move(inner), g, resets, done);
                return;
            case RefinementKind::Or:
                compile_or(a, c, entry, std::move(inner), g, resets, done);
                return;
            case RefinementKind::And:
                compile_and(a, c, entry, std::move(inner), g, resets, done);
                return;
        }
    }

    void compile_seq(TimedAutomaton& a, const Clause& c, int entry, Ctx inner, BoolExprPtr g,
                     const std::vector<int>& resets, const Cont& done) {
        auto pending = inner.resolve_here;
        int start = entry;
        if (g || !resets.empty()) {
            Ctx hop = inner;
            start = new_node(a, {}, hop);
            add_edge(a, {entry, {}, g, ActionLabel::tau(), resets, true}, start);
        }
        std::function<void(std::size_t, int, Ctx)> step = [&](std::size_t i, int at, Ctx cx) {
            bool last = i + 1 == c.children.size();
            cx.resolve_here = last ? pending : std::vector<std::string>{};
            Cont next = last ? done : Cont([&, i](Plan p, Ctx c2) {
                int nx = new_node(a, {}, c2);
                add_edge(a, p, nx);
                step(i + 1, nx, std::move(c2));
            });
            compile_clause(a, *c.children[i], at, std::move(cx), next);
        };
        step(0, start, inner);
    }

    void compile_or(TimedAutomaton& a, const Clause& c, int entry, Ctx inner, BoolExprPtr g,
                    const std::vector<int>& resets, const Cont& done) {
        for (const auto& child : c.children) {
            int ce = new_node(a, {}, inner);
            add_edge(a, {entry, {}, g, ActionLabel::tau(), resets, true}, ce);
            compile_clause(a, *child, ce, inner, done);
        }
    }

    void compile_and(TimedAutomaton& a, const Clause& c, int entry, Ctx inner, BoolExprPtr g,
                     const std::vector<int>& resets, const Cont& done) {
        auto pending = inner.resolve_here;
        auto key = std::make_pair(&c, site_);
        if (!spawned_.count(key)) {
            std::vector<std::pair<std::string, std::string>> chans;
            for (std::size_t j = 1; j < c.children.size(); ++j) {
                std::string suffix = c.name + (j > 1 ? "_" + std::to_string(j + 1) : "");
                std::string begin = fresh_channel("begin_" + suffix);
                std::string end = fresh_channel("end_" + suffix);
                chans.emplace_back(begin, end);
                unit_.channels.emplace_back(begin, end);

                TimedAutomaton& sp = aut_.emplace_back();
                sp.name = "A" + std::to_string(next_spawn_++);
                Ctx sc;
                sc.windows = inner.windows;
                sc.in_reparation = inner.in_reparation;
                int idle = new_node(sp, {}, sc);
                sp.initial = idle;
                int go = new_node(sp, {}, sc);
                add_edge(sp, {idle, {}, nullptr, ActionLabel::input(begin), {}, true}, go);
                auto finished = std::make_shared<bool>(false);
                compile_clause(sp, *c.children[j], go, sc,
                               [this, &sp, end, finished](Plan p, Ctx c2) {
                                   *finished = true;
                                   int t = new_node(sp, {}, c2);
                                   add_edge(sp, p, t);
                                   int f = new_node(sp, {}, c2, true);
                                   add_edge(sp, {t, {}, nullptr, ActionLabel::output(end), {}, true},
                                            f);
                               });
                // A child that can never complete (an unwindowed prohibition)
                // still gets its half of the handshake, unreachable.
                if (!*finished) {
                    int t = new_node(sp, {}, sc);
                    int f = new_node(sp, {}, sc, true);
                    add_edge(sp, {t, {}, nullptr, ActionLabel::output(end), {}, true}, f);
                }
            }
            spawned_[key] = std::move(chans);
        }
        const auto& chans = spawned_[key];

        int at = entry;
        for (std::size_t j = 0; j < chans.size(); ++j) {
            int nx = new_node(a, {}, inner);
            add_edge(a,
                     {at, {}, j == 0 ? g : nullptr, ActionLabel::output(chans[j].first),
                      j == 0 ? resets : std::vector<int>{}, true},
                     nx);
            at = nx;
        }

        bool optional_spawns = true;
        for (std::size_t j = 1; j < c.children.size(); ++j)
            if (!permission_only(*c.children[j])) optional_spawns = false;

        Ctx ic = inner;
        ic.resolve_here = optional_spawns ? pending : std::vector<std::string>{};
        auto finish_sync = [this, &a, &chans, pending, optional_spawns, done](int x, Ctx c2) {
            Ctx fin = c2;
            if (!optional_spawns) {
                fin.resolve_here = pending;
                fin = resolved(std::move(fin));
            }
            for (std::size_t j = 0; j + 1 < chans.size(); ++j) {
                int nx = new_node(a, {}, c2);
                add_edge(a,
                         {x, {}, nullptr, ActionLabel::input(chans[j].second), {}, true},
                         nx);
                x = nx;
            }
            done({x, {}, nullptr, ActionLabel::input(chans.back().second), {}, true}, fin);
        };
        auto finished = std::make_shared<bool>(false);
        compile_clause(a, *c.children[0], at, std::move(ic),
                       [this, &a, finish_sync, finished](Plan p, Ctx c2) {
                           *finished = true;
                           int x = new_node(a, {}, c2);
                           add_edge(a, p, x);
                           finish_sync(x, std::move(c2));
                       });
        // The inline part may never complete either; keep the input half of
        // every end handshake present.
        if (!*finished) finish_sync(new_node(a, {}, inner), inner);
    }

    // ── norms ───────────────────────────────────────────────────────────────

    void compile_norm(TimedAutomaton& a, const Clause& c, int entry, Ctx inner,
                      const std::vector<Window>& outer_windows, BoolExprPtr g,
                      const std::vector<int>& resets, const Cont& done) {
        WaitSource init = [this, &a, entry, g, resets](const ClockConstraint& inv, const Ctx& cx) {
            int w = new_node(a, inv, cx);
            add_edge(a, {entry, {}, g, ActionLabel::tau(), resets, true}, w);
            return w;
        };
        Cont norm_complete = [done](Plan p, Ctx c2) { done(std::move(p), resolved(std::move(c2))); };

        if (c.kind == NormKind::Prohibition) {
            compile_forbid(a, c, init, std::move(inner), outer_windows, norm_complete, done);
            return;
        }

        std::vector<std::string> credits;
        if (c.body->atomic) credits.push_back(clause_key(c));
        compile_body(a, c, *c.body, init, std::move(inner), outer_windows, credits,
                     norm_complete, norm_complete, done);
    }

    // Prohibitions watch a single action: performing it inside the window
    // violates, reaching the window bound without it releases the norm.
    void compile_forbid(TimedAutomaton& a, const Clause& c, const WaitSource& src, Ctx ctx,
                        const std::vector<Window>& outer_windows, const Cont& norm_complete,
                        const Cont& done) {
        std::string key = clause_key(c);
        const std::string& act = c.body->action;

        ClockConstraint inv;
        bool own = c.window.has_value();
        for (std::size_t i = 0; i < ctx.windows.size(); ++i) {
            const auto& w = ctx.windows[i];
            bool last = i + 1 == ctx.windows.size();
            inv.add(w.clock, ClockAtom::Op::Le, own && last ? w.bound : w.bound + 1);
        }
        int wn = src(inv, ctx);

        ClockConstraint vg;
        bool violable = true;
        for (std::size_t i = 0; i < ctx.windows.size(); ++i) {
            const auto& w = ctx.windows[i];
            bool last = i + 1 == ctx.windows.size();
            int limit = own && last ? w.bound - 1 : w.bound;
            if (limit < 0) violable = false;
            vg.add(w.clock, ClockAtom::Op::Le, limit);
        }
        if (violable)
            violate(a, c, {wn, vg, nullptr, ActionLabel::internal(act), {}, false}, ctx,
                    outer_windows, done);

        for (std::size_t i = 0; i < ctx.windows.size(); ++i) {
            const auto& w = ctx.windows[i];
            bool last = i + 1 == ctx.windows.size();
            ClockConstraint rg;
            rg.add(w.clock, ClockAtom::Op::Eq, own && last ? w.bound : w.bound + 1);
            Ctx c2 = ctx;
            c2.S.insert(key);
            norm_complete({wn, rg, nullptr, ActionLabel::complement(act), {}, false}, c2);
        }
    }

    // Violation target: record the norm in V unless it sits inside a
    // reparation without one of its own, then wire the reparation or stop at
    // a breach node.
    void violate(TimedAutomaton& a, const Clause& c, const Plan& p, Ctx at_wait,
                 const std::vector<Window>& outer_windows, const Cont& done) {
        std::string key = clause_key(c);
        Ctx vc = at_wait;
        if (!(vc.in_reparation && !c.reparation)) vc.V.insert(key);
        int v = new_node(a, {}, vc);
        add_edge(a, p, v);
        if (!c.reparation) return;

        const Clause* rep = c.reparation->is_inline() ? c.reparation->inline_clause.get()
                                                      : d_.find_reparation(c.reparation->ref);
        Ctx rc = vc;
        rc.windows = outer_windows;
        rc.in_reparation = true;
        rc.resolve_here.push_back(key);
        const Clause* prev = site_;
        site_ = &c;
        compile_clause(a, *rep, v, std::move(rc), done);
        site_ = prev;
    }

    // ── norm bodies ─────────────────────────────────────────────────────────

    // Compiles an obligation or permission body expression. `credits` are
    // recorded in S (or P) on the edge completing the expression; `complete`
    // continues after it — into the next seq part, or out of the norm when the
    // expression is the whole body. Window boundaries emit the norm-level
    // timeout or expiry from every wait node.
    void compile_body(TimedAutomaton& a, const Clause& c, const ActionExpr& e,
                      const WaitSource& src, Ctx ctx, const std::vector<Window>& outer_windows,
                      std::vector<std::string> credits, const Cont& complete,
                      const Cont& norm_complete, const Cont& done) {
        if (e.atomic) {
            int wn = src(wait_invariant(ctx.windows), ctx);
            boundary_edges(a, c, wn, e.action, ctx, outer_windows, norm_complete, done);
            Ctx c2 = credit(c, ctx, credits);
            complete(
                {wn, act_guard(ctx.windows), nullptr, ActionLabel::internal(e.action), {}, false},
                c2);
            return;
        }
        switch (e.refinement) {
            case RefinementKind::Or: {
                int j = src(ClockConstraint{}, ctx);
                for (const auto& na : e.children) {
                    WaitSource part = [this, &a, j](const ClockConstraint& inv, const Ctx& cx) {
                        int w = new_node(a, inv, cx);
                        add_edge(a, {j, {}, nullptr, ActionLabel::tau(), {}, true}, w);
                        return w;
                    };
                    auto cr = credits;
                    cr.push_back(part_key(na));
                    compile_body(a, c, *na.expr, part, ctx, outer_windows, cr, complete,
                                 norm_complete, done);
                }
                return;
            }
            case RefinementKind::Seq: {
                std::function<void(std::size_t, const WaitSource&, Ctx)> step =
                    [&](std::size_t i, const WaitSource& s, Ctx cx) {
                        const auto& na = e.children[i];
                        bool last = i + 1 == e.children.size();
                        std::vector<std::string> cr{part_key(na)};
                        if (last) cr.insert(cr.end(), credits.begin(), credits.end());
                        Cont part_done =
                            last ? complete : Cont([&, i](Plan p, Ctx c2) {
                                WaitSource nxt = [this, &a, p](const ClockConstraint& inv,
                                                               const Ctx& cc) {
                                    int w = new_node(a, inv, cc);
                                    add_edge(a, p, w);
                                    return w;
                                };
                                step(i + 1, nxt, std::move(c2));
                            });
                        compile_body(a, c, *na.expr, s, std::move(cx), outer_windows, cr,
                                     part_done, norm_complete, done);
                    };
                step(0, src, ctx);
                return;
            }
            case RefinementKind::And: {
                compile_interleaving(a, c, e, src, std::move(ctx), outer_windows,
                                     std::move(credits), complete, norm_complete, done);
                return;
            }
        }
    }

    // ── interleaved parts ───────────────────────────────────────────────────

    struct FlatLeaf {
        std::string action;
        std::vector<std::string> credits;
    };

    static std::vector<FlatLeaf> flatten_part(const NamedAction& na) {
        std::vector<FlatLeaf> out;
        struct W {
            std::vector<FlatLeaf>& out;
            void go(const ActionExpr& e) {
                if (e.atomic) {
                    out.push_back({e.action, {}});
                    return;
                }
                for (const auto& ch : e.children) {
                    go(*ch.expr);
                    out.back().credits.push_back(part_key(ch));
                }
            }
        } w{out};
        w.go(*na.expr);
        out.back().credits.push_back(part_key(na));
        return out;
    }

    void compile_interleaving(TimedAutomaton& a, const Clause& c, const ActionExpr& e,
                              const WaitSource& src, Ctx ctx,
                              const std::vector<Window>& outer_windows,
                              std::vector<std::string> credits, const Cont& complete,
                              const Cont& norm_complete, const Cont& done) {
        std::vector<std::vector<FlatLeaf>> parts;
        for (const auto& na : e.children) parts.push_back(flatten_part(na));

        std::function<void(const WaitSource&, std::vector<std::size_t>, Ctx)> walk =
            [&](const WaitSource& s, std::vector<std::size_t> prog, Ctx cx) {
                int wn = s(wait_invariant(cx.windows), cx);
                std::string first_pending;
                for (std::size_t j = 0; j < parts.size(); ++j)
                    if (prog[j] < parts[j].size()) {
                        first_pending = parts[j][prog[j]].action;
                        break;
                    }
                boundary_edges(a, c, wn, first_pending, cx, outer_windows, norm_complete, done);

                for (std::size_t j = 0; j < parts.size(); ++j) {
                    if (prog[j] >= parts[j].size()) continue;
                    const FlatLeaf& leaf = parts[j][prog[j]];
                    Plan p{wn, act_guard(cx.windows), nullptr,
                           ActionLabel::internal(leaf.action), {}, false};
                    Ctx c2 = credit(c, cx, leaf.credits);
                    auto prog2 = prog;
                    prog2[j]++;
                    bool all_done = true;
                    for (std::size_t k = 0; k < parts.size(); ++k)
                        if (prog2[k] < parts[k].size()) all_done = false;
                    if (all_done) {
                        complete(p, credit(c, c2, credits));
                    } else {
                        WaitSource nxt = [this, &a, p](const ClockConstraint& inv, const Ctx& cc) {
                            int w = new_node(a, inv, cc);
                            add_edge(a, p, w);
                            return w;
                        };
                        walk(nxt, std::move(prog2), c2);
                    }
                }
            };
        walk(src, std::vector<std::size_t>(parts.size(), 0), std::move(ctx));
    }

    // ── shared pieces ───────────────────────────────────────────────────────

    Ctx credit(const Clause& c, Ctx ctx, const std::vector<std::string>& names) {
        auto& into = c.kind == NormKind::Permission ? ctx.P : ctx.S;
        for (const auto& n : names) into.insert(n);
        return ctx;
    }

    // Per-window boundary from a wait node: obligations time out on the
    // complement of the awaited action, permissions silently expire, and an
    // unbounded permission may be declined at any moment.
    void boundary_edges(TimedAutomaton& a, const Clause& c, int wn, const std::string& next_act,
                        const Ctx& ctx, const std::vector<Window>& outer_windows,
                        const Cont& norm_complete, const Cont& done) {
        for (const auto& w : ctx.windows) {
            ClockConstraint at_bound;
            at_bound.add(w.clock, ClockAtom::Op::Eq, w.bound + 1);
            if (c.kind == NormKind::Obligation) {
                violate(a, c,
                        {wn, at_bound, nullptr, ActionLabel::complement(next_act), {}, false}, ctx,
                        outer_windows, done);
            } else {
                norm_complete({wn, at_bound, nullptr, ActionLabel::tau(), {}, true}, ctx);
            }
        }
        if (c.kind == NormKind::Permission && ctx.windows.empty())
            norm_complete({wn, {}, nullptr, ActionLabel::tau(), {}, false}, ctx);
    }
};

}  // namespace compile_detail

// Compiles a validated diagram into its decorated network. `env` pins guard
// variables to fixed values; remaining variables stay symbolic.
inline CompilationUnit compile_contract(const ContractDiagram& d,
                                        const std::map<std::string, std::string>& env = {}) {
    ValidationReport rep = validate_diagram(d);
    if (!rep.ok()) {
        std::string msg = "invalid diagram:";
        for (const auto& f : rep.findings) msg += "\n  " + f.message;
        throw CompileError(msg);
    }
    compile_detail::Builder b(d, env);
    return b.build();
}

}  // namespace cocheck
