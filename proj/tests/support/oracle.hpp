#pragma once

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cocheck/diagram.hpp"
#include "cocheck/trace.hpp"
#include "cocheck/trace_eval.hpp"

// Reference interpreter for contract diagrams, independent of the compiler.
// Configurations carry absolute window deadlines read directly off the AST,
// one configuration per variable assignment; silent progress is closed
// instant by instant. Acceptance and the V/S/P families at every prefix
// boundary must agree with a run of the compiled network.

namespace refsem {

using cocheck::ActionExpr;
using cocheck::Assignment;
using cocheck::Clause;
using cocheck::ClauseSet;
using cocheck::ContractDiagram;
using cocheck::FamilyTriple;
using cocheck::NormKind;
using cocheck::RefinementKind;
using cocheck::TimedTrace;

constexpr int far_away = INT_MAX / 4;

// ── body positions ──────────────────────────────────────────────────────────

struct BodyState {
    const ActionExpr* e = nullptr;
    bool done = false;
    int choice = -1;     // Or: committed alternative
    std::size_t at = 0;  // Seq: current part
    std::vector<BodyState> subs;
};

// Every way an expression can start; committed Or choices split.
inline std::vector<BodyState> start_body(const ActionExpr& e) {
    BodyState b;
    b.e = &e;
    if (e.atomic) return {b};
    switch (e.refinement) {
        case RefinementKind::Or: {
            std::vector<BodyState> out;
            for (std::size_t j = 0; j < e.children.size(); ++j)
                for (auto& v : start_body(*e.children[j].expr)) {
                    BodyState c = b;
                    c.choice = static_cast<int>(j);
                    c.subs = {std::move(v)};
                    out.push_back(std::move(c));
                }
            return out;
        }
        case RefinementKind::Seq: {
            std::vector<BodyState> out;
            for (auto& v : start_body(*e.children[0].expr)) {
                BodyState c = b;
                c.subs.assign(e.children.size(), BodyState{});
                c.subs[0] = std::move(v);
                out.push_back(std::move(c));
            }
            return out;
        }
        case RefinementKind::And: {
            // Parts of an interleaving are seq trees of actions: no splits.
            for (const auto& na : e.children) b.subs.push_back(start_body(*na.expr).front());
            return {b};
        }
    }
    return {b};
}

// Leaves that may fire next. The path records interleaving-part choices.
inline void open_leaves(const BodyState& b, std::vector<int>& path,
                        std::vector<std::pair<std::string, std::vector<int>>>& out) {
    if (b.done) return;
    if (b.e->atomic) {
        out.emplace_back(b.e->action, path);
        return;
    }
    switch (b.e->refinement) {
        case RefinementKind::Or: open_leaves(b.subs[0], path, out); break;
        case RefinementKind::Seq: open_leaves(b.subs[b.at], path, out); break;
        case RefinementKind::And:
            for (std::size_t j = 0; j < b.subs.size(); ++j)
                if (!b.subs[j].done) {
                    path.push_back(static_cast<int>(j));
                    open_leaves(b.subs[j], path, out);
                    path.pop_back();
                }
            break;
    }
}

// The action a timeout complement names: the next leaf of the first
// unfinished part, in declaration order.
inline const std::string& next_expected(const BodyState& b) {
    if (b.e->atomic) return b.e->action;
    switch (b.e->refinement) {
        case RefinementKind::Or: return next_expected(b.subs[0]);
        case RefinementKind::Seq: return next_expected(b.subs[b.at]);
        case RefinementKind::And:
            for (const auto& s : b.subs)
                if (!s.done) return next_expected(s);
            break;
    }
    return b.e->action;
}

struct Advanced {
    BodyState state;
    std::vector<std::string> credits;  // part keys completed by this leaf
    bool completed = false;            // the whole expression finished
};

// Fire the leaf addressed by `path`. Splits when the next seq part opens
// with a choice.
inline std::vector<Advanced> fire_leaf(const BodyState& b, const std::vector<int>& path,
                                       std::size_t depth) {
    if (b.e->atomic) {
        Advanced a;
        a.state = b;
        a.state.done = true;
        a.completed = true;
        return {a};
    }
    std::vector<Advanced> out;
    switch (b.e->refinement) {
        case RefinementKind::Or:
            for (auto& r : fire_leaf(b.subs[0], path, depth)) {
                Advanced a;
                a.state = b;
                a.state.subs[0] = std::move(r.state);
                a.credits = std::move(r.credits);
                if (r.completed) {
                    a.credits.push_back(
                        part_key(b.e->children[static_cast<std::size_t>(b.choice)]));
                    a.state.done = true;
                    a.completed = true;
                }
                out.push_back(std::move(a));
            }
            break;
        case RefinementKind::Seq:
            for (auto& r : fire_leaf(b.subs[b.at], path, depth)) {
                Advanced a;
                a.state = b;
                a.state.subs[b.at] = std::move(r.state);
                a.credits = std::move(r.credits);
                if (!r.completed) {
                    out.push_back(std::move(a));
                    continue;
                }
                a.credits.push_back(part_key(b.e->children[b.at]));
                if (b.at + 1 == b.e->children.size()) {
                    a.state.done = true;
                    a.completed = true;
                    out.push_back(std::move(a));
                } else {
                    for (auto& v : start_body(*b.e->children[b.at + 1].expr)) {
                        Advanced s = a;
                        s.state.at = b.at + 1;
                        s.state.subs[b.at + 1] = std::move(v);
                        out.push_back(std::move(s));
                    }
                }
            }
            break;
        case RefinementKind::And: {
            auto j = static_cast<std::size_t>(path[depth]);
            for (auto& r : fire_leaf(b.subs[j], path, depth + 1)) {
                Advanced a;
                a.state = b;
                a.state.subs[j] = std::move(r.state);
                a.credits = std::move(r.credits);
                if (r.completed) a.credits.push_back(part_key(b.e->children[j]));
                a.completed = true;
                for (const auto& s : a.state.subs)
                    if (!s.done) a.completed = false;
                a.state.done = a.completed;
                out.push_back(std::move(a));
            }
            break;
        }
    }
    return out;
}

// ── configurations ──────────────────────────────────────────────────────────

enum class Ph { Entered, Active, Repairing, Done, Dead };

struct Item {
    const Clause* c = nullptr;
    int parent = -1;
    Ph ph = Ph::Entered;
    std::vector<int> anc;    // inherited window deadlines, absolute
    std::optional<int> own;  // own window deadline, absolute
    bool in_rep = false;
    std::vector<std::string> resolve;  // keys settled when this item completes
    BodyState body;
    std::vector<int> kids;
};

struct Config {
    Assignment assign = 0;
    ClauseSet V, S, P;
    std::vector<Item> items;
};

// Latest instant at which the norm's actions may fire.
inline int act_limit(const Item& it) {
    int m = it.own ? *it.own : far_away;
    for (int b : it.anc) m = std::min(m, b);
    return m;
}

// Instant of the obligation timeout / permission expiry, if any window binds.
inline std::optional<int> expiry(const Item& it) {
    int m = act_limit(it);
    if (m >= far_away) return std::nullopt;
    return m + 1;
}

// Instant at which a prohibition is released: its own window closes, or an
// enclosing one has just closed.
inline std::optional<int> release(const Item& it) {
    int m = it.own ? *it.own : far_away;
    for (int b : it.anc) m = std::min(m, b + 1);
    if (m >= far_away) return std::nullopt;
    return m;
}

inline std::string body_sig(const BodyState& b) {
    if (!b.e) return "-";
    std::ostringstream o;
    o << (b.done ? 'D' : 'o') << b.choice << ':' << b.at << '(';
    for (const auto& s : b.subs) o << body_sig(s) << ' ';
    o << ')';
    return o.str();
}

inline void item_sig(const Config& c, int i, std::ostringstream& o) {
    const Item& it = c.items[static_cast<std::size_t>(i)];
    o << it.c->name << '#' << static_cast<int>(it.ph) << '[';
    for (int b : it.anc) o << b << ' ';
    o << '|' << (it.own ? *it.own : -1) << ']' << (it.in_rep ? 'r' : '.');
    for (const auto& k : it.resolve) o << k << ',';
    o << body_sig(it.body) << '{';
    for (int k : it.kids) item_sig(c, k, o);
    o << '}';
}

inline std::string config_key(const Config& c) {
    std::ostringstream o;
    o << c.assign << ';';
    for (const auto& k : c.V) o << k << ' ';
    o << ';';
    for (const auto& k : c.S) o << k << ' ';
    o << ';';
    for (const auto& k : c.P) o << k << ' ';
    o << ';';
    if (!c.items.empty()) item_sig(c, 0, o);
    return o.str();
}

// ── the interpreter ─────────────────────────────────────────────────────────

class Interp {
public:
    explicit Interp(const ContractDiagram& d) : d_(&d) {}

    struct Run {
        bool accepted = false;
        std::size_t failed_event = 0;
        std::vector<FamilyTriple> families;
    };

    Run run(const TimedTrace& t) const {
        Run r;
        std::vector<Config> settled, all;
        for (Assignment a : d_->vars.all_assignments()) {
            Config c;
            c.assign = a;
            Item root;
            root.c = d_->root.get();
            c.items.push_back(std::move(root));
            settled.push_back(std::move(c));
        }
        int now = 0;
        close_instant(settled, all, now);
        r.families.push_back(project(all));
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (int d = 0; d < t[i].delay; ++d) {
                ++now;
                std::vector<Config> live;
                for (auto& c : settled)
                    if (survives(c, now)) live.push_back(std::move(c));
                settled = std::move(live);
                close_instant(settled, all, now);
            }
            std::vector<Config> fired;
            for (const auto& c : all)
                match_event(c, t[i].action.name, t[i].action.complement, now, fired);
            if (fired.empty()) {
                r.failed_event = i;
                return r;
            }
            settled = std::move(fired);
            close_instant(settled, all, now);
            r.families.push_back(project(all));
        }
        r.accepted = true;
        return r;
    }

private:
    const ContractDiagram* d_;

    static FamilyTriple project(const std::vector<Config>& all) {
        FamilyTriple f;
        for (const auto& c : all) {
            f.V.insert(c.V);
            f.S.insert(c.S);
            f.P.insert(c.P);
        }
        return f;
    }

    // A settled configuration outlives instant `now` unless a visible
    // deadline has just passed unanswered.
    static bool survives(const Config& c, int now) {
        for (const auto& it : c.items) {
            if (it.ph != Ph::Active || it.c->form != Clause::Form::Norm) continue;
            if (it.c->kind == NormKind::Obligation) {
                auto e = expiry(it);
                if (e && *e < now) return false;
            } else if (it.c->kind == NormKind::Prohibition) {
                auto e = release(it);
                if (e && *e < now) return false;
            }
        }
        return true;
    }

    static void apply_resolve(Config& c, std::vector<std::string> keys) {
        for (const auto& k : keys) {
            c.V.erase(k);
            c.S.insert(k);
        }
    }

    // Completion of item x, folded onto the edge that caused it. Interleaved
    // composites wait for their own synchronization step instead.
    void finish(Config& c, int x, int now) const {
        c.items[static_cast<std::size_t>(x)].ph = Ph::Done;
        notify(c, x, now);
    }

    void notify(Config& c, int x, int now) const {
        int p = c.items[static_cast<std::size_t>(x)].parent;
        if (p < 0) return;
        Item& pa = c.items[static_cast<std::size_t>(p)];
        if (pa.ph == Ph::Repairing) {
            pa.ph = Ph::Done;
            notify(c, p, now);
            return;
        }
        if (pa.c->form != Clause::Form::Composite) return;
        switch (pa.c->refinement) {
            case RefinementKind::Seq: {
                std::size_t k = pa.kids.size();
                if (k < pa.c->children.size()) {
                    std::vector<std::string> res;
                    if (k + 1 == pa.c->children.size()) {  // thread to the last part
                        res = std::move(pa.resolve);
                        pa.resolve.clear();
                    }
                    spawn_child(c, p, pa.c->children[k].get(), std::move(res), false);
                } else {
                    pa.ph = Ph::Done;
                    notify(c, p, now);
                }
                break;
            }
            case RefinementKind::Or:
                pa.ph = Ph::Done;
                notify(c, p, now);
                break;
            case RefinementKind::And:
                break;  // waits for its synchronization step
        }
    }

    // Create a child item in Entered phase; windows are inherited now, the
    // own window is stamped at activation.
    void spawn_child(Config& c, int parent, const Clause* cl, std::vector<std::string> res,
                     bool reparation) const {
        const Item& pa = c.items[static_cast<std::size_t>(parent)];
        Item it;
        it.c = cl;
        it.parent = parent;
        it.anc = pa.anc;
        if (!reparation && pa.own) it.anc.push_back(*pa.own);
        it.in_rep = reparation || pa.in_rep;
        it.resolve = std::move(res);
        int idx = static_cast<int>(c.items.size());
        c.items.push_back(std::move(it));
        c.items[static_cast<std::size_t>(parent)].kids.push_back(idx);
    }

    void violate(Config& c, int x, int now) const {
        Item& it = c.items[static_cast<std::size_t>(x)];
        std::string key = clause_key(*it.c);
        if (!(it.in_rep && !it.c->reparation)) c.V.insert(key);
        if (!it.c->reparation) {
            it.ph = Ph::Dead;
            return;
        }
        const Clause* rep = it.c->reparation->is_inline()
                                ? it.c->reparation->inline_clause.get()
                                : d_->find_reparation(it.c->reparation->ref);
        std::vector<std::string> res = std::move(it.resolve);
        it.resolve.clear();
        res.push_back(key);
        it.ph = Ph::Repairing;
        it.kids.clear();
        spawn_child(c, x, rep, std::move(res), true);
        (void)now;
    }

    // ── instant closure ──

    struct Step {
        enum class Kind { Activate, Expire, Skip, Sync } kind;
        int item;
    };

    std::vector<Step> ready_steps(const Config& c, int now) const {
        std::vector<Step> out;
        for (std::size_t i = 0; i < c.items.size(); ++i) {
            const Item& it = c.items[i];
            int ii = static_cast<int>(i);
            if (it.ph == Ph::Entered) {
                out.push_back({Step::Kind::Activate, ii});
            } else if (it.ph == Ph::Active && it.c->form == Clause::Form::Norm &&
                       it.c->kind == NormKind::Permission) {
                auto e = expiry(it);
                if (!e)
                    out.push_back({Step::Kind::Skip, ii});
                else if (*e == now)
                    out.push_back({Step::Kind::Expire, ii});
            } else if (it.ph == Ph::Active && it.c->form == Clause::Form::Composite &&
                       it.c->refinement == RefinementKind::And &&
                       it.kids.size() == it.c->children.size()) {
                bool all = true;
                for (int k : it.kids)
                    if (c.items[static_cast<std::size_t>(k)].ph != Ph::Done) all = false;
                if (all) out.push_back({Step::Kind::Sync, ii});
            }
        }
        return out;
    }

    static bool is_settled(const std::vector<Step>& steps) {
        for (const auto& s : steps)
            if (s.kind != Step::Kind::Skip) return false;
        return true;
    }

    std::vector<Config> apply_step(const Config& c0, const Step& s, int now) const {
        Config c = c0;
        Item& it = c.items[static_cast<std::size_t>(s.item)];
        if (s.kind != Step::Kind::Activate) {  // Expire, Skip, Sync
            apply_resolve(c, it.resolve);
            finish(c, s.item, now);
            return {std::move(c)};
        }
        // activation
        if (it.c->guard && !eval(*it.c->guard, d_->vars, c.assign)) {
            apply_resolve(c, it.resolve);
            finish(c, s.item, now);
            return {std::move(c)};
        }
        if (it.c->window) it.own = now + it.c->window->bound;
        it.ph = Ph::Active;
        if (it.c->form == Clause::Form::Norm) {
            if (it.c->kind == NormKind::Prohibition) return {std::move(c)};
            std::vector<Config> out;
            for (auto& v : start_body(*it.c->body)) {
                Config n = c;
                n.items[static_cast<std::size_t>(s.item)].body = std::move(v);
                out.push_back(std::move(n));
            }
            return out;
        }
        switch (it.c->refinement) {
            case RefinementKind::Seq: {
                std::vector<std::string> res;  // threaded to the last part later
                spawn_child(c, s.item, it.c->children[0].get(), std::move(res), false);
                return {std::move(c)};
            }
            case RefinementKind::Or: {
                std::vector<Config> out;
                for (const auto& ch : it.c->children) {
                    Config n = c;
                    Item& ni = n.items[static_cast<std::size_t>(s.item)];
                    std::vector<std::string> res = std::move(ni.resolve);
                    ni.resolve.clear();
                    spawn_child(n, s.item, ch.get(), std::move(res), false);
                    out.push_back(std::move(n));
                }
                return out;
            }
            case RefinementKind::And: {
                const Clause* cl = it.c;  // spawning reallocates items
                bool optional = true;
                for (std::size_t j = 1; j < cl->children.size(); ++j)
                    if (!permission_only(*cl->children[j])) optional = false;
                std::vector<std::string> res;
                if (optional) {
                    res = std::move(it.resolve);
                    it.resolve.clear();
                }
                spawn_child(c, s.item, cl->children[0].get(), std::move(res), false);
                for (std::size_t j = 1; j < cl->children.size(); ++j)
                    spawn_child(c, s.item, cl->children[j].get(), {}, false);
                return {std::move(c)};
            }
        }
        return {std::move(c)};
    }

    // Close one instant: fire every ready silent step in every order,
    // collecting all intermediate configurations and the settled frontier.
    void close_instant(std::vector<Config>& settled, std::vector<Config>& all, int now) const {
        std::set<std::string> seen;
        std::vector<Config> work;
        for (auto& c : settled)
            if (seen.insert(config_key(c)).second) work.push_back(std::move(c));
        settled.clear();
        all.clear();
        while (!work.empty()) {
            Config c = std::move(work.back());
            work.pop_back();
            auto steps = ready_steps(c, now);
            bool st = is_settled(steps);
            for (const auto& s : steps)
                for (auto& n : apply_step(c, s, now))
                    if (seen.insert(config_key(n)).second) work.push_back(std::move(n));
            if (st) settled.push_back(c);
            all.push_back(std::move(c));
        }
    }

    // ── events ──

    void match_event(const Config& c0, const std::string& name, bool complement, int now,
                     std::vector<Config>& out) const {
        for (std::size_t i = 0; i < c0.items.size(); ++i) {
            const Item& it = c0.items[i];
            if (it.ph != Ph::Active || it.c->form != Clause::Form::Norm) continue;
            int ii = static_cast<int>(i);
            if (it.c->kind == NormKind::Prohibition) {
                if (it.c->body->action != name) continue;
                if (!complement) {
                    auto rel = release(it);
                    int limit = rel ? *rel - 1 : far_away;
                    if (now <= limit) {
                        Config n = c0;
                        violate(n, ii, now);
                        out.push_back(std::move(n));
                    }
                } else {
                    auto rel = release(it);
                    if (rel && *rel == now) {
                        Config n = c0;
                        Item& ni = n.items[i];
                        n.S.insert(clause_key(*ni.c));
                        apply_resolve(n, ni.resolve);
                        finish(n, ii, now);
                        out.push_back(std::move(n));
                    }
                }
                continue;
            }
            // obligation or permission
            if (complement) {
                if (it.c->kind != NormKind::Obligation) continue;
                auto e = expiry(it);
                if (e && *e == now && next_expected(it.body) == name) {
                    Config n = c0;
                    violate(n, ii, now);
                    out.push_back(std::move(n));
                }
                continue;
            }
            if (now > act_limit(it)) continue;
            std::vector<std::pair<std::string, std::vector<int>>> leaves;
            std::vector<int> path;
            open_leaves(it.body, path, leaves);
            for (const auto& [act, lp] : leaves) {
                if (act != name) continue;
                for (auto& adv : fire_leaf(it.body, lp, 0)) {
                    Config n = c0;
                    Item& ni = n.items[i];
                    ni.body = adv.state;
                    ClauseSet& credit =
                        ni.c->kind == NormKind::Permission ? n.P : n.S;
                    for (const auto& k : adv.credits) credit.insert(k);
                    if (adv.completed) {
                        if (ni.c->body->atomic) credit.insert(clause_key(*ni.c));
                        apply_resolve(n, ni.resolve);
                        finish(n, ii, now);
                    }
                    out.push_back(std::move(n));
                }
            }
        }
    }
};

inline bool same_families(const FamilyTriple& a, const FamilyTriple& b) {
    return a.V == b.V && a.S == b.S && a.P == b.P;
}

}  // namespace refsem
