#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "network.hpp"
#include "trace.hpp"
#include "zone.hpp"

namespace cocheck {

// ── concrete states ─────────────────────────────────────────────────────────

// One control node per automaton, an integer clock valuation, and the set of
// variable assignments still admissible (guards on data split it, delays
// shrink it when urgency applies to only some assignments).
struct NetworkState {
    std::vector<int> at;               // node index per automaton
    std::vector<std::int32_t> clocks;  // saturated just above the largest constant
    AssignSet env;

    bool operator==(const NetworkState&) const = default;
    bool operator<(const NetworkState& o) const {
        if (at != o.at) return at < o.at;
        if (clocks != o.clocks) return clocks < o.clocks;
        return env < o.env;
    }
};

struct NetworkStateHash {
    std::size_t operator()(const NetworkState& s) const {
        std::size_t h = 1469598103934665603ull;
        auto mix = [&h](std::size_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        for (int v : s.at) mix(static_cast<std::size_t>(v) + 0x9e37);
        for (auto v : s.clocks) mix(static_cast<std::size_t>(v) + 0x7f4a);
        for (auto v : s.env) mix(static_cast<std::size_t>(v) + 0x51ed);
        return h;
    }
};

struct UnknownActionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ── exploration engine ──────────────────────────────────────────────────────

class Exec {
public:
    explicit Exec(const Network& net) : net_(net), ceiling_(net.ceiling()) {
        for (const auto& a : net_.automata) {
            std::map<int, int> id_to_index;
            for (std::size_t i = 0; i < a.nodes.size(); ++i)
                id_to_index[a.nodes[i].id] = static_cast<int>(i);
            std::vector<std::vector<int>> out(a.nodes.size());
            for (std::size_t e = 0; e < a.edges.size(); ++e)
                out[static_cast<std::size_t>(id_to_index.at(a.edges[e].src))].push_back(
                    static_cast<int>(e));
            out_edges_.push_back(std::move(out));
            initial_index_.push_back(id_to_index.at(a.initial));
            index_maps_.push_back(std::move(id_to_index));
        }
        alphabet_ = net_.visible_alphabet();
    }

    const Network& net() const { return net_; }
    int ceiling() const { return ceiling_; }
    const std::set<std::string>& alphabet() const { return alphabet_; }

    NetworkState initial_state() const {
        NetworkState s;
        s.at = initial_index_;
        s.clocks.assign(net_.clocks.size(), 0);
        s.env = net_.vars.all_assignments();
        return s;
    }

    const Node& node(const NetworkState& s, std::size_t aut) const {
        return net_.automata[aut].nodes[static_cast<std::size_t>(s.at[aut])];
    }

    bool invariants_hold(const std::vector<int>& at,
                         const std::vector<std::int32_t>& clocks) const {
        for (std::size_t a = 0; a < net_.automata.size(); ++a)
            if (!satisfied(net_.automata[a].nodes[static_cast<std::size_t>(at[a])].invariant,
                           clocks))
                return false;
        return true;
    }

    // ── delays ──

    // One time unit. Assignments under which an urgent step is enabled cannot
    // let time pass; they drop out. No successor when nothing survives or an
    // invariant breaks.
    std::optional<NetworkState> unit_delay(const NetworkState& s) const {
        AssignSet keep;
        for (Assignment al : s.env)
            if (!urgent_enabled(s, al)) keep.push_back(al);
        if (keep.empty()) return std::nullopt;
        NetworkState n;
        n.at = s.at;
        n.clocks = s.clocks;
        for (auto& c : n.clocks)
            c = std::min<std::int32_t>(c + 1, ceiling_);
        if (!invariants_hold(n.at, n.clocks)) return std::nullopt;
        n.env = std::move(keep);
        return n;
    }

    std::optional<NetworkState> delay_successor(const NetworkState& s, int d) const {
        NetworkState cur = s;
        for (int k = 0; k < d; ++k) {
            auto next = unit_delay(cur);
            if (!next) return std::nullopt;
            cur = *std::move(next);
        }
        return cur;
    }

    // ── discrete steps ──

    // Every enabled autonomous edge and every enabled synchronization pair.
    std::vector<std::pair<ActionLabel, NetworkState>> discrete_successors(
        const NetworkState& s) const {
        std::vector<std::pair<ActionLabel, NetworkState>> out;
        for (std::size_t a = 0; a < net_.automata.size(); ++a) {
            for (int ei : out_edges_[a][static_cast<std::size_t>(s.at[a])]) {
                const Edge& e = net_.automata[a].edges[static_cast<std::size_t>(ei)];
                if (e.label.kind == ActionLabel::Kind::Input ||
                    e.label.kind == ActionLabel::Kind::Output)
                    continue;
                auto n = fire(s, a, e);
                if (n) out.emplace_back(e.label, *std::move(n));
            }
        }
        for_each_sync(s, [&](const std::string& chan, std::size_t, const Edge&, std::size_t,
                             const Edge&, NetworkState&& n) {
            out.emplace_back(ActionLabel::sync(chan), std::move(n));
        });
        return out;
    }

    // ── silent structure ──

    bool is_silent(const ActionLabel& l) const {
        return l.kind == ActionLabel::Kind::Tau ||
               (l.kind == ActionLabel::Kind::Sync && net_.channel_hidden(l.name));
    }

    std::vector<NetworkState> silent_successors(const NetworkState& s) const {
        std::vector<NetworkState> out;
        for (std::size_t a = 0; a < net_.automata.size(); ++a) {
            for (int ei : out_edges_[a][static_cast<std::size_t>(s.at[a])]) {
                const Edge& e = net_.automata[a].edges[static_cast<std::size_t>(ei)];
                if (e.label.kind != ActionLabel::Kind::Tau) continue;
                auto n = fire(s, a, e);
                if (n) out.push_back(*std::move(n));
            }
        }
        for_each_sync(s, [&](const std::string& chan, std::size_t, const Edge&, std::size_t,
                             const Edge&, NetworkState&& n) {
            if (net_.channel_hidden(chan)) out.push_back(std::move(n));
        });
        return out;
    }

    // Visible events enabled right now, with their successor states.
    std::vector<std::pair<TraceAction, NetworkState>> visible_successors(
        const NetworkState& s) const {
        std::vector<std::pair<TraceAction, NetworkState>> out;
        for (std::size_t a = 0; a < net_.automata.size(); ++a) {
            for (int ei : out_edges_[a][static_cast<std::size_t>(s.at[a])]) {
                const Edge& e = net_.automata[a].edges[static_cast<std::size_t>(ei)];
                if (e.label.kind != ActionLabel::Kind::Internal &&
                    e.label.kind != ActionLabel::Kind::Complement)
                    continue;
                auto n = fire(s, a, e);
                if (n)
                    out.emplace_back(
                        TraceAction{e.label.name,
                                    e.label.kind == ActionLabel::Kind::Complement},
                        *std::move(n));
            }
        }
        for_each_sync(s, [&](const std::string& chan, std::size_t, const Edge&, std::size_t,
                             const Edge&, NetworkState&& n) {
            if (!net_.channel_hidden(chan))
                out.emplace_back(TraceAction{chan, false}, std::move(n));
        });
        return out;
    }

    bool visible_enabled(const NetworkState& s) const {
        return !visible_successors(s).empty();
    }

    // Zero-delay silent closure (reflexive).
    std::vector<NetworkState> silent_closure(std::vector<NetworkState> states) const {
        std::set<NetworkState> seen(states.begin(), states.end());
        std::vector<NetworkState> work = states;
        while (!work.empty()) {
            NetworkState s = std::move(work.back());
            work.pop_back();
            for (auto& n : silent_successors(s))
                if (seen.insert(n).second) work.push_back(std::move(n));
        }
        return {seen.begin(), seen.end()};
    }

    // States reachable with exactly one more time unit from a closed frontier.
    std::vector<NetworkState> delay_layer(const std::vector<NetworkState>& closed) const {
        std::vector<NetworkState> next;
        for (const auto& s : closed) {
            auto d = unit_delay(s);
            if (d) next.push_back(*std::move(d));
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        return silent_closure(std::move(next));
    }

    // ── quiescence ──

    // A state can finish when some reachable silent execution diverges: the
    // silent-step/delay graph has a reachable cycle through a delay edge
    // (saturated self-delays are the common case). From such a state the run
    // idles forever without another visible action.
    bool completable(const NetworkState& s) const {
        auto it = completable_cache_.find(s);
        if (it != completable_cache_.end()) return it->second;

        std::vector<NetworkState> states{s};
        std::map<NetworkState, int> index{{s, 0}};
        std::vector<std::vector<std::pair<int, bool>>> succ;  // (target, is_delay)
        for (std::size_t i = 0; i < states.size(); ++i) {
            NetworkState cur = states[i];
            succ.emplace_back();
            auto add = [&](NetworkState&& n, bool is_delay) {
                auto [pos, inserted] = index.try_emplace(n, static_cast<int>(states.size()));
                if (inserted) states.push_back(std::move(n));
                succ[i].emplace_back(pos->second, is_delay);
            };
            for (auto& n : silent_successors(cur)) add(std::move(n), false);
            if (auto d = unit_delay(cur)) add(*std::move(d), true);
        }

        bool found = false;
        // Tarjan strongly-connected components, iterative.
        int n = static_cast<int>(states.size());
        std::vector<int> low(static_cast<std::size_t>(n), -1),
            disc(static_cast<std::size_t>(n), -1), comp(static_cast<std::size_t>(n), -1);
        std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
        std::vector<int> stack;
        int timer = 0, ncomp = 0;
        struct Frame {
            int v;
            std::size_t child;
        };
        for (int root = 0; root < n && !found; ++root) {
            if (disc[static_cast<std::size_t>(root)] != -1) continue;
            std::vector<Frame> frames{{root, 0}};
            disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
            stack.push_back(root);
            on_stack[static_cast<std::size_t>(root)] = true;
            while (!frames.empty()) {
                auto& f = frames.back();
                if (f.child < succ[static_cast<std::size_t>(f.v)].size()) {
                    int w = succ[static_cast<std::size_t>(f.v)][f.child++].first;
                    if (disc[static_cast<std::size_t>(w)] == -1) {
                        disc[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] =
                            timer++;
                        stack.push_back(w);
                        on_stack[static_cast<std::size_t>(w)] = true;
                        frames.push_back({w, 0});
                    } else if (on_stack[static_cast<std::size_t>(w)]) {
                        low[static_cast<std::size_t>(f.v)] = std::min(
                            low[static_cast<std::size_t>(f.v)], disc[static_cast<std::size_t>(w)]);
                    }
                } else {
                    int v = f.v;
                    frames.pop_back();
                    if (!frames.empty())
                        low[static_cast<std::size_t>(frames.back().v)] =
                            std::min(low[static_cast<std::size_t>(frames.back().v)],
                                     low[static_cast<std::size_t>(v)]);
                    if (low[static_cast<std::size_t>(v)] == disc[static_cast<std::size_t>(v)]) {
                        while (true) {
                            int w = stack.back();
                            stack.pop_back();
                            on_stack[static_cast<std::size_t>(w)] = false;
                            comp[static_cast<std::size_t>(w)] = ncomp;
                            if (w == v) break;
                        }
                        ++ncomp;
                    }
                }
            }
        }
        for (int v = 0; v < n && !found; ++v)
            for (const auto& [w, is_delay] : succ[static_cast<std::size_t>(v)])
                if (is_delay && comp[static_cast<std::size_t>(v)] ==
                                    comp[static_cast<std::size_t>(w)]) {
                    found = true;
                    break;
                }

        completable_cache_.emplace(s, found);
        return found;
    }

    // ── helpers ──

    std::optional<NetworkState> fire(const NetworkState& s, std::size_t aut,
                                     const Edge& e) const {
        if (!satisfied(e.clock_guard, s.clocks)) return std::nullopt;
        AssignSet env = filter(e.data_guard, net_.vars, s.env);
        if (env.empty()) return std::nullopt;
        NetworkState n;
        n.at = s.at;
        n.at[aut] = index_maps_[aut].at(e.dst);
        n.clocks = s.clocks;
        for (int r : e.resets) n.clocks[static_cast<std::size_t>(r)] = 0;
        if (!invariants_hold(n.at, n.clocks)) return std::nullopt;
        n.env = std::move(env);
        return n;
    }

    std::optional<NetworkState> fire_pair(const NetworkState& s, std::size_t ai, const Edge& out,
                                          std::size_t aj, const Edge& in) const {
        if (!satisfied(out.clock_guard, s.clocks) || !satisfied(in.clock_guard, s.clocks))
            return std::nullopt;
        AssignSet env = filter(in.data_guard, net_.vars,
                               filter(out.data_guard, net_.vars, s.env));
        if (env.empty()) return std::nullopt;
        NetworkState n;
        n.at = s.at;
        n.at[ai] = index_maps_[ai].at(out.dst);
        n.at[aj] = index_maps_[aj].at(in.dst);
        n.clocks = s.clocks;
        for (int r : out.resets) n.clocks[static_cast<std::size_t>(r)] = 0;
        for (int r : in.resets) n.clocks[static_cast<std::size_t>(r)] = 0;
        if (!invariants_hold(n.at, n.clocks)) return std::nullopt;
        n.env = std::move(env);
        return n;
    }

private:
    template <typename F>
    void for_each_sync(const NetworkState& s, F&& f) const {
        for (std::size_t ai = 0; ai < net_.automata.size(); ++ai) {
            for (int eo : out_edges_[ai][static_cast<std::size_t>(s.at[ai])]) {
                const Edge& out = net_.automata[ai].edges[static_cast<std::size_t>(eo)];
                if (out.label.kind != ActionLabel::Kind::Output) continue;
                for (std::size_t aj = 0; aj < net_.automata.size(); ++aj) {
                    if (aj == ai) continue;
                    for (int ein : out_edges_[aj][static_cast<std::size_t>(s.at[aj])]) {
                        const Edge& in = net_.automata[aj].edges[static_cast<std::size_t>(ein)];
                        if (in.label.kind != ActionLabel::Kind::Input ||
                            in.label.name != out.label.name)
                            continue;
                        auto n = fire_pair(s, ai, out, aj, in);
                        if (n) f(out.label.name, ai, out, aj, in, *std::move(n));
                    }
                }
            }
        }
    }

    // Whether, under the single assignment `al`, some urgent step is enabled.
    bool urgent_enabled(const NetworkState& s, Assignment al) const {
        AssignSet single{al};
        for (std::size_t a = 0; a < net_.automata.size(); ++a) {
            for (int ei : out_edges_[a][static_cast<std::size_t>(s.at[a])]) {
                const Edge& e = net_.automata[a].edges[static_cast<std::size_t>(ei)];
                if (!e.urgent) continue;
                if (e.label.kind == ActionLabel::Kind::Input ||
                    e.label.kind == ActionLabel::Kind::Output)
                    continue;
                if (!satisfied(e.clock_guard, s.clocks)) continue;
                if (!filter(e.data_guard, net_.vars, single).empty()) return true;
            }
        }
        // Urgent channel edges only block delay when a complementary partner
        // is enabled as well.
        bool found = false;
        for_each_sync_assignment(s, single, [&](const Edge& out, const Edge& in) {
            if (out.urgent || in.urgent) found = true;
        });
        return found;
    }

    template <typename F>
    void for_each_sync_assignment(const NetworkState& s, const AssignSet& single, F&& f) const {
        for (std::size_t ai = 0; ai < net_.automata.size(); ++ai) {
            for (int eo : out_edges_[ai][static_cast<std::size_t>(s.at[ai])]) {
                const Edge& out = net_.automata[ai].edges[static_cast<std::size_t>(eo)];
                if (out.label.kind != ActionLabel::Kind::Output) continue;
                if (!satisfied(out.clock_guard, s.clocks)) continue;
                if (filter(out.data_guard, net_.vars, single).empty()) continue;
                for (std::size_t aj = 0; aj < net_.automata.size(); ++aj) {
                    if (aj == ai) continue;
                    for (int ein : out_edges_[aj][static_cast<std::size_t>(s.at[aj])]) {
                        const Edge& in = net_.automata[aj].edges[static_cast<std::size_t>(ein)];
                        if (in.label.kind != ActionLabel::Kind::Input ||
                            in.label.name != out.label.name)
                            continue;
                        if (!satisfied(in.clock_guard, s.clocks)) continue;
                        if (filter(in.data_guard, net_.vars, single).empty()) continue;
                        f(out, in);
                    }
                }
            }
        }
    }

    const Network& net_;
    int ceiling_;
    std::set<std::string> alphabet_;
    std::vector<std::map<int, int>> index_maps_;
    std::vector<int> initial_index_;
    std::vector<std::vector<std::vector<int>>> out_edges_;
    mutable std::map<NetworkState, bool> completable_cache_;
};

// ── symbolic states ─────────────────────────────────────────────────────────

// Zone-based counterpart used by the reachability cross-checks: one control
// vector, a zone over the network clocks, and the admissible assignments.
struct SymbolicState {
    std::vector<int> at;
    Zone zone;
    AssignSet env;
};

inline void apply_constraint(Zone& z, const ClockConstraint& g) {
    for (const auto& a : g.atoms) {
        switch (a.op) {
            case ClockAtom::Op::Le: z.constrain_upper(a.clock + 1, a.bound); break;
            case ClockAtom::Op::Ge: z.constrain_lower(a.clock + 1, a.bound); break;
            case ClockAtom::Op::Eq: z.constrain_eq(a.clock + 1, a.bound); break;
        }
    }
}

class SymbolicExec {
public:
    explicit SymbolicExec(const Network& net) : net_(net), exec_(net) {}

    SymbolicState initial_state() const {
        SymbolicState s{exec_.initial_state().at, Zone::zero(static_cast<int>(net_.clocks.size())),
                        net_.vars.all_assignments()};
        return s;
    }

    ClockConstraint invariant_of(const std::vector<int>& at) const {
        ClockConstraint all;
        for (std::size_t a = 0; a < net_.automata.size(); ++a) {
            const auto& inv = net_.automata[a].nodes[static_cast<std::size_t>(at[a])].invariant;
            all.atoms.insert(all.atoms.end(), inv.atoms.begin(), inv.atoms.end());
        }
        return all;
    }

    // Time elapse: up, then re-impose the location invariants.
    std::optional<SymbolicState> post_delay(const SymbolicState& s) const {
        SymbolicState n = s;
        n.zone.up();
        apply_constraint(n.zone, invariant_of(n.at));
        if (n.zone.empty()) return std::nullopt;
        return n;
    }

    std::optional<SymbolicState> post_edge(const SymbolicState& s, std::size_t aut,
                                           const Edge& e) const {
        SymbolicState n = s;
        apply_constraint(n.zone, e.clock_guard);
        if (n.zone.empty()) return std::nullopt;
        n.env = filter(e.data_guard, net_.vars, n.env);
        if (n.env.empty()) return std::nullopt;
        n.at[aut] = index_of(aut, e.dst);
        for (int r : e.resets) n.zone.reset(r + 1);
        apply_constraint(n.zone, invariant_of(n.at));
        if (n.zone.empty()) return std::nullopt;
        return n;
    }

    std::optional<SymbolicState> post_sync(const SymbolicState& s, std::size_t ai,
                                           const Edge& out, std::size_t aj,
                                           const Edge& in) const {
        SymbolicState n = s;
        apply_constraint(n.zone, out.clock_guard);
        apply_constraint(n.zone, in.clock_guard);
        if (n.zone.empty()) return std::nullopt;
        n.env = filter(in.data_guard, net_.vars, filter(out.data_guard, net_.vars, n.env));
        if (n.env.empty()) return std::nullopt;
        n.at[ai] = index_of(ai, out.dst);
        n.at[aj] = index_of(aj, in.dst);
        for (int r : out.resets) n.zone.reset(r + 1);
        for (int r : in.resets) n.zone.reset(r + 1);
        apply_constraint(n.zone, invariant_of(n.at));
        if (n.zone.empty()) return std::nullopt;
        return n;
    }

    // Forward reachability with inclusion subsumption. Intended for networks
    // without urgent edges; urgency prunes concrete delays but not zones.
    std::vector<SymbolicState> reachable() const {
        std::vector<SymbolicState> out;
        std::vector<SymbolicState> work;
        auto push = [&](std::optional<SymbolicState>&& n) {
            if (!n) return;
            for (const auto& o : out)
                if (o.at == n->at && o.env == n->env && o.zone.includes(n->zone)) return;
            out.push_back(*n);
            work.push_back(*std::move(n));
        };
        push(post_delay(initial_state()));
        push(std::optional<SymbolicState>(initial_state()));
        while (!work.empty()) {
            SymbolicState s = std::move(work.back());
            work.pop_back();
            for (std::size_t a = 0; a < net_.automata.size(); ++a) {
                const auto& aut = net_.automata[a];
                for (const auto& e : aut.edges) {
                    if (index_of(a, e.src) != s.at[a]) continue;
                    if (e.label.kind == ActionLabel::Kind::Input ||
                        e.label.kind == ActionLabel::Kind::Output)
                        continue;
                    auto n = post_edge(s, a, e);
                    if (n) {
                        push(post_delay(*n));
                        push(std::move(n));
                    }
                }
            }
            // synchronizations
            for (std::size_t ai = 0; ai < net_.automata.size(); ++ai)
                for (const auto& out_e : net_.automata[ai].edges) {
                    if (out_e.label.kind != ActionLabel::Kind::Output) continue;
                    if (index_of(ai, out_e.src) != s.at[ai]) continue;
                    for (std::size_t aj = 0; aj < net_.automata.size(); ++aj) {
                        if (ai == aj) continue;
                        for (const auto& in_e : net_.automata[aj].edges) {
                            if (in_e.label.kind != ActionLabel::Kind::Input ||
                                in_e.label.name != out_e.label.name)
                                continue;
                            if (index_of(aj, in_e.src) != s.at[aj]) continue;
                            auto n = post_sync(s, ai, out_e, aj, in_e);
                            if (n) {
                                push(post_delay(*n));
                                push(std::move(n));
                            }
                        }
                    }
                }
        }
        return out;
    }

private:
    int index_of(std::size_t aut, int node_id) const {
        return net_.automata[aut].index_of(node_id);
    }

    const Network& net_;
    Exec exec_;
};

}  // namespace cocheck
