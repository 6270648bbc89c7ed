#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "boolexpr.hpp"

namespace cocheck {

// ── clock constraints ───────────────────────────────────────────────────────

// Conjunctions of non-strict atoms over single clocks: x <= c, x >= c, x = c.
struct ClockAtom {
    enum class Op { Le, Ge, Eq };

    int clock = 0;  // index into Network::clocks
    Op op = Op::Le;
    int bound = 0;

    bool operator==(const ClockAtom&) const = default;
};

struct ClockConstraint {
    std::vector<ClockAtom> atoms;

    bool is_true() const { return atoms.empty(); }

    ClockConstraint& add(int clock, ClockAtom::Op op, int bound) {
        atoms.push_back({clock, op, bound});
        return *this;
    }

    bool operator==(const ClockConstraint&) const = default;
};

inline bool satisfied(const ClockConstraint& g, const std::vector<std::int32_t>& clocks) {
    for (const auto& a : g.atoms) {
        std::int32_t v = clocks[static_cast<std::size_t>(a.clock)];
        switch (a.op) {
            case ClockAtom::Op::Le:
                if (!(v <= a.bound)) return false;
                break;
            case ClockAtom::Op::Ge:
                if (!(v >= a.bound)) return false;
                break;
            case ClockAtom::Op::Eq:
                if (v != a.bound) return false;
                break;
        }
    }
    return true;
}

// ── labels ──────────────────────────────────────────────────────────────────

// Edge labels: tau, an agent's action a, the complement of an action, or one
// half of a channel synchronization. Traces additionally use Sync for a
// completed handshake on a visible channel.
struct ActionLabel {
    enum class Kind { Tau, Internal, Complement, Input, Output, Sync };

    Kind kind = Kind::Tau;
    std::string name;  // action or channel

    static ActionLabel tau() { return {Kind::Tau, ""}; }
    static ActionLabel internal(std::string a) { return {Kind::Internal, std::move(a)}; }
    static ActionLabel complement(std::string a) { return {Kind::Complement, std::move(a)}; }
    static ActionLabel input(std::string m) { return {Kind::Input, std::move(m)}; }
    static ActionLabel output(std::string m) { return {Kind::Output, std::move(m)}; }
    static ActionLabel sync(std::string m) { return {Kind::Sync, std::move(m)}; }

    bool operator==(const ActionLabel&) const = default;
    bool operator<(const ActionLabel& o) const {
        return kind != o.kind ? kind < o.kind : name < o.name;
    }
};

inline std::string to_string(const ActionLabel& l) {
    switch (l.kind) {
        case ActionLabel::Kind::Tau: return "tau";
        case ActionLabel::Kind::Internal: return l.name;
        case ActionLabel::Kind::Complement: return "!" + l.name;
        case ActionLabel::Kind::Input: return l.name + "?";
        case ActionLabel::Kind::Output: return l.name + "!";
        case ActionLabel::Kind::Sync: return l.name;
    }
    return "?";
}

inline ActionLabel parse_label(const std::string& s) {
    if (s.empty() || s == "tau") return ActionLabel::tau();
    if (s[0] == '!') return ActionLabel::complement(s.substr(1));
    if (s.back() == '?') return ActionLabel::input(s.substr(0, s.size() - 1));
    if (s.back() == '!') return ActionLabel::output(s.substr(0, s.size() - 1));
    return ActionLabel::internal(s);
}

// ── structure ───────────────────────────────────────────────────────────────

using ClauseSet = std::set<std::string>;

struct Node {
    int id = 0;
    ClockConstraint invariant;
    ClauseSet V, S, P;  // violated / satisfied / exercised-permission records
    bool is_final = false;
};

struct Edge {
    int src = 0, dst = 0;
    ClockConstraint clock_guard;
    BoolExprPtr data_guard;  // null means true
    ActionLabel label;
    std::vector<int> resets;  // clock indices
    bool urgent = false;
};

struct TimedAutomaton {
    std::string name;
    std::vector<Node> nodes;
    int initial = 0;  // node id
    std::vector<Edge> edges;

    int index_of(int node_id) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].id == node_id) return static_cast<int>(i);
        return -1;
    }
};

// Contract metadata carried by compiled networks so that the relations can
// run on a network file alone. `mode` of a rule is "or" (any child counts)
// or "all" (every child required).
struct SatRule {
    std::string name;
    std::string mode;
    std::vector<std::string> children;

    bool operator==(const SatRule&) const = default;
};

struct ContractInfo {
    std::set<std::string> CN, CP;
    std::map<int, std::string> aliases;
    std::vector<SatRule> implications;

    bool operator==(const ContractInfo&) const = default;
};

struct Network {
    std::vector<std::string> clocks;
    std::vector<std::string> channels;
    std::set<std::string> hidden_channels;
    VarTable vars;
    std::vector<std::string> extra_alphabet;  // declared actions beyond edge labels
    std::optional<ContractInfo> contract;
    std::vector<TimedAutomaton> automata;

    int clock_index(const std::string& name) const {
        for (std::size_t i = 0; i < clocks.size(); ++i)
            if (clocks[i] == name) return static_cast<int>(i);
        return -1;
    }

    int add_clock(const std::string& name) {
        int ix = clock_index(name);
        if (ix >= 0) return ix;
        clocks.push_back(name);
        return static_cast<int>(clocks.size()) - 1;
    }

    bool has_channel(const std::string& name) const {
        return std::find(channels.begin(), channels.end(), name) != channels.end();
    }

    bool channel_hidden(const std::string& name) const { return hidden_channels.count(name) > 0; }

    // Largest constant appearing in any guard or invariant. Clock values are
    // saturated just above it during exploration; beyond that point no
    // constraint can distinguish them.
    int max_constant() const {
        int m = 0;
        for (const auto& a : automata) {
            for (const auto& n : a.nodes)
                for (const auto& atom : n.invariant.atoms) m = std::max(m, atom.bound);
            for (const auto& e : a.edges)
                for (const auto& atom : e.clock_guard.atoms) m = std::max(m, atom.bound);
        }
        return m;
    }

    int ceiling() const { return max_constant() + 1; }

    // Visible action names an implementation may produce: internal and
    // complement edge labels, visible channels, and any declared extras.
    std::set<std::string> visible_alphabet() const {
        std::set<std::string> out(extra_alphabet.begin(), extra_alphabet.end());
        for (const auto& a : automata)
            for (const auto& e : a.edges)
                if (e.label.kind == ActionLabel::Kind::Internal ||
                    e.label.kind == ActionLabel::Kind::Complement)
                    out.insert(e.label.name);
        for (const auto& c : channels)
            if (!channel_hidden(c)) out.insert(c);
        return out;
    }
};

// Conservative default horizon: every clock's largest constant, summed —
// enough for each window to run to its deadline in sequence.
inline int sufficient_horizon(const Network& net) {
    int total = 0;
    for (const auto& c : net.clocks) {
        int m = 0;
        for (const auto& a : net.automata) {
            for (const auto& n : a.nodes)
                for (const auto& atom : n.invariant.atoms)
                    if (net.clocks[static_cast<std::size_t>(atom.clock)] == c)
                        m = std::max(m, atom.bound);
            for (const auto& e : a.edges)
                for (const auto& atom : e.clock_guard.atoms)
                    if (net.clocks[static_cast<std::size_t>(atom.clock)] == c)
                        m = std::max(m, atom.bound);
        }
        total += m;
    }
    return total;
}

// ── well-formedness ─────────────────────────────────────────────────────────

struct NetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void check_network(const Network& net) {
    if (net.automata.empty()) throw NetworkError("network has no automata");
    std::set<std::string> clock_names(net.clocks.begin(), net.clocks.end());
    if (clock_names.size() != net.clocks.size())
        throw NetworkError("duplicate clock name");
    std::set<std::string> chan_names(net.channels.begin(), net.channels.end());
    if (chan_names.size() != net.channels.size())
        throw NetworkError("duplicate channel name");
    for (const auto& h : net.hidden_channels)
        if (!chan_names.count(h))
            throw NetworkError("hidden channel '" + h + "' is not declared");

    std::map<std::string, std::set<int>> inputs, outputs;
    for (std::size_t ai = 0; ai < net.automata.size(); ++ai) {
        const auto& a = net.automata[ai];
        if (a.nodes.empty())
            throw NetworkError("automaton '" + a.name + "' has no nodes");
        std::set<int> ids;
        for (const auto& n : a.nodes) {
            if (!ids.insert(n.id).second)
                throw NetworkError("automaton '" + a.name + "' has duplicate node id " +
                                   std::to_string(n.id));
            for (const auto& atom : n.invariant.atoms)
                if (atom.clock < 0 || atom.clock >= static_cast<int>(net.clocks.size()))
                    throw NetworkError("invariant references unknown clock");
        }
        if (!ids.count(a.initial))
            throw NetworkError("automaton '" + a.name + "' initial node " +
                               std::to_string(a.initial) + " does not exist");
        for (const auto& e : a.edges) {
            if (!ids.count(e.src) || !ids.count(e.dst))
                throw NetworkError("automaton '" + a.name + "' has an edge between unknown nodes");
            for (const auto& atom : e.clock_guard.atoms)
                if (atom.clock < 0 || atom.clock >= static_cast<int>(net.clocks.size()))
                    throw NetworkError("guard references unknown clock");
            for (int r : e.resets)
                if (r < 0 || r >= static_cast<int>(net.clocks.size()))
                    throw NetworkError("reset references unknown clock");
            if (e.label.kind == ActionLabel::Kind::Input) {
                if (!chan_names.count(e.label.name))
                    throw NetworkError("input on undeclared channel '" + e.label.name + "'");
                inputs[e.label.name].insert(static_cast<int>(ai));
            }
            if (e.label.kind == ActionLabel::Kind::Output) {
                if (!chan_names.count(e.label.name))
                    throw NetworkError("output on undeclared channel '" + e.label.name + "'");
                outputs[e.label.name].insert(static_cast<int>(ai));
            }
            if (e.label.kind == ActionLabel::Kind::Sync)
                throw NetworkError("edge labels cannot be completed synchronizations");
            if (e.data_guard) {
                std::vector<std::string> used;
                collect_vars(e.data_guard, used);
                for (const auto& v : used)
                    if (net.vars.index_of(v) < 0)
                        throw NetworkError("data guard references undeclared variable '" + v +
                                           "'");
            }
        }
    }

    // A used channel needs both halves, on at least two distinct automata.
    for (const auto& [c, outs] : outputs) {
        auto it = inputs.find(c);
        if (it == inputs.end())
            throw NetworkError("channel '" + c + "' has outputs but no inputs");
        bool distinct = false;
        for (int o : outs)
            for (int i : it->second)
                if (o != i) distinct = true;
        if (!distinct)
            throw NetworkError("channel '" + c + "' can only synchronize an automaton with itself");
    }
    for (const auto& [c, ins] : inputs)
        if (!outputs.count(c))
            throw NetworkError("channel '" + c + "' has inputs but no outputs");
}

// Record-keeping sanity for hand-written networks: along every edge the
// satisfied and permission sets may only grow, and a violation may disappear
// only if the same name shows up as satisfied (a repair).
inline std::vector<std::string> decoration_warnings(const Network& net) {
    std::vector<std::string> out;
    for (const auto& a : net.automata) {
        for (const auto& e : a.edges) {
            int si = a.index_of(e.src), di = a.index_of(e.dst);
            const Node& s = a.nodes[static_cast<std::size_t>(si)];
            const Node& d = a.nodes[static_cast<std::size_t>(di)];
            auto subset = [](const ClauseSet& x, const ClauseSet& y) {
                return std::includes(y.begin(), y.end(), x.begin(), x.end());
            };
            if (!subset(s.S, d.S) || !subset(s.P, d.P)) {
                out.push_back("automaton '" + a.name + "': records shrink along edge " +
                              std::to_string(e.src) + " -> " + std::to_string(e.dst));
                continue;
            }
            for (const auto& v : s.V)
                if (!d.V.count(v) && !d.S.count(v))
                    out.push_back("automaton '" + a.name + "': violation '" + v +
                                  "' vanishes without repair along edge " +
                                  std::to_string(e.src) + " -> " + std::to_string(e.dst));
        }
    }
    return out;
}

}  // namespace cocheck
