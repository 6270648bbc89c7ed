#pragma once

#include <algorithm>
#include <vector>

#include "semantics.hpp"
#include "trace.hpp"

namespace cocheck {

// ── trace evaluation ────────────────────────────────────────────────────────

// The V/S/P families of one prefix boundary: one element per reachable state,
// each the union of the current nodes' sets across the automata.
struct FamilyTriple {
    std::set<ClauseSet> V, S, P;

    bool all_V_empty() const {
        for (const auto& v : V)
            if (!v.empty()) return false;
        return true;
    }
    bool all_S_nonempty() const {
        for (const auto& s : S)
            if (s.empty()) return false;
        return true;
    }
};

inline FamilyTriple families_of(const Exec& ex, const std::vector<NetworkState>& states) {
    FamilyTriple f;
    for (const auto& s : states) {
        ClauseSet v, sat, p;
        for (std::size_t a = 0; a < ex.net().automata.size(); ++a) {
            const Node& n = ex.node(s, a);
            v.insert(n.V.begin(), n.V.end());
            sat.insert(n.S.begin(), n.S.end());
            p.insert(n.P.begin(), n.P.end());
        }
        f.V.insert(std::move(v));
        f.S.insert(std::move(sat));
        f.P.insert(std::move(p));
    }
    return f;
}

struct TraceRun {
    bool in_network = false;
    std::size_t failed_event = 0;  // index of the first impossible event when !in_network
    // boundaries[k]: the closure reached after the first k events.
    std::vector<std::vector<NetworkState>> states;
    std::vector<FamilyTriple> families;

    const std::vector<NetworkState>& end_states() const { return states.back(); }
    const FamilyTriple& end_families() const { return families.back(); }
};

struct TraceNotInNetwork : std::runtime_error {
    explicit TraceNotInNetwork(const TimedTrace& t, std::size_t at)
        : std::runtime_error("trace not accepted by the network at event " +
                             std::to_string(at + 1) + " of " + format_trace_inline(t)),
          event(at) {}
    std::size_t event;
};

inline void check_alphabet(const Exec& ex, const TimedTrace& t) {
    for (const auto& ev : t)
        if (!ex.alphabet().count(ev.action.name))
            throw UnknownActionError("action '" + ev.action.name +
                                     "' is not in the network alphabet");
}

inline TraceRun run_trace(const Exec& ex, const TimedTrace& t) {
    check_alphabet(ex, t);
    TraceRun run;
    std::vector<NetworkState> cur = ex.silent_closure({ex.initial_state()});
    run.states.push_back(cur);
    run.families.push_back(families_of(ex, cur));
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (int d = 0; d < t[i].delay && !cur.empty(); ++d) cur = ex.delay_layer(cur);
        std::vector<NetworkState> fired;
        for (const auto& s : cur)
            for (auto& [act, n] : ex.visible_successors(s))
                if (act == t[i].action) fired.push_back(std::move(n));
        std::sort(fired.begin(), fired.end());
        fired.erase(std::unique(fired.begin(), fired.end()), fired.end());
        if (fired.empty()) {
            run.in_network = false;
            run.failed_event = i;
            return run;
        }
        cur = ex.silent_closure(std::move(fired));
        run.states.push_back(cur);
        run.families.push_back(families_of(ex, cur));
    }
    run.in_network = true;
    return run;
}

// ── classification ──────────────────────────────────────────────────────────

struct TraceClass {
    bool maximal = false;
    bool good = false;
    bool clean = false;
};

inline TraceClass classify_run(const Exec& ex, const TraceRun& run) {
    TraceClass c;
    for (const auto& s : run.end_states())
        if (ex.completable(s)) {
            c.maximal = true;
            break;
        }
    const FamilyTriple& endf = run.end_families();
    c.good = c.maximal && endf.all_S_nonempty() && endf.all_V_empty();
    c.clean = true;
    for (const auto& f : run.families)
        if (!f.all_V_empty()) {
            c.clean = false;
            break;
        }
    return c;
}

inline TraceClass classify_trace(const Exec& ex, const TimedTrace& t) {
    TraceRun run = run_trace(ex, t);
    if (!run.in_network) throw TraceNotInNetwork(t, run.failed_event);
    return classify_run(ex, run);
}

// ── enumeration ─────────────────────────────────────────────────────────────

struct HorizonTooSmall : std::runtime_error {
    explicit HorizonTooSmall(const TimedTrace& prefix, int horizon)
        : std::runtime_error("horizon " + std::to_string(horizon) +
                             " too small: the run " + format_trace_inline(prefix) +
                             " can neither finish nor continue within it") {}
};

struct EnumerationLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnumeratedTrace {
    TimedTrace trace;
    std::vector<FamilyTriple> boundaries;  // one per prefix, as in TraceRun

    bool good() const {
        const FamilyTriple& f = boundaries.back();
        return f.all_S_nonempty() && f.all_V_empty();
    }
    bool clean() const {
        for (const auto& f : boundaries)
            if (!f.all_V_empty()) return false;
        return true;
    }
};

inline bool length_lex_less(const TimedTrace& a, const TimedTrace& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

namespace eval_detail {

struct Enumerator {
    const Exec& ex;
    int horizon;
    std::size_t max_events = 4096;
    std::size_t max_traces = 1u << 20;
    std::vector<EnumeratedTrace> out;

    void run() {
        TimedTrace prefix;
        std::vector<FamilyTriple> boundaries;
        auto start = ex.silent_closure({ex.initial_state()});
        boundaries.push_back(families_of(ex, start));
        explore(prefix, boundaries, start, horizon);
        std::sort(out.begin(), out.end(),
                  [](const EnumeratedTrace& a, const EnumeratedTrace& b) {
                      return length_lex_less(a.trace, b.trace);
                  });
    }

    void explore(TimedTrace& prefix, std::vector<FamilyTriple>& boundaries,
                 const std::vector<NetworkState>& closed, int budget) {
        bool emitted = false;
        for (const auto& s : closed)
            if (ex.completable(s)) {
                emitted = true;
                break;
            }
        if (emitted) {
            if (out.size() >= max_traces)
                throw EnumerationLimit("more than " + std::to_string(max_traces) +
                                       " maximal traces; refusing to enumerate");
            out.push_back({prefix, boundaries});
        }

        bool extended = false;
        if (prefix.size() < max_events) {
            std::vector<NetworkState> layer = closed;
            for (int d = 0; d <= budget && !layer.empty(); ++d) {
                if (d > 0) layer = ex.delay_layer(layer);
                if (layer.empty()) break;
                std::map<TraceAction, std::vector<NetworkState>> moves;
                for (const auto& s : layer)
                    for (auto& [act, n] : ex.visible_successors(s))
                        moves[act].push_back(std::move(n));
                for (auto& [act, targets] : moves) {
                    std::sort(targets.begin(), targets.end());
                    targets.erase(std::unique(targets.begin(), targets.end()),
                                  targets.end());
                    auto next = ex.silent_closure(std::move(targets));
                    prefix.push_back({act, d});
                    boundaries.push_back(families_of(ex, next));
                    explore(prefix, boundaries, next, budget - d);
                    boundaries.pop_back();
                    prefix.pop_back();
                    extended = true;
                }
            }
        }
        if (!emitted && !extended) throw HorizonTooSmall(prefix, horizon);
    }
};

}  // namespace eval_detail

// All maximal traces of total duration ≤ horizon, each with its per-prefix
// families. Deterministic: length-lexicographic order, no duplicates.
inline std::vector<EnumeratedTrace> enumerate_maximal_traces(const Exec& ex, int horizon) {
    eval_detail::Enumerator e{ex, horizon};
    e.run();
    return std::move(e.out);
}

}  // namespace cocheck
