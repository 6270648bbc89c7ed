#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "trace_eval.hpp"

namespace cocheck {

struct ContractInconsistent : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotConformant : std::runtime_error {
    explicit NotConformant(const std::string& which)
        : std::runtime_error("implementation '" + which + "' does not conform to the contract"),
          name(which) {}
    std::string name;
};

// Implementation under test: a finite list of observed traces, or a network
// whose maximal traces are enumerated at the working horizon. Either way the
// checked trace set is the prefix closure.
struct Implementation {
    std::string name;
    std::vector<TimedTrace> traces;
    std::optional<Network> network;

    static Implementation from_traces(std::string name, std::vector<TimedTrace> ts) {
        return {std::move(name), std::move(ts), std::nullopt};
    }
    static Implementation from_network(std::string name, Network net) {
        return {std::move(name), {}, std::move(net)};
    }
};

// ── contract model ──────────────────────────────────────────────────────────

// A compiled contract ready for the relations: executor, norm index, closure
// rules and a per-trace evaluation cache.
class ContractModel {
public:
    explicit ContractModel(Network net, int horizon = 0)
        : net_(std::make_shared<const Network>(std::move(net))),
          exec_(*net_),
          horizon_(horizon > 0 ? horizon : sufficient_horizon(*net_)) {
        if (!net_->contract)
            throw NetworkError("network carries no contract metadata; compile from a contract");
        CN = net_->contract->CN;
        CP = net_->contract->CP;
        rules_ = net_->contract->implications;
        visible_ = net_->visible_alphabet();
    }

    const Exec& exec() const { return exec_; }
    int horizon() const { return horizon_; }
    const std::set<std::string>& visible() const { return visible_; }
    std::set<std::string> CN, CP;

    // Satisfied-name closure: crediting a refinement's parts credits the
    // refined name itself.
    std::set<std::string> close(std::set<std::string> s) const {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& r : rules_) {
                if (s.count(r.name)) continue;
                bool met;
                if (r.mode == "or") {
                    met = false;
                    for (const auto& ch : r.children)
                        if (s.count(ch)) { met = true; break; }
                } else {
                    met = true;
                    for (const auto& ch : r.children)
                        if (!s.count(ch)) { met = false; break; }
                }
                if (met) {
                    s.insert(r.name);
                    changed = true;
                }
            }
        }
        return s;
    }

    struct Eval {
        bool in_tr = false;
        FamilyTriple families;  // end boundary; empty when !in_tr
        TraceClass cls;
        // Closure of each end S-family member.
        std::vector<std::set<std::string>> closed_S;

        bool credits(const std::string& cn) const {
            for (const auto& s : closed_S)
                if (s.count(cn)) return true;
            return false;
        }
        bool v_clean_end() const { return families.all_V_empty(); }
        bool violates(const std::string& cn) const {
            for (const auto& v : families.V)
                if (v.count(cn)) return true;
            return false;
        }
    };

    const Eval& eval(const TimedTrace& t) const {
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        Eval e;
        TraceRun run = run_trace(exec_, t);
        if (run.in_network) {
            e.in_tr = true;
            e.families = run.end_families();
            e.cls = classify_run(exec_, run);
            for (const auto& s : e.families.S) e.closed_S.push_back(close(s));
        }
        return cache_.emplace(t, std::move(e)).first->second;
    }

    const std::vector<EnumeratedTrace>& maximal() const {
        if (!maximal_) maximal_ = enumerate_maximal_traces(exec_, horizon_);
        return *maximal_;
    }

private:
    std::shared_ptr<const Network> net_;
    Exec exec_;
    int horizon_;
    std::vector<SatRule> rules_;
    std::set<std::string> visible_;
    mutable std::map<TimedTrace, Eval> cache_;
    mutable std::optional<std::vector<EnumeratedTrace>> maximal_;
};

// ── consistency ─────────────────────────────────────────────────────────────

struct ConsistencyVerdict {
    bool holds = false;
    bool has_clean_good = false;
    std::map<std::string, TimedTrace> witnesses;  // norm key -> maximal trace
    std::set<std::string> good_only;  // witnessed, but only outside the clean traces
    std::vector<std::string> missing;
    int horizon = 0;
};

// A contract is consistent when some maximal trace is clean and good, and
// every obliged name is credited on a clean good trace — or, failing that, on
// some good trace (norms inside reparations are only reachable through a
// violation, so their witnesses cannot be clean).
inline ConsistencyVerdict check_consistency(const ContractModel& m) {
    ConsistencyVerdict v;
    v.horizon = m.horizon();
    const auto& all = m.maximal();
    for (const auto& et : all)
        if (et.good() && et.clean()) {
            v.has_clean_good = true;
            break;
        }

    for (const auto& cn : m.CN) {
        const EnumeratedTrace* found = nullptr;
        bool from_clean = false;
        for (const auto& et : all) {
            if (!et.good()) continue;
            bool credits = false;
            for (const auto& s : et.boundaries.back().S)
                if (m.close(s).count(cn)) { credits = true; break; }
            if (!credits) continue;
            if (et.clean()) {
                found = &et;
                from_clean = true;
                break;  // traces are length-lex ordered; first clean hit wins
            }
            if (!found) found = &et;
        }
        if (!found) {
            v.missing.push_back(cn);
        } else {
            v.witnesses[cn] = found->trace;
            if (!from_clean) v.good_only.insert(cn);
        }
    }
    v.holds = v.has_clean_good && v.missing.empty();
    return v;
}

// ── conformance ─────────────────────────────────────────────────────────────

struct Counterexample {
    std::string cn;
    TimedTrace trace;

    bool operator<(const Counterexample& o) const {
        if (cn != o.cn) return cn < o.cn;
        return length_lex_less(trace, o.trace);
    }
};

struct ConformanceVerdict {
    bool holds = false;
    bool covers = false;      // every obliged name reached through some impl trace
    bool repairable = false;  // every violation the impl runs into can be repaired
    std::map<std::string, TimedTrace> witnesses;  // impl trace per covered name
    std::vector<std::string> missing;
    std::vector<Counterexample> counterexamples;
    int horizon = 0;
};

namespace analysis_detail {

// Prefix-closed trace set of an implementation, length-lex sorted.
inline std::vector<TimedTrace> implementation_traces(const ContractModel& m,
                                                     const Implementation& impl, int* horizon) {
    std::set<TimedTrace> closed;
    if (impl.network) {
        int h = std::max(m.horizon(), sufficient_horizon(*impl.network));
        if (horizon) *horizon = h;
        Exec ex(*impl.network);
        for (const auto& et : enumerate_maximal_traces(ex, h))
            for (auto& p : prefixes(et.trace)) closed.insert(std::move(p));
    } else {
        if (horizon) *horizon = m.horizon();
        for (const auto& t : impl.traces)
            for (auto& p : prefixes(t)) closed.insert(std::move(p));
    }
    std::vector<TimedTrace> out(closed.begin(), closed.end());
    std::sort(out.begin(), out.end(), length_lex_less);
    return out;
}

}  // namespace analysis_detail

// Conformance of an implementation against a consistent contract:
//   1. every obliged name is credited by some implementation trace whose
//      hidden projection the contract accepts as clean or good, and
//   2. whenever an implementation trace runs into a violation, the
//      implementation can extend it so the violation is repaired.
inline ConformanceVerdict check_conformance(const ContractModel& m, const Implementation& impl) {
    ConsistencyVerdict cons = check_consistency(m);
    if (!cons.holds)
        throw ContractInconsistent("contract is inconsistent; conformance is undefined");

    ConformanceVerdict v;
    std::vector<TimedTrace> tr = analysis_detail::implementation_traces(m, impl, &v.horizon);

    std::vector<TimedTrace> hides(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) hides[i] = hide(tr[i], m.visible());

    v.covers = true;
    for (const auto& cn : m.CN) {
        bool found = false;
        for (std::size_t i = 0; i < tr.size() && !found; ++i) {
            const auto& e = m.eval(hides[i]);
            if (!e.in_tr) continue;
            if (!(e.cls.clean || e.cls.good)) continue;
            if (e.credits(cn)) {
                v.witnesses[cn] = tr[i];
                found = true;
            }
        }
        if (!found) {
            v.missing.push_back(cn);
            v.covers = false;
        }
    }

    v.repairable = true;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto& e = m.eval(hides[i]);
        if (!e.in_tr) continue;
        for (const auto& cn : m.CN) {
            if (!e.violates(cn)) continue;
            bool repaired = false;
            for (std::size_t j = 0; j < tr.size() && !repaired; ++j) {
                if (tr[j].size() <= tr[i].size() || !is_prefix(tr[i], tr[j])) continue;
                const auto& e2 = m.eval(hides[j]);
                if (e2.in_tr && !e2.violates(cn)) repaired = true;
            }
            if (!repaired) {
                v.counterexamples.push_back({cn, tr[i]});
                v.repairable = false;
            }
        }
    }
    std::sort(v.counterexamples.begin(), v.counterexamples.end());

    v.holds = v.covers && v.repairable;
    return v;
}

// ── permission preorder ─────────────────────────────────────────────────────

struct PreorderVerdict {
    bool i1_le_i2 = false;
    bool i2_le_i1 = false;
    int horizon = 0;

    const char* order() const {
        if (i1_le_i2 && i2_le_i1) return "equivalent";
        if (i1_le_i2) return "i1 <= i2";
        if (i2_le_i1) return "i2 <= i1";
        return "incomparable";
    }
    bool comparable() const { return i1_le_i2 || i2_le_i1; }
};

namespace analysis_detail {

// Violation-free implementation behaviours, as the exercised-permission
// families of their hidden projections.
inline std::vector<FamilyTriple> permission_profiles(const ContractModel& m,
                                                     const Implementation& impl) {
    std::vector<FamilyTriple> out;
    for (const auto& t : implementation_traces(m, impl, nullptr)) {
        const auto& e = m.eval(hide(t, m.visible()));
        if (e.in_tr && e.v_clean_end()) out.push_back(e.families);
    }
    return out;
}

// Every permission set exercised along `a` is contained in one exercised
// along `b`.
inline bool dominated(const FamilyTriple& a, const FamilyTriple& b) {
    for (const auto& pa : a.P) {
        bool covered = false;
        for (const auto& pb : b.P)
            if (std::includes(pb.begin(), pb.end(), pa.begin(), pa.end())) {
                covered = true;
                break;
            }
        if (!covered) return false;
    }
    return true;
}

inline bool permission_le(const std::vector<FamilyTriple>& A,
                          const std::vector<FamilyTriple>& B) {
    for (const auto& a : A) {
        bool matched = false;
        for (const auto& b : B)
            if (dominated(a, b)) {
                matched = true;
                break;
            }
        if (!matched) return false;
    }
    return true;
}

}  // namespace analysis_detail

// I1 <=_P I2 when every violation-free I1 behaviour exercises at most the
// permissions of some violation-free I2 behaviour. Requires both
// implementations to conform.
inline PreorderVerdict compare_permissions(const ContractModel& m, const Implementation& i1,
                                           const Implementation& i2) {
    if (!check_conformance(m, i1).holds) throw NotConformant(i1.name.empty() ? "i1" : i1.name);
    if (!check_conformance(m, i2).holds) throw NotConformant(i2.name.empty() ? "i2" : i2.name);

    auto p1 = analysis_detail::permission_profiles(m, i1);
    auto p2 = analysis_detail::permission_profiles(m, i2);
    PreorderVerdict v;
    v.horizon = m.horizon();
    v.i1_le_i2 = analysis_detail::permission_le(p1, p2);
    v.i2_le_i1 = analysis_detail::permission_le(p2, p1);
    return v;
}

}  // namespace cocheck
