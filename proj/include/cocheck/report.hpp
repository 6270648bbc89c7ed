#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "analysis.hpp"

namespace cocheck {

// Reports come in two renderings: JSON (stable key order, stable formatting,
// suitable for diffing and tooling) and human text. `holds` always answers
// the subcommand's main question.

namespace report_detail {

inline nlohmann::json family_member_json(const std::set<ClauseSet>& fam) {
    auto arr = nlohmann::json::array();
    for (const auto& s : fam) arr.push_back(s);
    return arr;
}

inline nlohmann::json families_json(const FamilyTriple& f) {
    nlohmann::json j;
    j["P"] = family_member_json(f.P);
    j["S"] = family_member_json(f.S);
    j["V"] = family_member_json(f.V);
    return j;
}

inline nlohmann::json witness_json(const std::map<std::string, TimedTrace>& ws) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [cn, t] : ws) j[cn] = format_trace_inline(t);
    return j;
}

inline nlohmann::json counterexample_json(const std::vector<Counterexample>& cs) {
    auto arr = nlohmann::json::array();
    for (const auto& c : cs)
        arr.push_back({{"cn", c.cn}, {"trace", format_trace_inline(c.trace)}});
    return arr;
}

inline void print_witnesses(std::ostream& os, const std::map<std::string, TimedTrace>& ws) {
    if (ws.empty()) return;
    os << "witnesses:\n";
    for (const auto& [cn, t] : ws) os << "  " << cn << ": " << format_trace_inline(t) << "\n";
}

inline void print_notes(std::ostream& os, const std::vector<std::string>& notes) {
    for (const auto& n : notes) os << "note: " << n << "\n";
}

}  // namespace report_detail

// ── consistency ─────────────────────────────────────────────────────────────

inline std::vector<std::string> consistency_notes(const ConsistencyVerdict& v) {
    std::vector<std::string> notes;
    if (!v.has_clean_good)
        notes.push_back("no violation-free successful run exists");
    for (const auto& cn : v.missing)
        notes.push_back("no successful run credits " + cn);
    for (const auto& cn : v.good_only)
        notes.push_back("witness for " + cn +
                        " repairs a violation; no violation-free run credits it");
    return notes;
}

inline nlohmann::json consistency_json(const ConsistencyVerdict& v) {
    nlohmann::json j;
    j["counterexamples"] = nlohmann::json::array();
    j["holds"] = v.holds;
    j["horizon"] = v.horizon;
    j["notes"] = consistency_notes(v);
    j["relation"] = "consistency";
    j["witnesses"] = report_detail::witness_json(v.witnesses);
    return j;
}

inline std::string consistency_text(const ConsistencyVerdict& v) {
    std::ostringstream os;
    os << "consistency: " << (v.holds ? "holds" : "fails") << " (horizon " << v.horizon << ")\n";
    report_detail::print_witnesses(os, v.witnesses);
    report_detail::print_notes(os, consistency_notes(v));
    return os.str();
}

// ── conformance ─────────────────────────────────────────────────────────────

inline std::vector<std::string> conformance_notes(const ConformanceVerdict& v) {
    std::vector<std::string> notes;
    for (const auto& cn : v.missing)
        notes.push_back("no accepted implementation trace credits " + cn);
    if (!v.repairable)
        notes.push_back("unrepaired violations listed as counterexamples");
    return notes;
}

inline nlohmann::json conformance_json(const ConformanceVerdict& v) {
    nlohmann::json j;
    j["counterexamples"] = report_detail::counterexample_json(v.counterexamples);
    j["holds"] = v.holds;
    j["horizon"] = v.horizon;
    j["notes"] = conformance_notes(v);
    j["relation"] = "conformance";
    j["witnesses"] = report_detail::witness_json(v.witnesses);
    return j;
}

inline std::string conformance_text(const ConformanceVerdict& v) {
    std::ostringstream os;
    os << "conformance: " << (v.holds ? "holds" : "fails") << " (horizon " << v.horizon << ")\n";
    report_detail::print_witnesses(os, v.witnesses);
    if (v.counterexamples.empty()) {
        os << "violations: none\n";
    } else {
        os << "violations:\n";
        for (const auto& c : v.counterexamples)
            os << "  " << c.cn << " unrepaired after " << format_trace_inline(c.trace) << "\n";
    }
    report_detail::print_notes(os, conformance_notes(v));
    return os.str();
}

// ── permission preorder ─────────────────────────────────────────────────────

inline nlohmann::json preorder_json(const PreorderVerdict& v) {
    nlohmann::json j;
    j["counterexamples"] = nlohmann::json::array();
    j["holds"] = v.comparable();
    j["horizon"] = v.horizon;
    j["i1_le_i2"] = v.i1_le_i2;
    j["i2_le_i1"] = v.i2_le_i1;
    j["notes"] = nlohmann::json::array();
    j["order"] = v.order();
    j["relation"] = "permission-order";
    j["witnesses"] = nlohmann::json::object();
    return j;
}

inline std::string preorder_text(const PreorderVerdict& v) {
    std::ostringstream os;
    os << "permission order: " << v.order() << " (horizon " << v.horizon << ")\n";
    os << "i1 <= i2: " << (v.i1_le_i2 ? "yes" : "no") << "\n";
    os << "i2 <= i1: " << (v.i2_le_i1 ? "yes" : "no") << "\n";
    return os.str();
}

// ── trace membership ────────────────────────────────────────────────────────

inline nlohmann::json trace_json(const TimedTrace& t, const TraceRun& run,
                                 const TraceClass* cls) {
    nlohmann::json j;
    j["holds"] = run.in_network;
    j["relation"] = "membership";
    j["trace"] = format_trace_inline(t);
    if (run.in_network) {
        nlohmann::json c;
        c["clean"] = cls->clean;
        c["good"] = cls->good;
        c["maximal"] = cls->maximal;
        j["classification"] = c;
        j["families"] = report_detail::families_json(run.end_families());
        j["notes"] = nlohmann::json::array();
    } else {
        j["notes"] = {"event " + std::to_string(run.failed_event + 1) + " (" +
                      to_string(t[static_cast<std::size_t>(run.failed_event)].action) +
                      ") is not enabled"};
    }
    return j;
}

inline std::string trace_text(const TimedTrace& t, const TraceRun& run, const TraceClass* cls) {
    std::ostringstream os;
    os << "trace: " << format_trace_inline(t) << "\n";
    if (!run.in_network) {
        os << "accepted: no\n";
        os << "note: event " << run.failed_event + 1 << " ("
           << to_string(t[static_cast<std::size_t>(run.failed_event)].action)
           << ") is not enabled\n";
        return os.str();
    }
    os << "accepted: yes\n";
    FamilyTriple f = run.end_families();
    auto line = [&os](const char* tag, const std::set<ClauseSet>& fam) {
        os << tag << ":";
        for (const auto& s : fam) {
            os << " {";
            bool first = true;
            for (const auto& x : s) {
                if (!first) os << ", ";
                os << x;
                first = false;
            }
            os << "}";
        }
        os << "\n";
    };
    line("V", f.V);
    line("S", f.S);
    line("P", f.P);
    os << "maximal: " << (cls->maximal ? "yes" : "no") << ", good: " << (cls->good ? "yes" : "no")
       << ", clean: " << (cls->clean ? "yes" : "no") << "\n";
    return os.str();
}

// ── enumeration ─────────────────────────────────────────────────────────────

inline nlohmann::json enumerate_json(const std::vector<EnumeratedTrace>& ts, int horizon) {
    nlohmann::json j;
    j["count"] = ts.size();
    j["horizon"] = horizon;
    auto arr = nlohmann::json::array();
    for (const auto& et : ts) {
        nlohmann::json e;
        e["clean"] = et.clean();
        e["good"] = et.good();
        e["trace"] = format_trace_inline(et.trace);
        arr.push_back(e);
    }
    j["traces"] = arr;
    return j;
}

inline std::string enumerate_text(const std::vector<EnumeratedTrace>& ts, int horizon) {
    std::ostringstream os;
    os << ts.size() << " maximal trace" << (ts.size() == 1 ? "" : "s") << " (horizon " << horizon
       << ")\n";
    for (const auto& et : ts) {
        os << format_trace_inline(et.trace);
        if (et.good()) os << "  good";
        if (et.clean()) os << "  clean";
        os << "\n";
    }
    return os.str();
}

}  // namespace cocheck
