#pragma once

#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocheck {

// ── timed traces ────────────────────────────────────────────────────────────

// Observable events: an action name, possibly complemented ("the action did
// not happen in time"). Completed synchronizations on visible channels appear
// under the channel name.
struct TraceAction {
    std::string name;
    bool complement = false;

    bool operator==(const TraceAction&) const = default;
    bool operator<(const TraceAction& o) const {
        return name != o.name ? name < o.name : complement < o.complement;
    }
};

struct TimedEvent {
    TraceAction action;
    int delay = 0;  // time since the previous event

    bool operator==(const TimedEvent&) const = default;
    bool operator<(const TimedEvent& o) const {
        if (!(action == o.action)) return action < o.action;
        return delay < o.delay;
    }
};

using TimedTrace = std::vector<TimedEvent>;

inline std::string to_string(const TraceAction& a) {
    return a.complement ? "!" + a.name : a.name;
}

inline int duration(const TimedTrace& t) {
    int d = 0;
    for (const auto& e : t) d += e.delay;
    return d;
}

inline TimedTrace concat(TimedTrace a, const TimedTrace& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// All prefixes, shortest first, including the empty trace and t itself.
inline std::vector<TimedTrace> prefixes(const TimedTrace& t) {
    std::vector<TimedTrace> out;
    out.reserve(t.size() + 1);
    for (std::size_t n = 0; n <= t.size(); ++n)
        out.emplace_back(t.begin(), t.begin() + static_cast<long>(n));
    return out;
}

inline bool is_prefix(const TimedTrace& p, const TimedTrace& t) {
    if (p.size() > t.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!(p[i] == t[i])) return false;
    return true;
}

// ── hiding ──────────────────────────────────────────────────────────────────

// Projects a trace onto a visible alphabet. The delay of a hidden event is
// not lost: it folds into the delay of the next kept event. Trailing hidden
// events disappear entirely.
inline TimedTrace hide(const TimedTrace& t, const std::set<std::string>& visible) {
    TimedTrace out;
    int carry = 0;
    for (const auto& e : t) {
        if (visible.count(e.action.name)) {
            out.push_back({e.action, e.delay + carry});
            carry = 0;
        } else {
            carry += e.delay;
        }
    }
    return out;
}

// ── text form ───────────────────────────────────────────────────────────────
//
// Events are "<action> <delay>" pairs; complements are written "!a".
// Trace files carry one event per line, '#' starts a comment. The inline
// form used in reports and trace-set files separates events with spaces.

inline std::string format_trace(const TimedTrace& t) {
    std::string s;
    for (const auto& e : t) s += to_string(e.action) + " " + std::to_string(e.delay) + "\n";
    return s;
}

inline std::string format_trace_inline(const TimedTrace& t) {
    if (t.empty()) return "[]";
    std::string s = "[";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ' ';
        s += to_string(t[i].action) + " " + std::to_string(t[i].delay);
    }
    return s + "]";
}

struct TraceFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline TimedTrace parse_trace_tokens(std::vector<std::string> tokens) {
    if (tokens.size() == 1 && tokens[0] == "[]") return {};
    if (!tokens.empty() && tokens.front().front() == '[') {
        tokens.front().erase(0, 1);
        if (tokens.front().empty()) tokens.erase(tokens.begin());
    }
    if (!tokens.empty() && tokens.back().back() == ']') {
        tokens.back().pop_back();
        if (tokens.back().empty()) tokens.pop_back();
    }
    if (tokens.size() % 2 != 0)
        throw TraceFormatError("trace must be a sequence of <action> <delay> pairs");
    TimedTrace t;
    for (std::size_t i = 0; i < tokens.size(); i += 2) {
        TimedEvent e;
        std::string a = tokens[i];
        if (!a.empty() && a[0] == '!') {
            e.action.complement = true;
            a = a.substr(1);
        }
        if (a.empty()) throw TraceFormatError("empty action name");
        e.action.name = a;
        try {
            e.delay = std::stoi(tokens[i + 1]);
        } catch (const std::exception&) {
            throw TraceFormatError("bad delay '" + tokens[i + 1] + "'");
        }
        if (e.delay < 0) throw TraceFormatError("negative delay");
        t.push_back(std::move(e));
    }
    return t;
}

inline std::vector<std::string> tokenize_trace_text(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
    }
    return tokens;
}

inline TimedTrace parse_trace(const std::string& text) {
    return parse_trace_tokens(tokenize_trace_text(text));
}

// One trace per non-empty line; "[]" denotes the empty trace.
inline std::vector<TimedTrace> parse_trace_list(const std::string& text) {
    std::vector<TimedTrace> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;
        out.push_back(parse_trace_tokens(tokens));
    }
    return out;
}

}  // namespace cocheck
