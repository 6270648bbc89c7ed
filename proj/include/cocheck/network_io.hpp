#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "network.hpp"

namespace cocheck {

struct FormatError : std::runtime_error {
    std::string path;  // JSON path of the offending element

    FormatError(std::string path_, const std::string& what_)
        : std::runtime_error("format error at " + path_ + ": " + what_),
          path(std::move(path_)) {}
};

// ── clock constraint text ───────────────────────────────────────────────────

inline std::string to_string(const ClockConstraint& g, const std::vector<std::string>& clocks) {
    std::string s;
    for (std::size_t i = 0; i < g.atoms.size(); ++i) {
        const auto& a = g.atoms[i];
        if (i) s += " && ";
        s += clocks[static_cast<std::size_t>(a.clock)];
        switch (a.op) {
            case ClockAtom::Op::Le: s += "<="; break;
            case ClockAtom::Op::Ge: s += ">="; break;
            case ClockAtom::Op::Eq: s += "=="; break;
        }
        s += std::to_string(a.bound);
    }
    return s;
}

inline ClockConstraint parse_clock_constraint(const std::string& text,
                                              const Network& net,
                                              const std::string& where) {
    ClockConstraint g;
    std::size_t pos = 0;
    auto skip = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    };
    skip();
    while (pos < text.size()) {
        std::size_t start = pos;
        while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                     text[pos] == '_'))
            ++pos;
        std::string clock = text.substr(start, pos - start);
        int ci = net.clock_index(clock);
        if (ci < 0) throw FormatError(where, "unknown clock '" + clock + "'");
        skip();
        ClockAtom::Op op;
        if (text.compare(pos, 2, "<=") == 0) op = ClockAtom::Op::Le;
        else if (text.compare(pos, 2, ">=") == 0) op = ClockAtom::Op::Ge;
        else if (text.compare(pos, 2, "==") == 0) op = ClockAtom::Op::Eq;
        else throw FormatError(where, "expected <=, >= or == after '" + clock + "'");
        pos += 2;
        skip();
        start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (start == pos) throw FormatError(where, "expected integer bound");
        g.add(ci, op, std::stoi(text.substr(start, pos - start)));
        skip();
        if (pos < text.size()) {
            if (text.compare(pos, 2, "&&") != 0)
                throw FormatError(where, "expected '&&' between atoms");
            pos += 2;
            skip();
        }
    }
    return g;
}

// ── write ───────────────────────────────────────────────────────────────────

inline nlohmann::ordered_json network_to_json(const Network& net) {
    nlohmann::ordered_json j;
    j["clocks"] = net.clocks;
    j["channels"] = net.channels;
    j["hidden_channels"] =
        std::vector<std::string>(net.hidden_channels.begin(), net.hidden_channels.end());
    if (!net.vars.empty()) {
        auto& vs = j["vars"] = nlohmann::ordered_json::array();
        for (const auto& v : net.vars.decls())
            vs.push_back({{"name", v.name}, {"values", v.values}});
    }
    if (!net.extra_alphabet.empty()) j["alphabet"] = net.extra_alphabet;
    if (net.contract) {
        nlohmann::ordered_json c;
        c["CN"] = std::vector<std::string>(net.contract->CN.begin(), net.contract->CN.end());
        c["CP"] = std::vector<std::string>(net.contract->CP.begin(), net.contract->CP.end());
        auto& al = c["aliases"] = nlohmann::ordered_json::object();
        for (const auto& [num, name] : net.contract->aliases) al[std::to_string(num)] = name;
        auto& imps = c["implications"] = nlohmann::ordered_json::array();
        for (const auto& r : net.contract->implications)
            imps.push_back({{"name", r.name}, {"mode", r.mode}, {"children", r.children}});
        j["contract"] = std::move(c);
    }
    auto& auts = j["automata"] = nlohmann::ordered_json::array();
    for (const auto& a : net.automata) {
        nlohmann::ordered_json ja;
        ja["name"] = a.name;
        ja["initial"] = a.initial;
        auto& nodes = ja["nodes"] = nlohmann::ordered_json::array();
        for (const auto& n : a.nodes) {
            nlohmann::ordered_json jn;
            jn["id"] = n.id;
            jn["invariant"] = to_string(n.invariant, net.clocks);
            jn["V"] = std::vector<std::string>(n.V.begin(), n.V.end());
            jn["S"] = std::vector<std::string>(n.S.begin(), n.S.end());
            jn["P"] = std::vector<std::string>(n.P.begin(), n.P.end());
            jn["final"] = n.is_final;
            nodes.push_back(std::move(jn));
        }
        auto& edges = ja["edges"] = nlohmann::ordered_json::array();
        for (const auto& e : a.edges) {
            nlohmann::ordered_json je;
            je["src"] = e.src;
            je["dst"] = e.dst;
            je["clock_guard"] = to_string(e.clock_guard, net.clocks);
            je["data_guard"] = e.data_guard && !e.data_guard->is_true()
                                   ? to_string(e.data_guard)
                                   : std::string();
            je["label"] = to_string(e.label);
            std::vector<std::string> resets;
            for (int r : e.resets) resets.push_back(net.clocks[static_cast<std::size_t>(r)]);
            je["resets"] = resets;
            je["urgent"] = e.urgent;
            edges.push_back(std::move(je));
        }
        auts.push_back(std::move(ja));
    }
    return j;
}

inline std::string write_network(const Network& net) { return network_to_json(net).dump(2) + "\n"; }

inline void write_network_file(const Network& net, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << write_network(net);
}

// ── read ────────────────────────────────────────────────────────────────────

namespace io_detail {

template <typename T>
T get_field(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw FormatError(where, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError(where + "." + key, "wrong type");
    }
}

}  // namespace io_detail

inline Network network_from_json(const nlohmann::json& j) {
    using io_detail::get_field;
    if (!j.is_object()) throw FormatError("$", "expected a JSON object");
    Network net;
    net.clocks = get_field<std::vector<std::string>>(j, "clocks", "$");
    net.channels = get_field<std::vector<std::string>>(j, "channels", "$");
    if (j.contains("hidden_channels")) {
        auto h = get_field<std::vector<std::string>>(j, "hidden_channels", "$");
        net.hidden_channels.insert(h.begin(), h.end());
    }
    if (j.contains("vars")) {
        const auto& vs = j.at("vars");
        if (!vs.is_array()) throw FormatError("$.vars", "expected an array");
        for (std::size_t i = 0; i < vs.size(); ++i) {
            std::string where = "$.vars[" + std::to_string(i) + "]";
            net.vars.declare(get_field<std::string>(vs[i], "name", where),
                             get_field<std::vector<std::string>>(vs[i], "values", where));
        }
    }
    if (j.contains("alphabet"))
        net.extra_alphabet = get_field<std::vector<std::string>>(j, "alphabet", "$");
    if (j.contains("contract")) {
        const auto& c = j.at("contract");
        ContractInfo info;
        auto cn = get_field<std::vector<std::string>>(c, "CN", "$.contract");
        auto cp = get_field<std::vector<std::string>>(c, "CP", "$.contract");
        info.CN.insert(cn.begin(), cn.end());
        info.CP.insert(cp.begin(), cp.end());
        if (c.contains("aliases"))
            for (const auto& [k, v] : c.at("aliases").items())
                info.aliases[std::stoi(k)] = v.get<std::string>();
        if (c.contains("implications")) {
            const auto& imps = c.at("implications");
            for (std::size_t i = 0; i < imps.size(); ++i) {
                std::string where = "$.contract.implications[" + std::to_string(i) + "]";
                SatRule r;
                r.name = get_field<std::string>(imps[i], "name", where);
                r.mode = get_field<std::string>(imps[i], "mode", where);
                r.children = get_field<std::vector<std::string>>(imps[i], "children", where);
                info.implications.push_back(std::move(r));
            }
        }
        net.contract = std::move(info);
    }
    if (!j.contains("automata")) throw FormatError("$", "missing field 'automata'");
    const auto& auts = j.at("automata");
    if (!auts.is_array()) throw FormatError("$.automata", "expected an array");
    for (std::size_t ai = 0; ai < auts.size(); ++ai) {
        std::string awhere = "$.automata[" + std::to_string(ai) + "]";
        const auto& ja = auts[ai];
        TimedAutomaton a;
        a.name = ja.contains("name") ? get_field<std::string>(ja, "name", awhere)
                                     : "A" + std::to_string(ai);
        a.initial = get_field<int>(ja, "initial", awhere);
        if (!ja.contains("nodes")) throw FormatError(awhere, "missing field 'nodes'");
        const auto& nodes = ja.at("nodes");
        for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
            std::string nwhere = awhere + ".nodes[" + std::to_string(ni) + "]";
            const auto& jn = nodes[ni];
            Node n;
            n.id = get_field<int>(jn, "id", nwhere);
            n.invariant =
                parse_clock_constraint(get_field<std::string>(jn, "invariant", nwhere), net,
                                       nwhere + ".invariant");
            auto vs = get_field<std::vector<std::string>>(jn, "V", nwhere);
            auto ss = get_field<std::vector<std::string>>(jn, "S", nwhere);
            auto ps = get_field<std::vector<std::string>>(jn, "P", nwhere);
            n.V.insert(vs.begin(), vs.end());
            n.S.insert(ss.begin(), ss.end());
            n.P.insert(ps.begin(), ps.end());
            n.is_final = get_field<bool>(jn, "final", nwhere);
            a.nodes.push_back(std::move(n));
        }
        if (ja.contains("edges")) {
            const auto& edges = ja.at("edges");
            for (std::size_t ei = 0; ei < edges.size(); ++ei) {
                std::string ewhere = awhere + ".edges[" + std::to_string(ei) + "]";
                const auto& je = edges[ei];
                Edge e;
                e.src = get_field<int>(je, "src", ewhere);
                e.dst = get_field<int>(je, "dst", ewhere);
                e.clock_guard =
                    parse_clock_constraint(get_field<std::string>(je, "clock_guard", ewhere),
                                           net, ewhere + ".clock_guard");
                std::string dg = get_field<std::string>(je, "data_guard", ewhere);
                try {
                    e.data_guard = dg.empty() ? BoolExpr::mk_true() : parse_bool_expr(dg);
                } catch (const std::exception& ex) {
                    throw FormatError(ewhere + ".data_guard", ex.what());
                }
                e.label = parse_label(get_field<std::string>(je, "label", ewhere));
                for (const auto& r : get_field<std::vector<std::string>>(je, "resets", ewhere)) {
                    int ci = net.clock_index(r);
                    if (ci < 0) throw FormatError(ewhere + ".resets", "unknown clock '" + r + "'");
                    e.resets.push_back(ci);
                }
                e.urgent = get_field<bool>(je, "urgent", ewhere);
                a.edges.push_back(std::move(e));
            }
        }
        net.automata.push_back(std::move(a));
    }
    try {
        check_network(net);
    } catch (const NetworkError& ex) {
        throw FormatError("$", ex.what());
    }
    return net;
}

inline Network read_network(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& ex) {
        throw FormatError("$", ex.what());
    }
    return network_from_json(j);
}

inline Network read_network_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return read_network(ss.str());
}

// Structural identity used by the round-trip checks.
inline bool structurally_equal(const Network& a, const Network& b) {
    if (a.clocks != b.clocks || a.channels != b.channels ||
        a.hidden_channels != b.hidden_channels || a.extra_alphabet != b.extra_alphabet)
        return false;
    if (a.vars.decls().size() != b.vars.decls().size()) return false;
    for (std::size_t i = 0; i < a.vars.decls().size(); ++i)
        if (a.vars.decls()[i].name != b.vars.decls()[i].name ||
            a.vars.decls()[i].values != b.vars.decls()[i].values)
            return false;
    if (a.contract != b.contract) return false;
    if (a.automata.size() != b.automata.size()) return false;
    for (std::size_t i = 0; i < a.automata.size(); ++i) {
        const auto& x = a.automata[i];
        const auto& y = b.automata[i];
        if (x.name != y.name || x.initial != y.initial || x.nodes.size() != y.nodes.size() ||
            x.edges.size() != y.edges.size())
            return false;
        for (std::size_t k = 0; k < x.nodes.size(); ++k) {
            const auto& p = x.nodes[k];
            const auto& q = y.nodes[k];
            if (p.id != q.id || !(p.invariant == q.invariant) || p.V != q.V || p.S != q.S ||
                p.P != q.P || p.is_final != q.is_final)
                return false;
        }
        for (std::size_t k = 0; k < x.edges.size(); ++k) {
            const auto& p = x.edges[k];
            const auto& q = y.edges[k];
            if (p.src != q.src || p.dst != q.dst || !(p.clock_guard == q.clock_guard) ||
                !(p.label == q.label) || p.resets != q.resets || p.urgent != q.urgent)
                return false;
            if (!structurally_equal(p.data_guard, q.data_guard)) return false;
        }
    }
    return true;
}

}  // namespace cocheck
