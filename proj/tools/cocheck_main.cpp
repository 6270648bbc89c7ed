#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cocheck/compile.hpp"
#include "cocheck/dsl.hpp"
#include "cocheck/network_io.hpp"
#include "cocheck/report.hpp"

namespace {

using namespace cocheck;

// Diagnostics carry the exit code with them: 2 for anything that prevents the
// question from being answered (bad usage, unreadable or ill-formed inputs,
// undefined relations, too small a horizon).
struct CliError {
    int code;
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError{2, path + ": cannot open file"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

std::map<std::string, std::string> parse_env(const std::vector<std::string>& kvs) {
    std::map<std::string, std::string> env;
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw CliError{2, "--env expects name=value, got '" + kv + "'"};
        env[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return env;
}

// Loads a model from either source form: a contract (compiled on the fly) or
// an already-compiled network.
Network load_network(const std::string& path, const std::map<std::string, std::string>& env) {
    std::string text = read_file(path);
    if (has_suffix(path, ".cod")) {
        try {
            ContractDiagram d = parse_diagram(text);
            return compile_contract(d, env).network;
        } catch (const ParseError& e) {
            throw CliError{2, path + ":" + std::to_string(e.line) + ":" + std::to_string(e.col) +
                                  ": " + e.what()};
        } catch (const std::runtime_error& e) {
            throw CliError{2, path + ": " + std::string(e.what())};
        }
    }
    try {
        return read_network(text);
    } catch (const std::runtime_error& e) {
        throw CliError{2, path + ": " + std::string(e.what())};
    }
}

Implementation load_implementation(const std::string& path,
                                   const std::map<std::string, std::string>& env) {
    if (has_suffix(path, ".traces")) {
        try {
            return Implementation::from_traces(path, parse_trace_list(read_file(path)));
        } catch (const TraceFormatError& e) {
            throw CliError{2, path + ": " + std::string(e.what())};
        }
    }
    return Implementation::from_network(path, load_network(path, env));
}

TimedTrace load_trace(const std::string& path) {
    try {
        return parse_trace(read_file(path));
    } catch (const TraceFormatError& e) {
        throw CliError{2, path + ": " + std::string(e.what())};
    }
}

int resolve_horizon(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("COCHECK_HORIZON")) {
        try {
            int h = std::stoi(env);
            if (h > 0) return h;
        } catch (const std::exception&) {
        }
        throw CliError{2, std::string("COCHECK_HORIZON must be a positive integer, got '") + env +
                              "'"};
    }
    return 0;
}

ContractModel make_model(const std::string& path, const std::map<std::string, std::string>& env,
                         int horizon) {
    Network net = load_network(path, env);
    try {
        return ContractModel(std::move(net), horizon);
    } catch (const NetworkError& e) {
        throw CliError{2, path + ": " + std::string(e.what())};
    }
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

void emit(bool json, const nlohmann::json& j, const std::string& text, const Timer& timer) {
    if (json) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << text;
        std::cout << "elapsed: " << timer.ms() << " ms\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"contract verification over decorated timed automata"};
    app.require_subcommand(1);

    std::string contract_path, impl_path, impl2_path, trace_path, out_path;
    std::vector<std::string> env_kvs;
    int horizon_flag = 0;
    bool json = false;
    std::size_t limit = 0;

    auto add_common = [&](CLI::App* sub, bool with_horizon) {
        sub->add_flag("--json", json, "emit a JSON report");
        sub->add_option("--env", env_kvs, "fix a guard variable, name=value")
            ->type_name("k=v");
        if (with_horizon)
            sub->add_option("--horizon", horizon_flag,
                            "time budget for trace enumeration (default: sufficient horizon; "
                            "COCHECK_HORIZON overrides)")
                ->check(CLI::PositiveNumber);
    };

    CLI::App* compile = app.add_subcommand("compile", "compile a contract to a network");
    compile->add_option("contract", contract_path, "contract file (.cod)")->required();
    compile->add_option("-o,--output", out_path, "output file (default: stdout)");
    compile->add_option("--env", env_kvs, "fix a guard variable, name=value")->type_name("k=v");

    CLI::App* check = app.add_subcommand("check", "decide contract consistency");
    check->add_option("contract", contract_path, "contract (.cod) or network (.nta)")->required();
    add_common(check, true);

    CLI::App* conf = app.add_subcommand("conf", "decide implementation conformance");
    conf->add_option("contract", contract_path, "contract (.cod) or network (.nta)")->required();
    conf->add_option("impl", impl_path, "implementation (.nta or .traces)")->required();
    add_common(conf, true);

    CLI::App* compare = app.add_subcommand("compare", "order two implementations by permission");
    compare->add_option("contract", contract_path, "contract (.cod) or network (.nta)")
        ->required();
    compare->add_option("impl1", impl_path, "first implementation (.nta or .traces)")->required();
    compare->add_option("impl2", impl2_path, "second implementation (.nta or .traces)")
        ->required();
    add_common(compare, true);

    CLI::App* trace = app.add_subcommand("trace", "evaluate one timed trace against a model");
    trace->add_option("model", contract_path, "contract (.cod) or network (.nta)")->required();
    trace->add_option("trace", trace_path, "trace file (.trace)")->required();
    add_common(trace, false);

    CLI::App* enumerate = app.add_subcommand("enumerate", "list maximal traces up to a horizon");
    enumerate->add_option("model", contract_path, "contract (.cod) or network (.nta)")
        ->required();
    enumerate->add_option("--limit", limit, "print at most this many traces");
    add_common(enumerate, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    Timer timer;
    auto env = parse_env(env_kvs);
    int horizon = resolve_horizon(horizon_flag);

    if (compile->parsed()) {
        Network net = load_network(contract_path, env);
        if (out_path.empty())
            std::cout << write_network(net);
        else
            write_network_file(net, out_path);
        return 0;
    }

    if (check->parsed()) {
        ContractModel m = make_model(contract_path, env, horizon);
        ConsistencyVerdict v = check_consistency(m);
        emit(json, consistency_json(v), consistency_text(v), timer);
        return v.holds ? 0 : 1;
    }

    if (conf->parsed()) {
        ContractModel m = make_model(contract_path, env, horizon);
        Implementation impl = load_implementation(impl_path, env);
        ConformanceVerdict v = check_conformance(m, impl);
        emit(json, conformance_json(v), conformance_text(v), timer);
        return v.holds ? 0 : 1;
    }

    if (compare->parsed()) {
        ContractModel m = make_model(contract_path, env, horizon);
        Implementation i1 = load_implementation(impl_path, env);
        Implementation i2 = load_implementation(impl2_path, env);
        PreorderVerdict v = compare_permissions(m, i1, i2);
        emit(json, preorder_json(v), preorder_text(v), timer);
        return v.comparable() ? 0 : 1;
    }

    if (trace->parsed()) {
        Network net = load_network(contract_path, env);
        TimedTrace t = load_trace(trace_path);
        Exec ex(net);
        try {
            TraceRun r = run_trace(ex, t);
            if (!r.in_network) {
                emit(json, trace_json(t, r, nullptr), trace_text(t, r, nullptr), timer);
                return 1;
            }
            TraceClass cls = classify_run(ex, r);
            emit(json, trace_json(t, r, &cls), trace_text(t, r, &cls), timer);
            return 0;
        } catch (const UnknownActionError& e) {
            throw CliError{2, trace_path + ": " + std::string(e.what())};
        }
    }

    if (enumerate->parsed()) {
        Network net = load_network(contract_path, env);
        Exec ex(net);
        int h = horizon > 0 ? horizon : sufficient_horizon(net);
        std::vector<EnumeratedTrace> ts = enumerate_maximal_traces(ex, h);
        std::vector<EnumeratedTrace> shown = ts;
        if (limit > 0 && shown.size() > limit) shown.resize(limit);
        nlohmann::json j = enumerate_json(shown, h);
        j["count"] = ts.size();
        std::string text = enumerate_text(shown, h);
        if (shown.size() < ts.size())
            text += "(" + std::to_string(ts.size() - shown.size()) + " more not shown)\n";
        emit(json, j, text, timer);
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CliError& e) {
        std::cerr << "cocheck: " << e.message << "\n";
        return e.code;
    } catch (const cocheck::ContractInconsistent& e) {
        std::cerr << "cocheck: " << e.what() << "\n";
        return 2;
    } catch (const cocheck::NotConformant& e) {
        std::cerr << "cocheck: " << e.what() << "\n";
        return 2;
    } catch (const cocheck::HorizonTooSmall& e) {
        std::cerr << "cocheck: " << e.what() << " (raise --horizon or COCHECK_HORIZON)\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "cocheck: " << e.what() << "\n";
        return 2;
    }
}
