#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "cocheck/compile.hpp"
#include "cocheck/dsl.hpp"
#include "cocheck/trace_eval.hpp"
#include "generators.hpp"
#include "oracle.hpp"
#include "testutil.hpp"

using namespace cocheck;

namespace {

// ── comparison against the direct diagram interpreter ───────────────────────

std::string disagreement(const Exec& ex, const refsem::Interp& oracle, const TimedTrace& t) {
    TraceRun run = run_trace(ex, t);
    refsem::Interp::Run orun = oracle.run(t);
    auto tag = [&](const std::string& what) { return what + " on " + format_trace_inline(t); };
    if (run.in_network != orun.accepted) return tag("acceptance differs");
    if (run.families.size() != orun.families.size()) return tag("boundary count differs");
    if (!run.in_network && run.failed_event != orun.failed_event)
        return tag("failed event differs");
    for (std::size_t i = 0; i < run.families.size(); ++i)
        if (!refsem::same_families(run.families[i], orun.families[i]))
            return tag("families differ at boundary " + std::to_string(i));
    return "";
}

std::size_t sweep_contract(const ContractDiagram& d) {
    auto compiled = compile_contract(d, {});
    Exec ex(compiled.network);
    refsem::Interp oracle(d);
    auto maximal = enumerate_maximal_traces(ex, sufficient_horizon(compiled.network));
    std::size_t checked = 0;
    for (const auto& et : maximal) {
        REQUIRE(disagreement(ex, oracle, et.trace) == "");
        ++checked;
    }
    // Perturb maximal traces so rejected and truncated runs are exercised too.
    std::size_t muts = 0;
    for (std::size_t i = 0; i < maximal.size() && muts < 600; i += 3, muts += 3) {
        TimedTrace t = maximal[i].trace;
        if (t.empty()) continue;
        TimedTrace shifted = t;
        shifted[shifted.size() / 2].delay += 1;
        REQUIRE(disagreement(ex, oracle, shifted) == "");
        TimedTrace flipped = t;
        flipped[flipped.size() / 2].action.complement =
            !flipped[flipped.size() / 2].action.complement;
        REQUIRE(disagreement(ex, oracle, flipped) == "");
        checked += 2;
        if (t.size() > 1) {
            TimedTrace cut(t.begin(), t.begin() + static_cast<long>(t.size() - 1));
            REQUIRE(disagreement(ex, oracle, cut) == "");
            ++checked;
        }
    }
    return checked;
}

}  // namespace

TEST_CASE("network runs agree with the diagram interpreter on shipped contracts",
          "[oracle]") {
    SECTION("payment and shipment") {
        auto d = parse_diagram(testutil::slurp(testutil::example("payment_shipment.cod")));
        CHECK(sweep_contract(d) > 1200);
    }
    SECTION("inconsistent contract") {
        auto d = parse_diagram(testutil::slurp(testutil::example("inconsistent.cod")));
        CHECK(sweep_contract(d) > 50);
    }
}

TEST_CASE("network runs agree with the diagram interpreter on random contracts",
          "[oracle]") {
    std::size_t checked = 0;
    for (unsigned seed = 1; seed <= 32; ++seed) {
        CAPTURE(seed);
        std::mt19937 rng(seed);
        ContractDiagram d = gen::random_diagram(rng);
        INFO(print_diagram(d));
        auto compiled = compile_contract(d, {});
        Exec ex(compiled.network);
        refsem::Interp oracle(d);
        std::vector<EnumeratedTrace> maximal =
            enumerate_maximal_traces(ex, sufficient_horizon(compiled.network));
        std::size_t step = maximal.size() > 200 ? maximal.size() / 200 : 1;
        for (std::size_t i = 0; i < maximal.size(); i += step) {
            REQUIRE(disagreement(ex, oracle, maximal[i].trace) == "");
            ++checked;
        }
        for (int m = 0; m < 60; ++m) {
            std::size_t i = maximal.empty() ? 0
                                            : std::uniform_int_distribution<std::size_t>(
                                                  0, maximal.size() - 1)(rng);
            TimedTrace base = maximal.empty() ? TimedTrace{} : maximal[i].trace;
            REQUIRE(disagreement(ex, oracle,
                                 gen::mutate_trace(rng, base, d.declared_actions)) == "");
            REQUIRE(disagreement(ex, oracle,
                                 gen::random_trace(rng, d.declared_actions, 4)) == "");
            checked += 2;
        }
    }
    CHECK(checked > 4000);
}
