#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <random>
#include <vector>

#include "cocheck/zone.hpp"

using cocheck::Zone;

namespace {

// ── full-closure mirror ──────────────────────────────────────────────────────
//
// Same matrix encoding as Zone, but every operation runs a complete
// Floyd-Warshall pass instead of the incremental tightening in the library.
// Canonical forms are unique, so after each operation the two matrices must
// agree entrywise.

struct Mirror {
    int n;
    std::vector<std::int64_t> m;
    bool empty = false;

    static constexpr std::int64_t INF = Zone::INF;

    std::int64_t& at(int i, int j) { return m[static_cast<std::size_t>(i * (n + 1) + j)]; }
    std::int64_t at(int i, int j) const { return m[static_cast<std::size_t>(i * (n + 1) + j)]; }

    static Mirror universe(int clocks) {
        Mirror z{clocks, std::vector<std::int64_t>(static_cast<std::size_t>((clocks + 1) * (clocks + 1)))};
        for (int i = 0; i <= clocks; ++i)
            for (int j = 0; j <= clocks; ++j) z.at(i, j) = (i == j || i == 0) ? 0 : INF;
        return z;
    }
    static Mirror zero(int clocks) {
        Mirror z{clocks, std::vector<std::int64_t>(static_cast<std::size_t>((clocks + 1) * (clocks + 1)), 0)};
        return z;
    }

    void close() {
        for (int k = 0; k <= n; ++k)
            for (int i = 0; i <= n; ++i) {
                if (at(i, k) == INF) continue;
                for (int j = 0; j <= n; ++j) {
                    if (at(k, j) == INF) continue;
                    std::int64_t via = at(i, k) + at(k, j);
                    if (via < at(i, j)) at(i, j) = via;
                }
            }
        for (int i = 0; i <= n; ++i)
            if (at(i, i) < 0) empty = true;
    }

    void constrain(int i, int j, std::int64_t c) {
        if (empty) return;
        if (c < at(i, j)) at(i, j) = c;
        close();
    }
    void up() {
        if (empty) return;
        for (int i = 1; i <= n; ++i) at(i, 0) = INF;
    }
    void reset(int clock) {
        if (empty) return;
        for (int j = 0; j <= n; ++j) {
            at(clock, j) = at(0, j);
            at(j, clock) = at(j, 0);
        }
        at(clock, clock) = 0;
    }
    void intersect(const Mirror& o) {
        if (empty) return;
        if (o.empty) {
            empty = true;
            return;
        }
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                if (o.at(i, j) < at(i, j)) at(i, j) = o.at(i, j);
        close();
    }
    bool contains(const std::vector<std::int32_t>& v) const {
        if (empty) return false;
        auto val = [&](int i) { return i == 0 ? 0 : static_cast<std::int64_t>(v[static_cast<std::size_t>(i - 1)]); };
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                if (at(i, j) != INF && val(i) - val(j) > at(i, j)) return false;
        return true;
    }
};

bool same_matrix(const Zone& z, const Mirror& m) {
    for (int i = 0; i <= m.n; ++i)
        for (int j = 0; j <= m.n; ++j)
            if (z.bound(i, j) != m.at(i, j)) return false;
    return true;
}

}  // namespace

TEST_CASE("zone basics", "[zone]") {
    Zone u = Zone::universe(2);
    Zone o = Zone::zero(2);

    CHECK(u.contains({0, 0}));
    CHECK(u.contains({5, 13}));
    CHECK(o.contains({0, 0}));
    CHECK_FALSE(o.contains({0, 1}));
    CHECK(u.includes(o));
    CHECK_FALSE(o.includes(u));
    CHECK(u.includes(u));
    CHECK(u == Zone::universe(2));

    SECTION("constrain tightens membership") {
        u.constrain_upper(1, 4);   // x1 <= 4
        u.constrain_lower(2, 2);   // x2 >= 2
        CHECK(u.contains({4, 2}));
        CHECK(u.contains({0, 7}));
        CHECK_FALSE(u.contains({5, 2}));
        CHECK_FALSE(u.contains({4, 1}));
        CHECK_FALSE(u.empty());
    }

    SECTION("contradictory bounds empty the zone") {
        u.constrain_upper(1, 3);
        u.constrain_lower(1, 5);
        CHECK(u.empty());
        CHECK_FALSE(u.contains({4, 0}));
        CHECK(Zone::universe(2).includes(u));
        CHECK(u.includes(u));
    }

    SECTION("up removes upper bounds only") {
        o.up();
        CHECK(o.contains({3, 3}));
        CHECK_FALSE(o.contains({3, 4}));  // difference x1 - x2 = 0 survives
        o.constrain_upper(1, 10);
        CHECK(o.contains({10, 10}));
        CHECK_FALSE(o.contains({11, 11}));
    }

    SECTION("reset pins one clock and keeps the rest") {
        Zone z = Zone::universe(2);
        z.constrain_eq(1, 3);
        z.constrain_eq(2, 5);
        z.reset(1);
        CHECK(z.contains({0, 5}));
        CHECK_FALSE(z.contains({3, 5}));
        CHECK_FALSE(z.contains({0, 4}));
    }

    SECTION("intersect is meet") {
        Zone a = Zone::universe(1);
        a.constrain_upper(1, 6);
        Zone b = Zone::universe(1);
        b.constrain_lower(1, 4);
        a.intersect(b);
        CHECK(a.contains({4}));
        CHECK(a.contains({6}));
        CHECK_FALSE(a.contains({3}));
        CHECK_FALSE(a.contains({7}));
        b.constrain_upper(1, 3);
        CHECK(b.empty());
        a.intersect(b);
        CHECK(a.empty());
    }
}

TEST_CASE("zone operations agree with a full-closure mirror", "[zone]") {
    std::mt19937 rng(20240817u);
    auto roll = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };

    int sequences = 0, steps = 0, empties = 0;
    for (int iter = 0; iter < 1200; ++iter) {
        int clocks = 2 + roll(3);
        Zone z = (iter % 2 == 0) ? Zone::universe(clocks) : Zone::zero(clocks);
        Mirror m = (iter % 2 == 0) ? Mirror::universe(clocks) : Mirror::zero(clocks);
        ++sequences;

        int ops = 3 + roll(12);
        for (int k = 0; k < ops; ++k) {
            switch (roll(6)) {
                case 0: {
                    int c = 1 + roll(clocks), b = roll(9);
                    z.constrain_upper(c, b);
                    m.constrain(c, 0, b);
                    break;
                }
                case 1: {
                    int c = 1 + roll(clocks), b = roll(9);
                    z.constrain_lower(c, b);
                    m.constrain(0, c, -b);
                    break;
                }
                case 2: {
                    int i = roll(clocks + 1), j = roll(clocks + 1);
                    if (i == j) break;
                    int b = roll(13) - 4;
                    z.constrain(i, j, b);
                    m.constrain(i, j, b);
                    break;
                }
                case 3:
                    z.up();
                    m.up();
                    break;
                case 4: {
                    int c = 1 + roll(clocks);
                    z.reset(c);
                    m.reset(c);
                    break;
                }
                case 5: {
                    Zone zo = Zone::universe(clocks);
                    Mirror mo = Mirror::universe(clocks);
                    for (int extra = 0; extra < 2; ++extra) {
                        int c = 1 + roll(clocks), b = roll(9);
                        if (roll(2)) {
                            zo.constrain_upper(c, b);
                            mo.constrain(c, 0, b);
                        } else {
                            zo.constrain_lower(c, b);
                            mo.constrain(0, c, -b);
                        }
                    }
                    z.intersect(zo);
                    m.intersect(mo);
                    break;
                }
            }
            ++steps;
            REQUIRE(z.empty() == m.empty);
            if (z.empty()) {
                ++empties;
                break;
            }
            REQUIRE(same_matrix(z, m));

            for (int p = 0; p < 8; ++p) {
                std::vector<std::int32_t> pt(static_cast<std::size_t>(clocks));
                for (auto& v : pt) v = roll(11);
                REQUIRE(z.contains(pt) == m.contains(pt));
            }
        }
    }
    CHECK(sequences == 1200);
    CHECK(steps > 3000);
    CHECK(empties > 100);  // the mix reaches both fates
}

TEST_CASE("zone inclusion matches sampled membership", "[zone]") {
    std::mt19937 rng(7u);
    auto roll = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };

    for (int iter = 0; iter < 300; ++iter) {
        int clocks = 2 + roll(2);
        auto make = [&] {
            Zone z = Zone::universe(clocks);
            int ops = roll(5);
            for (int k = 0; k < ops; ++k) {
                int c = 1 + roll(clocks), b = roll(8);
                if (roll(2))
                    z.constrain_upper(c, b);
                else
                    z.constrain_lower(c, b);
                if (roll(3) == 0) z.up();
                if (roll(3) == 0) z.reset(1 + roll(clocks));
            }
            return z;
        };
        Zone a = make(), b = make();

        if (a.includes(b)) {
            for (int p = 0; p < 40; ++p) {
                std::vector<std::int32_t> pt(static_cast<std::size_t>(clocks));
                for (auto& v : pt) v = roll(10);
                if (b.contains(pt)) REQUIRE(a.contains(pt));
            }
        }
        Zone meet = a;
        meet.intersect(b);
        CHECK(a.includes(meet));
        CHECK(b.includes(meet));
        Zone meet2 = b;
        meet2.intersect(a);
        CHECK(meet == meet2);

        Zone again = a;
        again.up();
        Zone twice = again;
        twice.up();
        CHECK(again == twice);  // up is idempotent
        Zone r1 = a;
        r1.reset(1);
        Zone r2 = r1;
        r2.reset(1);
        CHECK(r1 == r2);  // so is reset
    }
}
