#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace cocheck {

// ── difference-bound matrices ───────────────────────────────────────────────
//
// Zones over clocks x1..xn with reference clock x0 = 0. Entry (i,j) bounds
// xi - xj <= m[i][j]; all comparisons are non-strict, matching the closed
// integer-time semantics used throughout. Every public operation leaves the
// matrix in canonical (all-pairs tightest) form, maintained incrementally --
// a full shortest-path closure never runs here, which keeps the independent
// closure oracle in the tests meaningful.

class Zone {
public:
    static constexpr std::int32_t INF = std::numeric_limits<std::int32_t>::max() / 2;

    // All clock values >= 0, otherwise unconstrained.
    static Zone universe(int clocks) {
        Zone z(clocks);
        for (int i = 0; i <= clocks; ++i)
            for (int j = 0; j <= clocks; ++j) z.at(i, j) = (i == j || i == 0) ? 0 : INF;
        return z;
    }

    // The single point with all clocks zero.
    static Zone zero(int clocks) {
        Zone z(clocks);
        for (int i = 0; i <= clocks; ++i)
            for (int j = 0; j <= clocks; ++j) z.at(i, j) = 0;
        return z;
    }

    int clocks() const { return n_; }
    bool empty() const { return empty_; }

    std::int32_t bound(int i, int j) const { return at(i, j); }

    // Adds xi - xj <= c and re-tightens affected entries.
    void constrain(int i, int j, std::int32_t c) {
        if (empty_) return;
        if (at(j, i) != INF && at(j, i) + c < 0) {
            empty_ = true;
            return;
        }
        if (c >= at(i, j)) return;
        at(i, j) = c;
        for (int p = 0; p <= n_; ++p) {
            if (at(p, i) == INF) continue;
            for (int q = 0; q <= n_; ++q) {
                if (at(j, q) == INF) continue;
                std::int32_t via = at(p, i) + c + at(j, q);
                if (via < at(p, q)) at(p, q) = via;
            }
        }
        for (int p = 0; p <= n_; ++p)
            if (at(p, p) < 0) {
                empty_ = true;
                return;
            }
    }

    void constrain_upper(int clock, std::int32_t c) { constrain(clock, 0, c); }   // x <= c
    void constrain_lower(int clock, std::int32_t c) { constrain(0, clock, -c); }  // x >= c
    void constrain_eq(int clock, std::int32_t c) {
        constrain_upper(clock, c);
        constrain_lower(clock, c);
    }

    // Removes upper bounds: time may elapse arbitrarily.
    void up() {
        if (empty_) return;
        for (int i = 1; i <= n_; ++i) at(i, 0) = INF;
    }

    void reset(int clock) {
        if (empty_) return;
        for (int j = 0; j <= n_; ++j) {
            at(clock, j) = at(0, j);
            at(j, clock) = at(j, 0);
        }
        at(clock, clock) = 0;
    }

    void intersect(const Zone& other) {
        if (empty_) return;
        if (other.empty_) {
            empty_ = true;
            return;
        }
        for (int i = 0; i <= n_; ++i)
            for (int j = 0; j <= n_; ++j)
                if (other.at(i, j) < INF) constrain(i, j, other.at(i, j));
    }

    bool contains(const std::vector<std::int32_t>& v) const {
        if (empty_) return false;
        auto val = [&](int i) { return i == 0 ? 0 : v[static_cast<std::size_t>(i - 1)]; };
        for (int i = 0; i <= n_; ++i)
            for (int j = 0; j <= n_; ++j)
                if (at(i, j) != INF && val(i) - val(j) > at(i, j)) return false;
        return true;
    }

    bool includes(const Zone& other) const {
        if (other.empty_) return true;
        if (empty_) return false;
        for (int i = 0; i <= n_; ++i)
            for (int j = 0; j <= n_; ++j)
                if (at(i, j) < other.at(i, j)) return false;
        return true;
    }

    bool operator==(const Zone& other) const {
        if (empty_ || other.empty_) return empty_ == other.empty_;
        return m_ == other.m_;
    }

    std::string to_string() const {
        if (empty_) return "(empty)";
        std::string s;
        for (int i = 0; i <= n_; ++i) {
            for (int j = 0; j <= n_; ++j) {
                if (j) s += ' ';
                s += at(i, j) == INF ? "inf" : std::to_string(at(i, j));
            }
            s += '\n';
        }
        return s;
    }

private:
    explicit Zone(int clocks) : n_(clocks), m_(static_cast<std::size_t>((clocks + 1) * (clocks + 1)), 0) {}

    std::int32_t& at(int i, int j) { return m_[static_cast<std::size_t>(i * (n_ + 1) + j)]; }
    const std::int32_t& at(int i, int j) const {
        return m_[static_cast<std::size_t>(i * (n_ + 1) + j)];
    }

    int n_;
    std::vector<std::int32_t> m_;
    bool empty_ = false;
};

}  // namespace cocheck
