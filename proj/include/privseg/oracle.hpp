#pragma once
// Brute-force ground truth at tiny scale: enumerate every lattice
// segmentation (masses in units of 1/D) whose parts sit in their price's
// optimality region, emit each one's achieved utility point, and check the
// cloud against a polygon. Integer mass tables make aggregation exact; floats
// appear only when utilities are evaluated.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "privseg/core.hpp"
#include "privseg/geometry.hpp"
#include "privseg/measure.hpp"
#include "privseg/pricing.hpp"

namespace privseg {

inline constexpr std::uint64_t kOracleCap = 10000000;  // candidate assignments per run

struct GridCloud {
    std::vector<SurplusPoint> points;
    std::uint64_t denominator = 0;
    std::uint64_t segment_budget = 0;  // max nonempty parts per assignment
    std::uint64_t candidates = 0;      // assignments actually enumerated
    std::uint64_t cap = kOracleCap;
};

namespace detail {

// All ways to write n as an ordered sum of parts nonnegative integers.
inline void compositions_rec(int n, std::size_t parts, std::vector<int>& cur,
                             std::vector<std::vector<int>>& out) {
    if (cur.size() + 1 == parts) {
        cur.push_back(n);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int take = 0; take <= n; ++take) {
        cur.push_back(take);
        compositions_rec(n - take, parts, cur, out);
        cur.pop_back();
    }
}

inline std::vector<std::vector<int>> compositions(int n, std::size_t parts) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    compositions_rec(n, parts, cur, out);
    return out;
}

}  // namespace detail

// Enumerate lattice segmentations of x* at resolution 1/D: each value level's
// D*x*(v_k) units are split across the K price rows, every nonempty row must
// lie in its price's region, and the achieved point is beta*shift + (1-beta)*
// (fixed-price utilities). The shift vector is supplied by the caller so a
// Monte Carlo estimate can be shared with the polygon under test.
inline GridCloud enumerate_cloud(const ValueGrid& grid, const Market& x_star, double beta,
                                 std::uint64_t D, const ShiftVector& shift,
                                 std::size_t max_segments = 0) {
    check_compatible(grid, x_star);
    std::size_t K = grid.size();
    if (K > 3) throw std::invalid_argument("enumerate_cloud: only K <= 3 is enumerable");
    if (D == 0 || D > 20) throw std::invalid_argument("enumerate_cloud: lattice denominator outside 1..20");
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("enumerate_cloud: beta outside [0,1)");
    if (max_segments == 0) max_segments = K;

    std::vector<int> counts(K);
    std::uint64_t check = 0;
    for (std::size_t k = 0; k < K; ++k) {
        double scaled = x_star[k] * static_cast<double>(D);
        long long c = std::llround(scaled);
        if (c < 0 || std::abs(scaled - static_cast<double>(c)) > 1e-9)
            throw std::invalid_argument("enumerate_cloud: aggregate is not on the 1/D lattice");
        counts[k] = static_cast<int>(c);
        check += static_cast<std::uint64_t>(c);
    }
    if (check != D) throw std::invalid_argument("enumerate_cloud: lattice masses do not sum to D");

    std::vector<std::vector<std::vector<int>>> level(K);
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < K; ++k) {
        level[k] = detail::compositions(counts[k], K);
        std::uint64_t sz = level[k].size();
        if (total > kOracleCap / sz)
            throw NumericalFailure("enumerate_cloud: candidate count exceeds the enumeration cap");
        total *= sz;
    }

    GridCloud cloud;
    cloud.denominator = D;
    cloud.segment_budget = max_segments;
    double Dd = static_cast<double>(D);

    std::vector<std::size_t> idx(K, 0);
    std::vector<double> mass(K), y(K);
    for (;;) {
        ++cloud.candidates;
        // Row totals in lattice units for this assignment.
        bool ok = true;
        std::size_t nonempty = 0;
        SurplusPoint primed;
        for (std::size_t i = 0; i < K && ok; ++i) {
            int t_i = 0;
            for (std::size_t k = 0; k < K; ++k) t_i += level[k][idx[k]][i];
            if (t_i == 0) continue;
            if (++nonempty > max_segments) {
                ok = false;
                break;
            }
            double ti = static_cast<double>(t_i);
            double acc = 0.0;
            for (std::size_t k = K; k-- > 0;) {
                mass[k] = static_cast<double>(level[k][idx[k]][i]) / ti;
                acc += mass[k];
                y[k] = acc;
            }
            if (!polytope_row_feasible(grid, beta, i, y)) {
                ok = false;
                break;
            }
            double gamma = ti / Dd;
            double uc = 0.0;
            for (std::size_t k = i + 1; k < K; ++k) uc += mass[k] * (grid[k] - grid[i]);
            primed.consumer += gamma * uc;
            primed.producer += gamma * grid[i] * y[i];
        }
        if (ok)
            cloud.points.push_back({beta * shift.point.consumer + (1.0 - beta) * primed.consumer,
                                    beta * shift.point.producer + (1.0 - beta) * primed.producer});

        std::size_t k = 0;
        while (k < K && ++idx[k] == level[k].size()) idx[k++] = 0;
        if (k == K) break;
    }
    return cloud;
}

struct ContainmentReport {
    std::uint64_t violations = 0;  // points outside the polygon by more than the margin
    double max_excess = 0.0;       // worst signed distance; negative means strictly inside
};

inline double signed_distance(const SurplusPolygon& poly, const SurplusPoint& p) {
    double d = poly.distance_to(p);
    if (d > 0.0) return d;
    // Inside: depth below the boundary, reported negative.
    const std::vector<SurplusPoint>& v = poly.vertices();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
        best = std::min(best, detail::dist_point_segment(p, v[i], v[(i + 1) % v.size()]));
    return -best;
}

inline ContainmentReport containment_report(const GridCloud& cloud, const SurplusPolygon& poly,
                                            double margin = 1e-6) {
    ContainmentReport rep;
    rep.max_excess = -std::numeric_limits<double>::infinity();
    for (const SurplusPoint& p : cloud.points) {
        double d = signed_distance(poly, p);
        if (d > margin) ++rep.violations;
        rep.max_excess = std::max(rep.max_excess, d);
    }
    return rep;
}

}  // namespace privseg
