#pragma once
// The constraint polytope over segment rows z(i,j), its exact 2-D shadow in
// (consumer, producer) space via an adaptive support-function sweep, the
// mask-rate affine map between the shadow and the achievable set, and the
// two-level closed forms used as oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "privseg/core.hpp"
#include "privseg/lp.hpp"
#include "privseg/lp_exact.hpp"
#include "privseg/measure.hpp"
#include "privseg/pricing.hpp"

namespace privseg {

// Raised when an LP that must be solvable is not, or an iteration/call cap
// trips: callers map it to the "numerical failure" exit path.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kVertexTol = 1e-9;     // dedup and collinear pruning, utility units
inline constexpr double kSweepAngleTol = 1e-6; // radians; bisection floor
inline constexpr int kSweepLpCap = 10000;

inline std::size_t zidx(std::size_t i, std::size_t j, std::size_t K) { return i * K + j; }

// Constraint system whose feasible points are weighted segment rows
// z(i,j) = gamma_i * y_i(j): row shapes, pricing feasibility, aggregation.
struct PolytopeLP {
    ValueGrid grid;
    Market x_star;
    double beta = 0.0;
    LinearProgram lp;                  // constraints only; objective left zero
    std::vector<double> consumer_map;  // K*K coefficients of consumer surplus
    std::vector<double> producer_map;
};

inline PolytopeLP build_polytope(const ValueGrid& grid, const Market& x_star, double beta) {
    check_compatible(grid, x_star);
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("build_polytope: beta outside [0,1); beta=1 has a dedicated path");
    std::size_t K = grid.size();
    PolytopeLP P{grid, x_star, beta, LinearProgram(K * K), {}, {}};

    // (a) each row nonincreasing and nonnegative.
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j + 1 < K; ++j) {
            std::vector<double> row(K * K, 0.0);
            row[zidx(i, j + 1, K)] = 1.0;
            row[zidx(i, j, K)] = -1.0;
            P.lp.add_le(std::move(row), 0.0);
        }
        std::vector<double> row(K * K, 0.0);
        row[zidx(i, K - 1, K)] = -1.0;
        P.lp.add_le(std::move(row), 0.0);
    }

    // (b) price v_i optimal within row i:
    //     v_i z(i,i) - v_j z(i,j) >= beta/(K(1-beta)) * (w_j - w_i) * z(i,0).
    // Coefficients accumulate because j=0 touches z(i,0) twice.
    double coef = beta / (static_cast<double>(K) * (1.0 - beta));
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            std::vector<double> row(K * K, 0.0);
            if (i != j) {
                row[zidx(i, 0, K)] += coef * (grid.weight(j) - grid.weight(i));
                row[zidx(i, i, K)] -= grid[i];
                row[zidx(i, j, K)] += grid[j];
            }
            P.lp.add_le(std::move(row), 0.0);
        }

    // (c) rows aggregate to the declared market's complementary CDF.
    std::vector<double> y_star = x_star.ccdf();
    for (std::size_t j = 0; j < K; ++j) {
        std::vector<double> row(K * K, 0.0);
        for (std::size_t i = 0; i < K; ++i) row[zidx(i, j, K)] = 1.0;
        P.lp.add_eq(std::move(row), y_star[j]);
    }

    P.consumer_map.assign(K * K, 0.0);
    P.producer_map.assign(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        P.producer_map[zidx(i, i, K)] = grid[i];
        for (std::size_t j = i + 1; j < K; ++j)
            P.consumer_map[zidx(i, j, K)] = grid[j] - grid[j - 1];
    }
    return P;
}

inline SurplusPoint surplus_objective(const PolytopeLP& P, const std::vector<double>& z) {
    if (z.size() != P.consumer_map.size())
        throw std::invalid_argument("surplus_objective: z has wrong length");
    SurplusPoint s;
    for (std::size_t k = 0; k < z.size(); ++k) {
        s.consumer += P.consumer_map[k] * z[k];
        s.producer += P.producer_map[k] * z[k];
    }
    return s;
}

namespace detail {

inline double cross(const SurplusPoint& o, const SurplusPoint& a, const SurplusPoint& b) {
    return (a.consumer - o.consumer) * (b.producer - o.producer) -
           (a.producer - o.producer) * (b.consumer - o.consumer);
}

inline bool lex_less(const SurplusPoint& a, const SurplusPoint& b) {
    if (a.consumer != b.consumer) return a.consumer < b.consumer;
    return a.producer < b.producer;
}

inline double dist2(const SurplusPoint& a, const SurplusPoint& b) {
    double dx = a.consumer - b.consumer, dy = a.producer - b.producer;
    return dx * dx + dy * dy;
}

inline double dist_point_segment(const SurplusPoint& p, const SurplusPoint& a,
                                 const SurplusPoint& b) {
    double vx = b.consumer - a.consumer, vy = b.producer - a.producer;
    double wx = p.consumer - a.consumer, wy = p.producer - a.producer;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? std::clamp((wx * vx + wy * vy) / len2, 0.0, 1.0) : 0.0;
    double dx = wx - t * vx, dy = wy - t * vy;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace detail

// Convex polygon in utility space, counterclockwise, first vertex
// lexicographically smallest. Degenerate shadows keep 1 or 2 vertices.
// Witnesses (feasible z per vertex) ride along when the builder has them.
class SurplusPolygon {
public:
    SurplusPolygon() = default;

    static SurplusPolygon from_points(std::vector<SurplusPoint> pts,
                                      std::vector<std::vector<double>> wits = {}) {
        if (pts.empty()) throw std::invalid_argument("SurplusPolygon: no points");
        if (!wits.empty() && wits.size() != pts.size())
            throw std::invalid_argument("SurplusPolygon: witness count mismatch");
        if (wits.empty()) wits.assign(pts.size(), {});

        // Dedup within kVertexTol; first occurrence keeps its witness.
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            bool dup = false;
            for (std::size_t k : keep)
                if (std::abs(pts[i].consumer - pts[k].consumer) <= kVertexTol &&
                    std::abs(pts[i].producer - pts[k].producer) <= kVertexTol) {
                    dup = true;
                    break;
                }
            if (!dup) keep.push_back(i);
        }

        std::vector<std::size_t> order = keep;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return detail::lex_less(pts[a], pts[b]);
        });

        std::vector<std::size_t> hull;
        if (order.size() <= 2) {
            hull = order;
        } else {
            auto build = [&](auto begin, auto end) {
                std::vector<std::size_t> chain;
                for (auto it = begin; it != end; ++it) {
                    while (chain.size() >= 2 &&
                           detail::cross(pts[chain[chain.size() - 2]], pts[chain.back()],
                                         pts[*it]) <= 0.0)
                        chain.pop_back();
                    chain.push_back(*it);
                }
                return chain;
            };
            std::vector<std::size_t> lower = build(order.begin(), order.end());
            std::vector<std::size_t> upper = build(order.rbegin(), order.rend());
            hull = std::move(lower);
            hull.pop_back();
            for (std::size_t k = 0; k + 1 < upper.size(); ++k) hull.push_back(upper[k]);
        }

        // LP noise can leave sub-tolerance bulges the exact predicate keeps;
        // prune vertices closer than kVertexTol to the chord of their neighbors.
        bool changed = hull.size() >= 3;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < hull.size() && hull.size() >= 3; ++i) {
                const SurplusPoint& a = pts[hull[(i + hull.size() - 1) % hull.size()]];
                const SurplusPoint& c = pts[hull[(i + 1) % hull.size()]];
                if (detail::dist_point_segment(pts[hull[i]], a, c) <= kVertexTol) {
                    hull.erase(hull.begin() + static_cast<std::ptrdiff_t>(i));
                    changed = true;
                    break;
                }
            }
        }

        std::size_t start = 0;
        for (std::size_t i = 1; i < hull.size(); ++i)
            if (detail::lex_less(pts[hull[i]], pts[hull[start]])) start = i;
        std::rotate(hull.begin(), hull.begin() + static_cast<std::ptrdiff_t>(start), hull.end());

        SurplusPolygon poly;
        for (std::size_t idx : hull) {
            poly.verts_.push_back(pts[idx]);
            poly.wits_.push_back(std::move(wits[idx]));
        }
        return poly;
    }

    const std::vector<SurplusPoint>& vertices() const { return verts_; }
    const std::vector<std::vector<double>>& witnesses() const { return wits_; }
    std::size_t size() const { return verts_.size(); }

    // Signed containment: true when p is inside or within tol of the boundary.
    bool contains(const SurplusPoint& p, double tol = 1e-8) const {
        return distance_to(p) <= tol;
    }

    // Euclidean distance from p to the polygon (0 inside).
    double distance_to(const SurplusPoint& p) const {
        if (verts_.empty()) throw std::logic_error("SurplusPolygon: empty");
        if (verts_.size() == 1) return std::sqrt(detail::dist2(p, verts_[0]));
        if (verts_.size() >= 3) {
            bool inside = true;
            for (std::size_t i = 0; i < verts_.size(); ++i) {
                const SurplusPoint& a = verts_[i];
                const SurplusPoint& b = verts_[(i + 1) % verts_.size()];
                if (detail::cross(a, b, p) < 0.0) {
                    inside = false;
                    break;
                }
            }
            if (inside) return 0.0;
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < verts_.size(); ++i) {
            const SurplusPoint& a = verts_[i];
            const SurplusPoint& b = verts_[(i + 1) % verts_.size()];
            best = std::min(best, detail::dist_point_segment(p, a, b));
        }
        return best;
    }

    double max_along(double dc, double dp) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const SurplusPoint& v : verts_) best = std::max(best, dc * v.consumer + dp * v.producer);
        return best;
    }
    double min_along(double dc, double dp) const { return -max_along(-dc, -dp); }

    // scale*v + offset per vertex; witnesses carried through.
    SurplusPolygon affine(double scale, const SurplusPoint& offset) const {
        std::vector<SurplusPoint> pts;
        pts.reserve(verts_.size());
        for (const SurplusPoint& v : verts_)
            pts.push_back({scale * v.consumer + offset.consumer, scale * v.producer + offset.producer});
        return from_points(std::move(pts), wits_);
    }

private:
    std::vector<SurplusPoint> verts_;
    std::vector<std::vector<double>> wits_;
};

inline double hausdorff(const SurplusPolygon& A, const SurplusPolygon& B) {
    double h = 0.0;
    for (const SurplusPoint& v : A.vertices()) h = std::max(h, B.distance_to(v));
    for (const SurplusPoint& v : B.vertices()) h = std::max(h, A.distance_to(v));
    return h;
}

struct SweepOptions {
    bool exact = false;       // route support LPs through the rational solver
    double point_tol = 1e-9;  // support points closer than this end an interval
};

// Exact 2-D shadow of the polytope under the surplus maps. Support directions
// are bisected until neighboring optima coincide or the wedge closes below
// kSweepAngleTol; every emitted vertex carries a feasible witness z.
inline SurplusPolygon project_polygon(const PolytopeLP& P, const SweepOptions& opts = {}) {
    int lp_calls = 0;
    auto support = [&](double theta) {
        if (++lp_calls > kSweepLpCap)
            throw NumericalFailure("project_polygon: support sweep exceeded its LP-call cap");
        LinearProgram lp = P.lp;
        double dc = std::cos(theta), dp = std::sin(theta);
        for (std::size_t k = 0; k < lp.n_vars; ++k)
            lp.objective[k] = dc * P.consumer_map[k] + dp * P.producer_map[k];
        LpSolution sol = opts.exact ? solve_exact(lp, Sense::maximize) : solve(lp, Sense::maximize);
        if (sol.status != LpStatus::optimal)
            throw NumericalFailure("project_polygon: support LP failed (status not optimal)");
        return sol.point;
    };

    struct Entry {
        double theta;
        std::vector<double> z;
        SurplusPoint p;
    };
    auto entry = [&](double theta) {
        Entry e;
        e.theta = theta;
        e.z = support(theta);
        e.p = surplus_objective(P, e.z);
        return e;
    };

    std::vector<Entry> found;
    auto refine = [&](auto&& self, const Entry& lo, const Entry& hi) -> void {
        if (std::abs(lo.p.consumer - hi.p.consumer) <= opts.point_tol &&
            std::abs(lo.p.producer - hi.p.producer) <= opts.point_tol)
            return;
        if (hi.theta - lo.theta < kSweepAngleTol) return;
        Entry mid = entry(0.5 * (lo.theta + hi.theta));
        found.push_back(mid);
        self(self, lo, mid);
        self(self, mid, hi);
    };

    constexpr double kPi = 3.14159265358979323846;
    std::vector<Entry> seeds;
    for (int q = 0; q < 4; ++q) seeds.push_back(entry(q * kPi / 2.0));
    seeds.push_back(entry(2.0 * kPi));  // same direction as 0; closes the fan
    for (const Entry& e : seeds) found.push_back(e);
    for (std::size_t q = 0; q + 1 < seeds.size(); ++q) refine(refine, seeds[q], seeds[q + 1]);

    std::vector<SurplusPoint> pts;
    std::vector<std::vector<double>> wits;
    pts.reserve(found.size());
    wits.reserve(found.size());
    for (Entry& e : found) {
        pts.push_back(e.p);
        wits.push_back(std::move(e.z));
    }
    return SurplusPolygon::from_points(std::move(pts), std::move(wits));
}

// Achievable set at mask rate beta: beta*c + (1-beta)*shadow. Full masking
// collapses to the singleton {c} without touching the polytope.
inline SurplusPolygon surplus_set(const ValueGrid& grid, const Market& x_star, double beta,
                                  const ShiftVector& shift, const SweepOptions& opts = {}) {
    check_compatible(grid, x_star);
    if (beta > 1.0 - 1e-12) {
        return SurplusPolygon::from_points({shift.point});
    }
    PolytopeLP P = build_polytope(grid, x_star, beta);
    SurplusPolygon shadow = project_polygon(P, opts);
    return shadow.affine(1.0 - beta, {beta * shift.point.consumer, beta * shift.point.producer});
}

// Non-private reference triangle: uniform-monopoly floor, full-extraction
// apex, efficient-consumer corner.
inline SurplusPolygon non_private_triangle(const ValueGrid& grid, const Market& x_star) {
    double pi_u = uniform_monopoly(grid, x_star).profit;
    double ts = total_surplus(grid, x_star);
    return SurplusPolygon::from_points({{0.0, pi_u}, {0.0, ts}, {ts - pi_u, pi_u}});
}

// ---- Two-level closed forms -------------------------------------------------

inline SurplusPoint k2_shift_point(double v1, double v2, double alpha_star, double beta) {
    double t = std::min(1.0, std::max(0.0, threshold_tstar(v1 / v2, beta)));
    return {t * alpha_star * (v2 - v1), t * v1 + (1.0 - t) * alpha_star * v2};
}

namespace detail {

inline void k2_check(double v1, double v2, double alpha_star, double beta) {
    if (!(v1 > 0.0 && v2 > v1)) throw std::invalid_argument("k2: need 0 < v1 < v2");
    if (!(alpha_star >= 0.0 && alpha_star <= 1.0)) throw std::invalid_argument("k2: alpha* outside [0,1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("k2: beta outside [0,1]");
}

}  // namespace detail

// Shadow triangle for two levels. Branches on which side of t* the aggregate
// sits; at alpha* = t* both branches give the same vertex set.
inline SurplusPolygon k2_sprime_triangle(double v1, double v2, double alpha_star, double beta) {
    detail::k2_check(v1, v2, alpha_star, beta);
    double eta = v1 / v2;
    if (!k2_interior_mask(eta, beta))
        throw std::invalid_argument("k2_sprime_triangle: mask rate outside the interior range");
    double t = threshold_tstar(eta, beta);
    SurplusPoint E{0.0, alpha_star * v2 + (1.0 - alpha_star) * v1};
    if (alpha_star >= t) {
        SurplusPoint F{0.0, alpha_star * v2};
        double xi = alpha_star == 1.0 ? 0.0 : (1.0 - alpha_star) * (t / (1.0 - t)) * (v2 - v1);
        SurplusPoint G{E.consumer + xi, E.producer - xi};
        return SurplusPolygon::from_points({E, F, G});
    }
    SurplusPoint F{alpha_star * (v2 - v1), v1};
    double kappa = alpha_star == 0.0 ? v1 : v1 + alpha_star * v2 * (1.0 - eta / t);
    SurplusPoint G{0.0, kappa};
    return SurplusPolygon::from_points({E, F, G});
}

// Achievable set for two levels in closed form: the shifted triangle inside
// the interior mask range, a singleton once one price dominates everywhere.
inline SurplusPolygon k2_theorem1_triangle(double v1, double v2, double alpha_star, double beta) {
    detail::k2_check(v1, v2, alpha_star, beta);
    double eta = v1 / v2;
    if (!k2_interior_mask(eta, beta)) {
        if (beta >= 2.0 * eta) return SurplusPolygon::from_points({{0.0, v2 * alpha_star}});
        return SurplusPolygon::from_points({{alpha_star * (v2 - v1), v1}});
    }
    double t = threshold_tstar(eta, beta);  // in [0,1] inside the interior range
    SurplusPoint c = k2_shift_point(v1, v2, alpha_star, beta);
    double ratio_a = t > 0.0 ? std::max(t - alpha_star, 0.0) / t : 0.0;
    double ratio_c = t < 1.0 ? std::max(alpha_star - t, 0.0) / (1.0 - t) : 0.0;
    SurplusPoint A{0.0, alpha_star * v2 + v1 * ratio_a};
    SurplusPoint B{0.0, alpha_star * v2 + (1.0 - alpha_star) * v1};
    SurplusPoint C{alpha_star * (v2 - v1) - (v2 - v1) * ratio_c, v1 + (v2 - v1) * ratio_c};
    auto shift = [&](const SurplusPoint& p) -> SurplusPoint {
        return {beta * c.consumer + (1.0 - beta) * p.consumer,
                beta * c.producer + (1.0 - beta) * p.producer};
    };
    return SurplusPolygon::from_points({shift(A), shift(B), shift(C)});
}

}  // namespace privseg
