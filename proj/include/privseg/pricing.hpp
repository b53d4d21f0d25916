#pragma once
// Posterior expected-revenue scores under the randomized-response mask, the
// optimal-price regions they induce on the simplex, and the per-price
// feasibility thresholds bar_beta.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "privseg/core.hpp"

namespace privseg {

// Expected revenue of price v_i given the observed market, when the observer
// knows the mask replaces the true market by a uniform simplex draw with
// probability beta: v_i * ((1-beta) * y(i) + beta * (K-i)/K), 0-based i.
inline double posterior_score(const ValueGrid& grid, double beta, const Market& observed,
                              std::size_t i) {
    check_compatible(grid, observed);
    grid.check_index(i);
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("posterior_score: beta outside [0,1]");
    double K = static_cast<double>(grid.size());
    double tail = 0.0;
    for (std::size_t k = i; k < observed.size(); ++k) tail += observed[k];
    return grid[i] * ((1.0 - beta) * tail + beta * (K - static_cast<double>(i)) / K);
}

// Argmax set of posterior_score, ascending, ties within kTieTol.
inline std::vector<std::size_t> optimal_price_set(const ValueGrid& grid, double beta,
                                                  const Market& observed) {
    std::vector<double> score(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) score[i] = posterior_score(grid, beta, observed, i);
    double best = score[0];
    for (double s : score) best = std::max(best, s);
    double tol = kTieTol * std::max(1.0, std::abs(best));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < score.size(); ++i)
        if (score[i] >= best - tol) out.push_back(i);
    return out;
}

// K=2 low-price threshold: the low price is optimal iff the observed high-value
// share is at most t*. Unclamped; may fall outside [0,1] when one price is
// optimal for every observation.
inline double threshold_tstar(double eta, double beta) {
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("threshold_tstar: eta outside (0,1)");
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("threshold_tstar: beta outside [0,1)");
    return (eta - beta / 2.0) / (1.0 - beta);
}

inline double threshold_tstar_clamped(double eta, double beta) {
    return std::min(1.0, std::max(0.0, threshold_tstar(eta, beta)));
}

// v_0 / v_1 for a two-level grid.
inline double k2_eta(const ValueGrid& grid) {
    if (grid.size() != 2) throw std::invalid_argument("k2_eta: grid is not two-level");
    return grid[0] / grid[1];
}

inline bool k2_interior_mask(double eta, double beta) {
    return beta <= std::min(2.0 * eta, 2.0 * (1.0 - eta));
}

// Largest mask rate at which some observed market still makes v_i optimal:
// bar_beta_i = r/(1+r) with r = min over j != i of K*(v_i - [j<i]*v_j) / (w_j - w_i),
// taken over j whose weight strictly exceeds w_i; no such j means 1.
inline double bar_beta(const ValueGrid& grid, std::size_t i) {
    grid.check_index(i);
    double K = static_cast<double>(grid.size());
    double wi = grid.weight(i);
    bool constrained = false;
    double r = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (j == i) continue;
        double den = grid.weight(j) - wi;
        if (!(den > 0.0)) continue;  // nonpositive denominator: no constraint from j
        double num = K * (grid[i] - (j < i ? grid[j] : 0.0));
        double ratio = num / den;
        if (!constrained || ratio < r) {
            r = ratio;
            constrained = true;
        }
    }
    if (!constrained) return 1.0;
    return r / (1.0 + r);
}

inline std::vector<double> bar_beta_all(const ValueGrid& grid) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = bar_beta(grid, i);
    return out;
}

// Membership of a normalized complementary CDF in the region where v_i is
// posterior-optimal: v_i*y(i) - v_j*y(j) >= beta/(K(1-beta)) * (w_j - w_i) for
// all j. `slack` absorbs float noise on LP-derived ratios.
inline bool polytope_row_feasible(const ValueGrid& grid, double beta, std::size_t i,
                                  const std::vector<double>& y, double slack = 1e-9) {
    grid.check_index(i);
    if (y.size() != grid.size()) throw std::invalid_argument("polytope_row_feasible: ratio length mismatch");
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("polytope_row_feasible: beta outside [0,1)");
    constexpr double shape_tol = 1e-8;
    if (std::abs(y[0] - 1.0) > shape_tol)
        throw std::invalid_argument("polytope_row_feasible: ratios not normalized (y(1) != 1)");
    for (std::size_t j = 0; j + 1 < y.size(); ++j)
        if (y[j + 1] > y[j] + shape_tol)
            throw std::invalid_argument("polytope_row_feasible: ratios not nonincreasing");
    if (y.back() < -shape_tol) throw std::invalid_argument("polytope_row_feasible: negative ratio");

    double K = static_cast<double>(grid.size());
    double coef = beta / (K * (1.0 - beta));
    double wi = grid.weight(i);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (j == i) continue;
        double lhs = grid[i] * y[i] - grid[j] * y[j];
        double rhs = coef * (grid.weight(j) - wi);
        if (lhs < rhs - slack) return false;
    }
    return true;
}

// Per-price feasibility snapshot at a given mask rate.
struct PricingRegions {
    double beta = 0.0;
    std::vector<double> bar_beta;
    std::vector<bool> feasible;  // beta <= bar_beta[i], boundary feasible
};

inline PricingRegions pricing_regions(const ValueGrid& grid, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("pricing_regions: beta outside [0,1]");
    PricingRegions r;
    r.beta = beta;
    r.bar_beta = bar_beta_all(grid);
    r.feasible.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) r.feasible[i] = beta <= r.bar_beta[i];
    return r;
}

}  // namespace privseg
