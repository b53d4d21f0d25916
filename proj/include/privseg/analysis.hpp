#pragma once
// Comparative statics and privacy diagnostics: leakage, the differential-
// privacy ratio, the crossing condition on the uniform-monopoly floor,
// full-extraction reachability, consumer-extremum monotonicity cases, and
// extrema-versus-mask-rate curves.

#include <cmath>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include "privseg/core.hpp"
#include "privseg/geometry.hpp"
#include "privseg/measure.hpp"
#include "privseg/pricing.hpp"

namespace privseg {

// Fraction of draws on which the mechanism reveals the submitted market.
inline double privacy_leakage(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("privacy_leakage: beta outside [0,1]");
    return 1.0 - beta;
}

struct DpEpsilon {
    bool constrained = false;  // false at beta = 0: the mechanism gives no guarantee
    double ratio = 0.0;        // worst-case posterior/prior probability ratio
    double log_ratio = 0.0;    // its natural log, the epsilon in the e^eps bound
};

// Worst-case ratio (1-beta+beta*p)/(beta*p) over regions with positive mass.
// Reported both raw and as a log since the guarantee bounds ratios by e^eps.
inline DpEpsilon dp_epsilon_ratio(double beta, const std::vector<double>& region_probs) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("dp_epsilon_ratio: beta outside [0,1]");
    if (region_probs.empty()) throw std::invalid_argument("dp_epsilon_ratio: no regions");
    if (beta == 0.0) return {};
    bool any = false;
    double worst = 0.0;
    for (double p : region_probs) {
        if (!(p > 0.0)) continue;
        double r = (1.0 - beta + beta * p) / (beta * p);
        if (!any || r > worst) worst = r;
        any = true;
    }
    if (!any) throw std::invalid_argument("dp_epsilon_ratio: all regions empty");
    return {true, worst, std::log(worst)};
}

// Two-level monotonicity of the producer's maximum utility in the mask rate:
// decreasing exactly when alpha* and eta sit on the same side of 1/2.
inline bool max_producer_monotone(double alpha_star, double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("max_producer_monotone: eta outside (0,1)");
    if (!(alpha_star >= 0.0 && alpha_star <= 1.0))
        throw std::invalid_argument("max_producer_monotone: alpha* outside [0,1]");
    return (alpha_star >= 0.5 && eta >= 0.5) || (alpha_star <= 0.5 && eta <= 0.5);
}

// Two-level monotonicity of the consumer's minimum utility: increasing in the
// mask rate exactly when the low value carries at least half the high one.
inline bool min_consumer_monotone(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("min_consumer_monotone: eta outside (0,1)");
    return eta >= 0.5;
}

// Closed forms for the two-level extrema over the achievable set, valid in
// the interior mask range.
inline double k2_max_producer(double v1, double v2, double alpha_star, double beta) {
    double t = threshold_tstar(v1 / v2, beta);
    return alpha_star * v2 + (1.0 - alpha_star) * v1 -
           beta * (t * (alpha_star * v2 - v1) + (1.0 - alpha_star) * v1);
}

inline double k2_min_consumer(double v1, double v2, double alpha_star, double beta) {
    return beta * threshold_tstar(v1 / v2, beta) * alpha_star * (v2 - v1);
}

// True when some value's weight strictly beats every uniform-monopoly
// optimum's weight, i.e. masking can push the producer below the uniform
// floor. Monopoly ties are represented by their heaviest member.
inline bool crossing_condition(const ValueGrid& grid, const Market& x_star) {
    MonopolyResult mono = uniform_monopoly(grid, x_star);
    double w_rep = grid.weight(mono.argmax.front());
    for (std::size_t j : mono.argmax) w_rep = std::max(w_rep, grid.weight(j));
    double w_max = w_rep;
    for (std::size_t i = 0; i < grid.size(); ++i) w_max = std::max(w_max, grid.weight(i));
    return w_max > w_rep + kTieTol * std::max(1.0, std::abs(w_rep));
}

// Whether the full-extraction point Q = (0, TS) stays achievable: the mask
// rate must keep every supported value's pricing region nonempty.
inline bool q_inclusion(double beta, const ValueGrid& grid, const Market& x_star) {
    check_compatible(grid, x_star);
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("q_inclusion: beta outside [0,1]");
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (x_star[k] > 0.0 && beta > bar_beta(grid, k)) return false;
    return true;
}

enum class Prop7Case { decreasing, increasing_candidate, inconclusive };

inline const char* to_string(Prop7Case c) {
    switch (c) {
        case Prop7Case::decreasing: return "decreasing";
        case Prop7Case::increasing_candidate: return "increasing-candidate";
        default: return "inconclusive";
    }
}

// Monotonicity case for the consumer's maximum utility in the mask rate:
// decreasing when the lowest value is uniform-optimal and weights are
// nondecreasing; a (non-certified) increasing candidate in the mirrored case.
inline Prop7Case prop7_case(const ValueGrid& grid, const Market& x_star) {
    check_compatible(grid, x_star);
    MonopolyResult mono = uniform_monopoly(grid, x_star);
    auto optimal = [&](std::size_t i) {
        for (std::size_t j : mono.argmax)
            if (j == i) return true;
        return false;
    };
    bool w_up = true, w_down = true;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (grid.weight(i + 1) < grid.weight(i)) w_up = false;
        if (grid.weight(i + 1) > grid.weight(i)) w_down = false;
    }
    if (optimal(0) && w_up) return Prop7Case::decreasing;
    if (optimal(grid.size() - 1) && w_down) return Prop7Case::increasing_candidate;
    return Prop7Case::inconclusive;
}

// Two-level aggregate at which the consumer maximum can rise with the mask
// rate (reported alongside the increasing-candidate verdict when K = 2).
inline double k2_alpha_tilde(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("k2_alpha_tilde: eta outside (0,1)");
    return 1.0 / (2.0 - eta);
}

enum class Trend { constant, nonincreasing, nondecreasing, mixed };

inline const char* to_string(Trend t) {
    switch (t) {
        case Trend::constant: return "constant";
        case Trend::nonincreasing: return "nonincreasing";
        case Trend::nondecreasing: return "nondecreasing";
        default: return "mixed";
    }
}

// Sign pattern of successive differences with a deadband against float flutter.
inline Trend classify_trend(const std::vector<double>& vals, double deadband = 1e-9) {
    bool up = false, down = false;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        double d = vals[i + 1] - vals[i];
        if (d > deadband) up = true;
        if (d < -deadband) down = true;
    }
    if (up && down) return Trend::mixed;
    if (up) return Trend::nondecreasing;
    if (down) return Trend::nonincreasing;
    return Trend::constant;
}

struct CurveRow {
    double beta = 0.0;
    double max_producer = 0.0, min_producer = 0.0;
    double max_consumer = 0.0, min_consumer = 0.0;
    bool has_k2_closed = false;
    double k2_max_producer = 0.0, k2_min_consumer = 0.0;
};

// One row of achievable-set extrema per mask rate. Shift vectors are computed
// up front (they parallelize internally); the polygon sweeps then fan out
// across rows.
inline std::vector<CurveRow> extrema_curves(const ValueGrid& grid, const Market& x_star,
                                            const std::vector<double>& beta_grid,
                                            std::uint64_t samples = 1u << 20,
                                            std::uint64_t seed = 0,
                                            const SweepOptions& opts = {}) {
    check_compatible(grid, x_star);
    for (double b : beta_grid)
        if (!(b >= 0.0 && b < 1.0))
            throw std::invalid_argument("extrema_curves: beta grid entries must lie in [0,1)");
    std::size_t n = beta_grid.size();
    std::vector<ShiftVector> shifts;
    shifts.reserve(n);
    for (std::size_t r = 0; r < n; ++r)
        shifts.push_back(shift_vector(grid, x_star, beta_grid[r], samples, seed + r));

    std::vector<CurveRow> rows(n);
    std::vector<std::exception_ptr> errors(n);
    detail::parallel_shards(n, [&](std::uint64_t r) {
        try {
            double beta = beta_grid[r];
            SurplusPolygon S = surplus_set(grid, x_star, beta, shifts[r], opts);
            CurveRow& row = rows[r];
            row.beta = beta;
            row.max_producer = S.max_along(0.0, 1.0);
            row.min_producer = S.min_along(0.0, 1.0);
            row.max_consumer = S.max_along(1.0, 0.0);
            row.min_consumer = S.min_along(1.0, 0.0);
            if (grid.size() == 2 && k2_interior_mask(k2_eta(grid), beta)) {
                row.has_k2_closed = true;
                row.k2_max_producer = k2_max_producer(grid[0], grid[1], x_star[1], beta);
                row.k2_min_consumer = k2_min_consumer(grid[0], grid[1], x_star[1], beta);
            }
        } catch (...) {
            errors[r] = std::current_exception();
        }
    });
    for (std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

struct Diagnostics {
    double beta = 0.0;
    double leakage = 0.0;
    DpEpsilon dp;
    bool crossing = false;
    bool q_included = false;
    Prop7Case prop7 = Prop7Case::inconclusive;
    bool has_k2 = false;  // the two lemma verdicts below only exist for K = 2
    bool max_producer_monotone_k2 = false;
    bool min_consumer_monotone_k2 = false;
    double alpha_tilde = 0.0;  // meaningful when has_k2 and prop7 is increasing-candidate
};

inline Diagnostics diagnose(const ValueGrid& grid, const Market& x_star, double beta,
                            std::uint64_t samples = 1u << 20, std::uint64_t seed = 0) {
    check_compatible(grid, x_star);
    Diagnostics d;
    d.beta = beta;
    d.leakage = privacy_leakage(beta);
    std::vector<McEstimate> probs = region_probabilities(grid, beta, samples, seed);
    std::vector<double> p(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k) p[k] = probs[k].value;
    d.dp = dp_epsilon_ratio(beta, p);
    d.crossing = crossing_condition(grid, x_star);
    d.q_included = q_inclusion(beta, grid, x_star);
    d.prop7 = prop7_case(grid, x_star);
    if (grid.size() == 2) {
        d.has_k2 = true;
        double eta = k2_eta(grid);
        d.max_producer_monotone_k2 = max_producer_monotone(x_star[1], eta);
        d.min_consumer_monotone_k2 = min_consumer_monotone(eta);
        if (d.prop7 == Prop7Case::increasing_candidate) d.alpha_tilde = k2_alpha_tilde(eta);
    }
    return d;
}

}  // namespace privseg
