#pragma once
// Explicit segmentations with price assignments: reconstruction from feasible
// polytope points, reduction to the one-part-per-price canonical form, and the
// two-level expected-utility closed forms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "privseg/core.hpp"
#include "privseg/geometry.hpp"
#include "privseg/pricing.hpp"

namespace privseg {

inline constexpr double kPartDropTol = 1e-12;  // parts lighter than this are omitted

// Segmentation whose parts carry the price charged to them. Validation here is
// structural only (weights, one part per price, ascending order): whether each
// part sits in its price's optimality region depends on beta and is enforced
// where segmentations are built, not in the type. Full masking reprices every
// observation anyway, so a price assignment can be deliberately off-region.
struct PricedSegmentation {
    struct Part {
        double gamma;
        Market market;
        std::size_t price_index;
    };
    std::vector<Part> parts;

    explicit PricedSegmentation(std::vector<Part> p) : parts(std::move(p)) {
        if (parts.empty()) throw std::invalid_argument("PricedSegmentation: no parts");
        double sum = 0.0;
        std::size_t K = parts.front().market.size();
        for (const Part& part : parts) {
            if (!(part.gamma >= 0.0) || !std::isfinite(part.gamma))
                throw std::invalid_argument("PricedSegmentation: weights must be finite and nonnegative");
            if (part.market.size() != K)
                throw std::invalid_argument("PricedSegmentation: parts live on different grids");
            if (part.price_index >= K)
                throw std::invalid_argument("PricedSegmentation: price index out of range");
            sum += part.gamma;
        }
        if (std::abs(sum - 1.0) > kMarketMassTol)
            throw std::invalid_argument("PricedSegmentation: weights sum to " +
                                        std::to_string(sum) + ", not 1");
        for (std::size_t s = 0; s + 1 < parts.size(); ++s)
            if (parts[s].price_index >= parts[s + 1].price_index)
                throw std::invalid_argument(
                    "PricedSegmentation: parts must be in strictly ascending price order");
    }

    std::size_t grid_size() const { return parts.front().market.size(); }

    std::vector<double> aggregate_mass() const {
        std::vector<double> agg(grid_size(), 0.0);
        for (const Part& p : parts)
            for (std::size_t k = 0; k < agg.size(); ++k) agg[k] += p.gamma * p.market[k];
        return agg;
    }
};

// Utilities when every part is charged its assigned price (the unmasked
// branch of the decomposition; the achieved point is beta*c + (1-beta)*this).
inline SurplusPoint primed_utilities(const ValueGrid& grid, const PricedSegmentation& seg) {
    SurplusPoint s;
    for (const PricedSegmentation::Part& p : seg.parts) {
        s.consumer += p.gamma * consumer_utility(grid, p.market, p.price_index);
        s.producer += p.gamma * producer_utility(grid, p.market, p.price_index);
    }
    return s;
}

// One point-mass part per supported value, each priced at its own value.
inline PricedSegmentation first_degree(const ValueGrid& grid, const Market& x_star) {
    check_compatible(grid, x_star);
    std::vector<PricedSegmentation::Part> parts;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (x_star[i] > 0.0)
            parts.push_back({x_star[i], Market::point_mass(grid.size(), i), i});
    return PricedSegmentation(std::move(parts));
}

namespace detail {

inline void check_z_feasible(const ValueGrid& grid, const Market& x_star, double beta,
                             const std::vector<double>& z, double slack) {
    std::size_t K = grid.size();
    if (z.size() != K * K) throw std::invalid_argument("build_segmentation: z has wrong length");
    for (double v : z)
        if (!std::isfinite(v)) throw std::invalid_argument("build_segmentation: z not finite");
    double coef = beta / (static_cast<double>(K) * (1.0 - beta));
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j + 1 < K; ++j)
            if (z[zidx(i, j + 1, K)] > z[zidx(i, j, K)] + slack)
                throw std::invalid_argument("build_segmentation: z row not nonincreasing");
        if (z[zidx(i, K - 1, K)] < -slack)
            throw std::invalid_argument("build_segmentation: z row negative");
        for (std::size_t j = 0; j < K; ++j) {
            if (i == j) continue;
            double lhs = grid[i] * z[zidx(i, i, K)] - grid[j] * z[zidx(i, j, K)];
            double rhs = coef * (grid.weight(j) - grid.weight(i)) * z[zidx(i, 0, K)];
            if (lhs < rhs - slack)
                throw std::invalid_argument("build_segmentation: z violates a pricing constraint");
        }
    }
    std::vector<double> y_star = x_star.ccdf();
    for (std::size_t j = 0; j < K; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < K; ++i) col += z[zidx(i, j, K)];
        if (std::abs(col - y_star[j]) > slack)
            throw std::invalid_argument("build_segmentation: z does not aggregate to the market");
    }
}

}  // namespace detail

// Invert z(i,j) = gamma_i * y_i(j) into explicit parts. Rows lighter than
// kPartDropTol are dropped; sub-noise negative masses are clamped to zero and
// the part renormalized.
inline PricedSegmentation build_segmentation(const std::vector<double>& z, const ValueGrid& grid,
                                             const Market& x_star, double beta,
                                             double slack = 1e-8) {
    check_compatible(grid, x_star);
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("build_segmentation: beta outside [0,1)");
    detail::check_z_feasible(grid, x_star, beta, z, slack);
    std::size_t K = grid.size();
    std::vector<PricedSegmentation::Part> parts;
    for (std::size_t i = 0; i < K; ++i) {
        double gamma = z[zidx(i, 0, K)];
        if (gamma < kPartDropTol) continue;
        std::vector<double> mass(K);
        for (std::size_t j = 0; j < K; ++j) {
            double y_j = z[zidx(i, j, K)] / gamma;
            double y_next = j + 1 < K ? z[zidx(i, j + 1, K)] / gamma : 0.0;
            double m = y_j - y_next;
            if (m < -1e-9) throw std::invalid_argument("build_segmentation: negative segment mass");
            mass[j] = std::max(m, 0.0);
        }
        parts.push_back({gamma, Market::normalized(std::move(mass)), i});
    }
    if (parts.empty()) throw std::invalid_argument("build_segmentation: all rows empty");
    // Row weights are column-0 sums of a feasible z, so they already total
    // y*(0) = 1 up to slack; rescale away the dropped-row dust.
    double total = 0.0;
    for (const auto& p : parts) total += p.gamma;
    for (auto& p : parts) p.gamma /= total;
    return PricedSegmentation(std::move(parts));
}

// How a merge resolves a part whose observed market makes several prices
// optimal: take the lowest, the highest, or split weight delta to the highest
// and the rest to the lowest.
struct MergePolicy {
    enum class Kind { lowest, highest, split };
    Kind kind = Kind::lowest;
    double delta = 0.0;  // weight on the highest tied price when kind == split

    static MergePolicy lowest() { return {Kind::lowest, 0.0}; }
    static MergePolicy highest() { return {Kind::highest, 0.0}; }
    static MergePolicy split(double delta) {
        if (!(delta >= 0.0 && delta <= 1.0))
            throw std::invalid_argument("MergePolicy: delta outside [0,1]");
        return {Kind::split, delta};
    }
};

// Convex-combine all segments assigned to the same price into one part.
// Utilities under the fixed assignment are linear in the market, so the merge
// changes neither them nor the aggregate.
inline PricedSegmentation merge_to_canonical(const std::vector<Segmentation::Part>& seg,
                                             const MergePolicy& policy, double beta,
                                             const ValueGrid& grid) {
    if (seg.empty()) throw std::invalid_argument("merge_to_canonical: no parts");
    std::size_t K = grid.size();
    std::vector<double> weight(K, 0.0);
    std::vector<std::vector<double>> mass(K, std::vector<double>(K, 0.0));
    auto deposit = [&](std::size_t price, double gamma, const Market& x) {
        if (gamma <= 0.0) return;
        weight[price] += gamma;
        for (std::size_t k = 0; k < K; ++k) mass[price][k] += gamma * x[k];
    };
    for (const Segmentation::Part& part : seg) {
        check_compatible(grid, part.market);
        std::vector<std::size_t> opt = optimal_price_set(grid, beta, part.market);
        if (opt.size() == 1 || policy.kind == MergePolicy::Kind::lowest) {
            deposit(opt.front(), part.gamma, part.market);
        } else if (policy.kind == MergePolicy::Kind::highest) {
            deposit(opt.back(), part.gamma, part.market);
        } else {
            deposit(opt.back(), part.gamma * policy.delta, part.market);
            deposit(opt.front(), part.gamma * (1.0 - policy.delta), part.market);
        }
    }
    std::vector<PricedSegmentation::Part> parts;
    for (std::size_t i = 0; i < K; ++i) {
        if (weight[i] < kPartDropTol) continue;
        std::vector<double> m = mass[i];
        for (double& v : m) v /= weight[i];
        parts.push_back({weight[i], Market::normalized(std::move(m)), i});
    }
    return PricedSegmentation(std::move(parts));
}

// Overload for parts that already carry price assignments: each assignment
// must actually be optimal for its market, then same-price parts merge.
inline PricedSegmentation merge_to_canonical(const PricedSegmentation& seg, double beta,
                                             const ValueGrid& grid) {
    std::size_t K = grid.size();
    std::vector<double> weight(K, 0.0);
    std::vector<std::vector<double>> mass(K, std::vector<double>(K, 0.0));
    for (const PricedSegmentation::Part& part : seg.parts) {
        check_compatible(grid, part.market);
        std::vector<std::size_t> opt = optimal_price_set(grid, beta, part.market);
        if (std::find(opt.begin(), opt.end(), part.price_index) == opt.end())
            throw std::invalid_argument(
                "merge_to_canonical: a part's assigned price is not optimal for it");
        weight[part.price_index] += part.gamma;
        for (std::size_t k = 0; k < K; ++k)
            mass[part.price_index][k] += part.gamma * part.market[k];
    }
    std::vector<PricedSegmentation::Part> parts;
    for (std::size_t i = 0; i < K; ++i) {
        if (weight[i] < kPartDropTol) continue;
        std::vector<double> m = mass[i];
        for (double& v : m) v /= weight[i];
        parts.push_back({weight[i], Market::normalized(std::move(m)), i});
    }
    return PricedSegmentation(std::move(parts));
}

// Expected (consumer, producer) utilities for a two-level segment (1-alpha,
// alpha) under masking, with delta the probability of the high price at the
// alpha = t* tie. Valid only in the interior mask range.
inline SurplusPoint k2_expected_utilities(double alpha, double delta, double v1, double v2,
                                          double beta) {
    if (!(v1 > 0.0 && v2 > v1)) throw std::invalid_argument("k2_expected_utilities: need 0 < v1 < v2");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("k2_expected_utilities: alpha outside [0,1]");
    if (!(delta >= 0.0 && delta <= 1.0))
        throw std::invalid_argument("k2_expected_utilities: delta outside [0,1]");
    double eta = v1 / v2;
    if (!k2_interior_mask(eta, beta))
        throw std::invalid_argument("k2_expected_utilities: mask rate outside the interior range");
    double t = threshold_tstar(eta, beta);
    auto low = [&] {
        return SurplusPoint{(1.0 - beta + beta * t) * alpha * (v2 - v1),
                            (1.0 - beta + beta * t) * v1 + beta * (1.0 - t) * alpha * v2};
    };
    auto high = [&] {
        return SurplusPoint{beta * t * alpha * (v2 - v1),
                            beta * t * v1 + (1.0 - beta + beta * (1.0 - t)) * alpha * v2};
    };
    if (alpha < t) return low();
    if (alpha > t) return high();
    SurplusPoint a = low(), b = high();
    return {(1.0 - delta) * a.consumer + delta * b.consumer,
            (1.0 - delta) * a.producer + delta * b.producer};
}

}  // namespace privseg
