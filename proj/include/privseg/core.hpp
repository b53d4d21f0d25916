#pragma once
// Value grids, markets over them, and the deterministic utility functions the
// rest of the library is built on. Price indexes are 0-based everywhere.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace privseg {

inline constexpr double kMarketMassTol = 1e-12;  // |sum(mass) - 1| allowed on a market
inline constexpr double kAggregateTol = 1e-10;   // per-coordinate slack when re-aggregating parts
inline constexpr double kTieTol = 1e-12;         // argmax ties on scores and profits

namespace detail {

// One pin attempt: apply the residual to m[pin] while it spans several ulps,
// then walk single ulps. Walking can still straddle 1.0 without landing when
// the intermediate partial sums round the same way twice, so report success
// rather than assuming it.
inline bool walk_pin_to_unit(std::vector<double>& m, std::size_t pin, int iters) {
    for (int it = 0; it < iters; ++it) {
        double sum = std::accumulate(m.begin(), m.end(), 0.0);
        if (sum == 1.0) return true;
        double adj = 1.0 - sum;
        if (std::abs(adj) > 4.0 * std::numeric_limits<double>::epsilon())
            m[pin] += adj;
        else
            m[pin] = std::nextafter(m[pin], adj > 0.0 ? std::numeric_limits<double>::infinity()
                                                      : -std::numeric_limits<double>::infinity());
    }
    return false;
}

// Nudge one coordinate until a left-to-right sum over m is 1.0 bitwise. A
// single complement correction is not enough: re-summing in index order
// regroups the additions and can come back an ulp off. Prefer the largest
// coordinate (relative damage is smallest there); when its rounding chain
// two-cycles around 1, another coordinate's chain almost surely lands. Exact
// zeros are never touched, so empty entries stay exactly empty.
inline void pin_to_unit_sum(std::vector<double>& m, std::size_t big) {
    if (walk_pin_to_unit(m, big, 64)) return;
    const std::vector<double> saved = m;
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (k == big || m[k] == 0.0) continue;
        m = saved;
        if (walk_pin_to_unit(m, k, 64)) return;
    }
    m = saved;  // within the constructor tolerance regardless
}

}  // namespace detail

// Strictly increasing positive price levels v_0 < ... < v_{K-1}.
class ValueGrid {
public:
    explicit ValueGrid(std::vector<double> values) : v_(std::move(values)) {
        if (v_.empty()) throw std::invalid_argument("ValueGrid: needs at least one value");
        double prev = 0.0;
        for (double x : v_) {
            if (!(x > prev) || !std::isfinite(x))
                throw std::invalid_argument("ValueGrid: values must be finite, positive, strictly increasing");
            prev = x;
        }
    }

    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    const std::vector<double>& values() const { return v_; }

    // Revenue of price v_i against the flat market, scaled by K: (K-i)*v_i.
    // Drives both the fully-masked pricing rule and the feasibility thresholds.
    double weight(std::size_t i) const {
        check_index(i);
        return static_cast<double>(v_.size() - i) * v_[i];
    }
    std::vector<double> weights() const {
        std::vector<double> w(v_.size());
        for (std::size_t i = 0; i < v_.size(); ++i) w[i] = weight(i);
        return w;
    }

    void check_index(std::size_t i) const {
        if (i >= v_.size()) throw std::out_of_range("ValueGrid: price index out of range");
    }

private:
    std::vector<double> v_;
};

// Probability mass over a value grid. Never renormalized silently; use
// Market::normalized when the caller wants that.
class Market {
public:
    explicit Market(std::vector<double> mass) : m_(std::move(mass)) {
        if (m_.empty()) throw std::invalid_argument("Market: empty mass vector");
        double sum = 0.0;
        for (double x : m_) {
            if (!(x >= 0.0) || !std::isfinite(x))
                throw std::invalid_argument("Market: masses must be finite and nonnegative");
            sum += x;
        }
        if (std::abs(sum - 1.0) > kMarketMassTol)
            throw std::invalid_argument("Market: mass sums to " + std::to_string(sum) + ", not 1");
    }

    static Market normalized(std::vector<double> mass) {
        double sum = std::accumulate(mass.begin(), mass.end(), 0.0);
        if (!(sum > 0.0)) throw std::invalid_argument("Market: cannot normalize zero mass");
        for (double& x : mass) x /= sum;
        // Scaled coordinates can still miss 1 by a few ulps; pin the largest.
        std::size_t big = static_cast<std::size_t>(
            std::max_element(mass.begin(), mass.end()) - mass.begin());
        detail::pin_to_unit_sum(mass, big);
        return Market(std::move(mass));
    }

    static Market point_mass(std::size_t K, std::size_t i) {
        if (i >= K) throw std::out_of_range("Market: point mass index out of range");
        std::vector<double> m(K, 0.0);
        m[i] = 1.0;
        return Market(std::move(m));
    }

    static Market flat(std::size_t K) {
        if (K == 0) throw std::invalid_argument("Market: K must be positive");
        std::vector<double> m(K, 1.0 / static_cast<double>(K));
        return Market::normalized(std::move(m));
    }

    std::size_t size() const { return m_.size(); }
    double operator[](std::size_t i) const { return m_[i]; }
    const std::vector<double>& mass() const { return m_; }

    // Complementary CDF: y[j] = sum_{k>=j} mass[k]; y[0] = 1, nonincreasing.
    std::vector<double> ccdf() const {
        std::vector<double> y(m_.size());
        double acc = 0.0;
        for (std::size_t j = m_.size(); j-- > 0;) {
            acc += m_[j];
            y[j] = acc;
        }
        return y;
    }

private:
    std::vector<double> m_;
};

inline void check_compatible(const ValueGrid& grid, const Market& x) {
    if (grid.size() != x.size())
        throw std::invalid_argument("grid and market have different lengths");
}

// A (consumer utility, producer utility) pair in currency units.
struct SurplusPoint {
    double consumer = 0.0;
    double producer = 0.0;
};

// U_p(v_i, x) = v_i * P(value >= v_i).
inline double producer_utility(const ValueGrid& grid, const Market& x, std::size_t i) {
    check_compatible(grid, x);
    grid.check_index(i);
    double tail = 0.0;
    for (std::size_t k = i; k < x.size(); ++k) tail += x[k];
    return grid[i] * tail;
}

// U_c(v_i, x) = sum_{k>=i} x(v_k) * (v_k - v_i).
inline double consumer_utility(const ValueGrid& grid, const Market& x, std::size_t i) {
    check_compatible(grid, x);
    grid.check_index(i);
    double s = 0.0;
    for (std::size_t k = i; k < x.size(); ++k) s += x[k] * (grid[k] - grid[i]);
    return s;
}

inline double total_surplus(const ValueGrid& grid, const Market& x) {
    check_compatible(grid, x);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * grid[k];
    return s;
}

struct MonopolyResult {
    double profit = 0.0;
    std::vector<std::size_t> argmax;  // ascending; ties within kTieTol all reported
};

// Best uniform price against x: max_i U_p(v_i, x) with the full tie set.
inline MonopolyResult uniform_monopoly(const ValueGrid& grid, const Market& x) {
    check_compatible(grid, x);
    std::vector<double> profit(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) profit[i] = producer_utility(grid, x, i);
    double best = *std::max_element(profit.begin(), profit.end());
    MonopolyResult r;
    r.profit = best;
    double tol = kTieTol * std::max(1.0, std::abs(best));
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (profit[i] >= best - tol) r.argmax.push_back(i);
    return r;
}

// Weighted list of markets. Aggregation is checked against a declared target
// where one exists (see validate_against); the type itself only checks weights.
class Segmentation {
public:
    struct Part {
        double gamma;
        Market market;
    };

    explicit Segmentation(std::vector<Part> parts) : parts_(std::move(parts)) {
        if (parts_.empty()) throw std::invalid_argument("Segmentation: no parts");
        double sum = 0.0;
        std::size_t K = parts_.front().market.size();
        for (const Part& p : parts_) {
            if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma))
                throw std::invalid_argument("Segmentation: weights must be finite and nonnegative");
            if (p.market.size() != K)
                throw std::invalid_argument("Segmentation: parts live on different grids");
            sum += p.gamma;
        }
        if (std::abs(sum - 1.0) > kMarketMassTol)
            throw std::invalid_argument("Segmentation: weights sum to " + std::to_string(sum) + ", not 1");
    }

    const std::vector<Part>& parts() const { return parts_; }
    std::size_t grid_size() const { return parts_.front().market.size(); }

    std::vector<double> aggregate_mass() const {
        std::vector<double> agg(grid_size(), 0.0);
        for (const Part& p : parts_)
            for (std::size_t k = 0; k < agg.size(); ++k) agg[k] += p.gamma * p.market[k];
        return agg;
    }

    void validate_against(const Market& x_star, double tol = kAggregateTol) const {
        if (x_star.size() != grid_size())
            throw std::invalid_argument("Segmentation: aggregate has wrong length");
        std::vector<double> agg = aggregate_mass();
        for (std::size_t k = 0; k < agg.size(); ++k)
            if (std::abs(agg[k] - x_star[k]) > tol)
                throw std::invalid_argument("Segmentation: parts do not aggregate to the declared market");
    }

private:
    std::vector<Part> parts_;
};

}  // namespace privseg
