#pragma once
// Uniform measure on the market simplex: sampling, the probability of each
// optimal-price region, and the shift vector those probabilities induce.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "privseg/core.hpp"
#include "privseg/pricing.hpp"
#include "privseg/rng.hpp"

namespace privseg {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;  // sample sd / sqrt(samples); 0 on exact paths
    std::uint64_t samples = 0;  // 0 on exact paths
    std::uint64_t seed = 0;
};

// Mergeable first/second moments. Merging shards in a fixed order keeps
// results independent of how many threads ran them.
struct MomentAccumulator {
    std::uint64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        ++count;
        sum += x;
        sum_sq += x * x;
    }
    void merge(const MomentAccumulator& o) {
        count += o.count;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
    double std_error() const {
        if (count < 2) return 0.0;
        double n = static_cast<double>(count);
        double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
        return std::sqrt(var / n);
    }
};

namespace detail {

inline constexpr std::uint64_t kShardSize = 1u << 16;

// Runs fn(shard) for shard in [0, n_shards), possibly concurrently. Each call
// owns its slot of any output vector, so scheduling cannot change results.
template <class Fn>
void parallel_shards(std::uint64_t n_shards, Fn&& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    unsigned workers = std::min<std::uint64_t>(n_shards, hw ? std::min(hw, 8u) : 1u);
    if (workers <= 1) {
        for (std::uint64_t s = 0; s < n_shards; ++s) fn(s);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (;;) {
                std::uint64_t s = next.fetch_add(1);
                if (s >= n_shards) return;
                fn(s);
            }
        });
    for (std::thread& th : pool) th.join();
}

}  // namespace detail

// Flat Dirichlet draw: normalized independent standard exponentials.
inline Market sample_uniform_market(CounterRng& rng, std::size_t K) {
    if (K == 0) throw std::invalid_argument("sample_uniform_market: K must be positive");
    std::vector<double> e(K);
    for (double& x : e) x = rng.next_exponential();
    return Market::normalized(std::move(e));
}

struct ShiftVector {
    SurplusPoint point;
    std::vector<McEstimate> region_probs;
    std::uint64_t seed = 0;
};

namespace detail {

// Per-draw region weights: 1 on a sole winner, split evenly across ties.
// Scores are evaluated in place (tail_buf doubles as score storage) and the
// raw draw needs no prior normalization.
inline void classify_draw(const ValueGrid& grid, double beta, const std::vector<double>& mass,
                          std::vector<double>& tail_buf, std::vector<double>& weight_out) {
    std::size_t K = grid.size();
    double Kd = static_cast<double>(K);
    double acc = 0.0;
    for (std::size_t j = K; j-- > 0;) {
        acc += mass[j];
        tail_buf[j] = acc;
    }
    double best = -1.0;
    for (std::size_t i = 0; i < K; ++i) {
        double s = grid[i] * ((1.0 - beta) * tail_buf[i] / acc + beta * (Kd - static_cast<double>(i)) / Kd);
        tail_buf[i] = s;  // reuse as score storage
        best = std::max(best, s);
    }
    double tol = kTieTol * std::max(1.0, std::abs(best));
    std::size_t ties = 0;
    for (std::size_t i = 0; i < K; ++i)
        if (tail_buf[i] >= best - tol) ++ties;
    double w = 1.0 / static_cast<double>(ties);
    for (std::size_t i = 0; i < K; ++i) weight_out[i] = tail_buf[i] >= best - tol ? w : 0.0;
}

}  // namespace detail

// Monte Carlo path: classify uniform draws by their optimal-price region.
inline std::vector<McEstimate> region_probabilities_mc(const ValueGrid& grid, double beta,
                                                       std::uint64_t samples, std::uint64_t seed) {
    if (samples == 0) throw std::invalid_argument("region_probabilities: samples must be positive");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("region_probabilities: beta outside [0,1]");
    std::size_t K = grid.size();
    std::uint64_t n_shards = (samples + detail::kShardSize - 1) / detail::kShardSize;
    std::vector<std::vector<MomentAccumulator>> shard_acc(n_shards,
                                                          std::vector<MomentAccumulator>(K));
    detail::parallel_shards(n_shards, [&](std::uint64_t s) {
        CounterRng rng(seed, s);
        std::uint64_t lo = s * detail::kShardSize;
        std::uint64_t hi = std::min(samples, lo + detail::kShardSize);
        std::vector<double> mass(K), tails(K), w(K);
        for (std::uint64_t t = lo; t < hi; ++t) {
            for (double& x : mass) x = rng.next_exponential();
            detail::classify_draw(grid, beta, mass, tails, w);
            for (std::size_t k = 0; k < K; ++k) shard_acc[s][k].add(w[k]);
        }
    });
    std::vector<MomentAccumulator> acc(K);
    for (std::uint64_t s = 0; s < n_shards; ++s)
        for (std::size_t k = 0; k < K; ++k) acc[k].merge(shard_acc[s][k]);

    std::vector<McEstimate> out(K);
    for (std::size_t k = 0; k < K; ++k)
        out[k] = McEstimate{acc[k].mean(), acc[k].std_error(), samples, seed};
    // Pin the largest estimate so the vector sums to 1 bitwise while empty
    // regions keep an exact 0.
    std::size_t big = 0;
    std::vector<double> vals(K);
    for (std::size_t k = 0; k < K; ++k) {
        vals[k] = out[k].value;
        if (vals[k] > vals[big]) big = k;
    }
    detail::pin_to_unit_sum(vals, big);
    out[big].value = vals[big];
    return out;
}

// Region probabilities with the exact shortcuts: beta=1 prices by the flat-
// market weights alone, and K=2 reduces to the threshold t*.
inline std::vector<McEstimate> region_probabilities(const ValueGrid& grid, double beta,
                                                    std::uint64_t samples, std::uint64_t seed) {
    if (samples == 0) throw std::invalid_argument("region_probabilities: samples must be positive");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("region_probabilities: beta outside [0,1]");
    std::size_t K = grid.size();
    if (K == 1) return {McEstimate{1.0, 0.0, 0, seed}};
    if (beta == 1.0) {
        std::vector<double> w = grid.weights();
        double best = *std::max_element(w.begin(), w.end());
        double tol = kTieTol * std::max(1.0, best);
        std::size_t ties = 0;
        for (double x : w)
            if (x >= best - tol) ++ties;
        std::vector<McEstimate> out(K);
        for (std::size_t i = 0; i < K; ++i) {
            out[i].seed = seed;
            out[i].value = w[i] >= best - tol ? 1.0 / static_cast<double>(ties) : 0.0;
        }
        return out;
    }
    if (K == 2) {
        double t = threshold_tstar_clamped(k2_eta(grid), beta);
        return {McEstimate{t, 0.0, 0, seed}, McEstimate{1.0 - t, 0.0, 0, seed}};
    }
    return region_probabilities_mc(grid, beta, samples, seed);
}

// c = sum_k P(region k) * (U_c(v_k, x*), U_p(v_k, x*)). Exact whenever the
// region probabilities are.
inline ShiftVector shift_vector(const ValueGrid& grid, const Market& x_star, double beta,
                                std::uint64_t samples, std::uint64_t seed) {
    check_compatible(grid, x_star);
    ShiftVector sv;
    sv.seed = seed;
    sv.region_probs = region_probabilities(grid, beta, samples, seed);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double p = sv.region_probs[k].value;
        sv.point.consumer += p * consumer_utility(grid, x_star, k);
        sv.point.producer += p * producer_utility(grid, x_star, k);
    }
    return sv;
}

}  // namespace privseg
