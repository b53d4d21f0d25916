#pragma once
// End-to-end Monte Carlo of the masking mechanism: segments are drawn by
// weight, observations are the true market or a uniform redraw, the producer
// prices the observation, and utilities accrue on the true market. The report
// carries z-scores against the analytic decomposition point.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "privseg/core.hpp"
#include "privseg/measure.hpp"
#include "privseg/pricing.hpp"
#include "privseg/segmentation.hpp"

namespace privseg {

enum class TiePolicy { lowest, highest, random_uniform };

inline const char* to_string(TiePolicy t) {
    switch (t) {
        case TiePolicy::lowest: return "lowest";
        case TiePolicy::highest: return "highest";
        default: return "random";
    }
}

struct SimReport {
    McEstimate consumer;
    McEstimate producer;
    SurplusPoint analytic;
    double z_consumer = 0.0;
    double z_producer = 0.0;
};

namespace detail {

// Streams for the analytic shift vector must not collide with trial streams.
inline constexpr std::uint64_t kShiftSeedSalt = 0xA5C1D96EF3B07281ull;

inline double z_score(double empirical, double analytic, double std_error) {
    double diff = empirical - analytic;
    if (std_error > 0.0) return diff / std_error;
    // Zero variance happens legitimately (no masking, degenerate utilities);
    // any real discrepancy there is an outright failure, not noise.
    return std::abs(diff) <= 1e-9 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline SimReport simulate(const PricedSegmentation& seg, double beta, const ValueGrid& grid,
                          std::uint64_t trials, std::uint64_t seed,
                          TiePolicy tie = TiePolicy::random_uniform,
                          std::uint64_t shift_samples = 1u << 20) {
    if (trials == 0) throw std::invalid_argument("simulate: trials must be positive");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("simulate: beta outside [0,1]");
    std::size_t K = grid.size();
    std::size_t n_parts = seg.parts.size();
    for (const PricedSegmentation::Part& p : seg.parts) check_compatible(grid, p.market);

    // Per-part tables: selection CDF, utilities at every price, and the
    // optimal-price set of the unmasked observation.
    std::vector<double> cum(n_parts);
    std::vector<std::vector<double>> uc(n_parts, std::vector<double>(K));
    std::vector<std::vector<double>> up(n_parts, std::vector<double>(K));
    std::vector<std::vector<std::size_t>> opt(n_parts);
    double acc = 0.0;
    for (std::size_t s = 0; s < n_parts; ++s) {
        acc += seg.parts[s].gamma;
        cum[s] = acc;
        for (std::size_t i = 0; i < K; ++i) {
            uc[s][i] = consumer_utility(grid, seg.parts[s].market, i);
            up[s][i] = producer_utility(grid, seg.parts[s].market, i);
        }
        opt[s] = optimal_price_set(grid, beta, seg.parts[s].market);
    }
    cum.back() = 1.0;  // weights sum to 1 within tolerance; close the last bin

    // Analytic point: the mask branch contributes the shift vector of the
    // aggregate, the reveal branch the tie-resolved utilities of each part.
    Market aggregate = Market::normalized(seg.aggregate_mass());
    SurplusPoint analytic;
    if (beta > 0.0) {
        ShiftVector sv = shift_vector(grid, aggregate, beta, shift_samples,
                                      seed ^ detail::kShiftSeedSalt);
        analytic.consumer += beta * sv.point.consumer;
        analytic.producer += beta * sv.point.producer;
    }
    for (std::size_t s = 0; s < n_parts; ++s) {
        double ec = 0.0, ep = 0.0;
        if (tie == TiePolicy::lowest) {
            ec = uc[s][opt[s].front()];
            ep = up[s][opt[s].front()];
        } else if (tie == TiePolicy::highest) {
            ec = uc[s][opt[s].back()];
            ep = up[s][opt[s].back()];
        } else {
            for (std::size_t i : opt[s]) {
                ec += uc[s][i];
                ep += up[s][i];
            }
            ec /= static_cast<double>(opt[s].size());
            ep /= static_cast<double>(opt[s].size());
        }
        analytic.consumer += (1.0 - beta) * seg.parts[s].gamma * ec;
        analytic.producer += (1.0 - beta) * seg.parts[s].gamma * ep;
    }

    std::uint64_t n_shards = (trials + detail::kShardSize - 1) / detail::kShardSize;
    std::vector<MomentAccumulator> shard_c(n_shards), shard_p(n_shards);
    detail::parallel_shards(n_shards, [&](std::uint64_t sh) {
        CounterRng rng(seed, sh);
        std::uint64_t count = std::min<std::uint64_t>(detail::kShardSize,
                                                      trials - sh * detail::kShardSize);
        std::vector<double> mass(K), tail(K), weights(K);
        MomentAccumulator ac, ap;
        for (std::uint64_t t = 0; t < count; ++t) {
            double u = rng.next_unit();
            std::size_t part = 0;
            while (part + 1 < n_parts && cum[part] < u) ++part;

            std::size_t price;
            if (rng.next_unit() <= beta) {
                for (double& m : mass) m = rng.next_exponential();
                detail::classify_draw(grid, beta, mass, tail, weights);
                std::size_t first = K, last = 0, ties = 0;
                for (std::size_t i = 0; i < K; ++i)
                    if (weights[i] > 0.0) {
                        if (first == K) first = i;
                        last = i;
                        ++ties;
                    }
                if (ties == 1 || tie == TiePolicy::lowest) {
                    price = first;
                } else if (tie == TiePolicy::highest) {
                    price = last;
                } else {
                    std::size_t pick = static_cast<std::size_t>(
                        static_cast<double>(ties) * (1.0 - rng.next_unit()));
                    if (pick >= ties) pick = ties - 1;
                    price = first;
                    for (std::size_t i = first; i <= last; ++i)
                        if (weights[i] > 0.0 && pick-- == 0) {
                            price = i;
                            break;
                        }
                }
            } else {
                const std::vector<std::size_t>& o = opt[part];
                if (o.size() == 1 || tie == TiePolicy::lowest) {
                    price = o.front();
                } else if (tie == TiePolicy::highest) {
                    price = o.back();
                } else {
                    std::size_t pick = static_cast<std::size_t>(
                        static_cast<double>(o.size()) * (1.0 - rng.next_unit()));
                    if (pick >= o.size()) pick = o.size() - 1;
                    price = o[pick];
                }
            }
            ac.add(uc[part][price]);
            ap.add(up[part][price]);
        }
        shard_c[sh] = ac;
        shard_p[sh] = ap;
    });

    MomentAccumulator total_c, total_p;
    for (std::uint64_t sh = 0; sh < n_shards; ++sh) {
        total_c.merge(shard_c[sh]);
        total_p.merge(shard_p[sh]);
    }

    SimReport rep;
    rep.consumer = {total_c.mean(), total_c.std_error(), trials, seed};
    rep.producer = {total_p.mean(), total_p.std_error(), trials, seed};
    rep.analytic = analytic;
    rep.z_consumer = detail::z_score(rep.consumer.value, analytic.consumer, rep.consumer.std_error);
    rep.z_producer = detail::z_score(rep.producer.value, analytic.producer, rep.producer.std_error);
    return rep;
}

}  // namespace privseg
