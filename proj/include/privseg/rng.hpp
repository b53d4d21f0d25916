#pragma once
// Counter-based generator: output n is a bijective hash of (key, counter), so
// a shard can be handed its own stream and reproduce it without touching any
// other shard's state.

#include <cmath>
#include <cstdint>

namespace privseg {

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed + kGolden) ^ mix(stream + kStreamSalt))) {}

    std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGolden); }

    // Uniform on (0,1]; never 0, so logs stay finite.
    double next_unit() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    double next_exponential() { return -std::log(next_unit()); }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kStreamSalt = 0xD1342543DE82EF95ull;

    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace privseg
