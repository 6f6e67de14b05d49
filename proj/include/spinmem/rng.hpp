/*
   Copyright 2026 The spinmem authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spinmem {

// Counter-based generator (Philox 4x32, 10 rounds). Every draw is a pure
// function of (seed, realization, step, channel), so ensemble members have
// provably disjoint streams and results cannot depend on scheduling or
// worker count.

namespace philox {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(M0, ctr[0], hi0, lo0);
        mulhilo(M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

} // namespace philox

/// Stateless stream of doubles keyed by (seed, realization).
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint32_t realization)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          realization_(realization) {}

    /// 64 uniform random bits for (step, channel).
    std::uint64_t bits(std::uint64_t step, std::uint32_t channel) const {
        auto out = philox::block({static_cast<std::uint32_t>(step),
                                  static_cast<std::uint32_t>(step >> 32),
                                  realization_, channel},
                                 key_);
        return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    }

    /// Uniform in (0, 1].
    double uniform(std::uint64_t step, std::uint32_t channel) const {
        return ((bits(step, channel) >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller on the two 64-bit halves of one block.
    double normal(std::uint64_t step, std::uint32_t channel) const {
        auto out = philox::block({static_cast<std::uint32_t>(step),
                                  static_cast<std::uint32_t>(step >> 32),
                                  realization_, channel},
                                 key_);
        std::uint64_t u64a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
        std::uint64_t u64b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
        double u1 = ((u64a >> 11) + 1) * 0x1.0p-53; // (0,1]
        double u2 = (u64b >> 11) * 0x1.0p-53;       // [0,1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t realization_;
};

/// SplitMix64 step, used to derive independent sub-seeds (per sweep point,
/// per probe) from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace spinmem
