/*
 * Copyright 2026 The OPE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <cstdint>
#include <random>

namespace ope {

/// Portable seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not portable across library
/// implementations, so the conversions to doubles and bounded integers are
/// done here:
///   - uniform01(): top 53 bits of one engine draw, times 2^-53, in [0, 1).
///   - below(n):    rejection sampling on the top bits, unbiased in [0, n).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : m_engine(seed) {}

    double uniform01() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1); used where 0 would map to an infinite quantile.
    double uniform_open() {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return u;
    }

    std::uint64_t below(std::uint64_t n) {
        // n is small in practice; reject the biased tail of the 64-bit range.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = m_engine();
        } while (x >= limit);
        return x % n;
    }

    std::uint64_t next_u64() { return m_engine(); }

private:
    std::mt19937_64 m_engine;
};

/// SplitMix64 finalizer. Used to derive independent sub-stream seeds
/// (candidate designs, optimizer restarts) from one user seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace ope
