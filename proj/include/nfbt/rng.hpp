// SPDX-License-Identifier: Apache-2.0
//
// nfbt - Thompson-sampling beam training toolkit for near-field XL-MIMO links
// Copyright (C) 2026 the nfbt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <utility>

namespace nfbt {

// Monte-Carlo streams are derived by hashing (seed, index...) tuples instead of
// jumping a single generator, so trials stay bit-identical no matter how the
// work is scheduled across threads. Standard-library distributions are avoided
// for the same reason: their output is implementation-defined.

constexpr std::uint64_t kSeedGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

/// Hashes a master seed and a list of stream coordinates into one 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = mix64(master + kSeedGolden);
    for (std::uint64_t w : words)
        h = mix64(h ^ (w + kSeedGolden + (h << 6) + (h >> 2)));
    return h;
}

/// Counter-based 64-bit generator (splitmix64) with explicit uniform and
/// Box-Muller normal draws. Value type; copy freely, one instance per stream.
class SplitMix64 {
  public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next() {
        state_ += kSeedGolden;
        return mix64(state_);
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe as a logarithm argument.
    double uniform01_open() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Two independent standard normals from one Box-Muller transform.
    std::pair<double, double> normal_pair() {
        const double radius = std::sqrt(-2.0 * std::log(uniform01_open()));
        const double angle = 2.0 * std::numbers::pi * uniform01();
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    double normal() { return normal_pair().first; }

    /// Circularly-symmetric complex normal with unit variance, E|z|^2 = 1.
    std::complex<double> complex_normal() {
        const auto [re, im] = normal_pair();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

  private:
    std::uint64_t state_;
};

} // namespace nfbt
