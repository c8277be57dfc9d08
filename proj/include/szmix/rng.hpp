// Copyright 2026 The szmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace szmix {

/// SplitMix64 finalizer, used to derive independent engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// A reproducible random stream identified by (seed, stream_id).
///
/// The engine is std::mt19937_64 seeded with
/// splitmix64(seed ^ splitmix64(stream_id + 1)). Doubles are built from the
/// top 53 bits of one engine draw, so a given (seed, stream_id) yields the
/// same sequence on every platform.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id), engine_(splitmix64(seed ^ splitmix64(stream_id + 1))) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal draw (Box-Muller on two uniforms).
    double normal();

    /// Index drawn with probability proportional to `weights`. Weights need
    /// not be normalized; at least one must be positive.
    std::size_t categorical(std::span<const double> weights);

    /// A child stream whose draws do not overlap this one's.
    RngStream split(std::uint64_t child_id) const {
        return RngStream(splitmix64(seed_ ^ splitmix64(stream_id_ * 0x100000001B3ULL + 7)), child_id);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

}  // namespace szmix
