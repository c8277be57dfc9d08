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

// Amplitude amplification on top of the |pi> reflection: search over a marked
// set, unsearch from a basis seed, preparation from the uniform state and the
// randomized iteration schedule used when the overlap is unknown.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "szmix/markov.hpp"
#include "szmix/phase.hpp"
#include "szmix/rng.hpp"
#include "szmix/statevector.hpp"
#include "szmix/szegedy.hpp"

namespace szmix {

class MarkedSet {
public:
    /// Throws DomainError on an empty set, an index >= n or a duplicate.
    static MarkedSet make(std::vector<std::size_t> indices, std::size_t n);

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::size_t n() const noexcept { return n_; }
    bool contains(std::size_t i) const { return i < n_ && member_[i]; }
    /// sum of pi over the set.
    double weight(const Distribution& pi) const;
    /// pi restricted to the set and renormalized.
    Distribution truncate(const Distribution& pi) const;

private:
    std::vector<std::size_t> indices_;
    std::vector<bool> member_;
    std::size_t n_ = 0;
};

/// Z_M = 1 - 2 sum_{i in M} |i><i| on register I.
LinearOperator marked_phase_flip(const MarkedSet& m);

/// Reflection about |pi>: the exact 2|pi><pi| - 1, or an ARO trajectory.
class PiReflector {
public:
    static PiReflector exact(WalkBundlePtr b);
    static PiReflector approximate(std::shared_ptr<const ApproximateReflection> aro);

    bool is_exact() const noexcept { return aro_ == nullptr; }
    const WalkBundle& bundle() const noexcept { return *bundle_; }
    StateVector operator()(const StateVector& s, RngStream& rng) const;

private:
    WalkBundlePtr bundle_;
    std::shared_ptr<const ApproximateReflection> aro_;
};

/// floor((pi / 4) / asin(sqrt(overlap))). Throws DomainError outside (0, 1].
std::uint64_t grover_iterations(double overlap);

struct ScheduleOptions {
    double growth = 6.0 / 5.0;
    unsigned tail_attempts = 2;
};

/// One sweep of the randomized schedule: for m = 1, g, g^2, ... below the cap
/// an iteration count uniform on {1, ..., ceil(m)}, then `tail_attempts`
/// draws at the cap.
std::vector<std::uint64_t> boyer_schedule(std::uint64_t max_iterations, RngStream& rng,
                                          const ScheduleOptions& opts = {});

struct AmplifyOptions {
    /// Schedule sweeps (or fixed-count attempts) before giving up; 0 means c.
    unsigned sweeps = 0;
    /// Iteration cap; 0 picks ceil(2 sqrt(N)).
    std::uint64_t max_iterations = 0;
    /// Direct attempts before amplifying; unset means 3c.
    std::optional<unsigned> direct_attempts;
    /// Uses the fixed Grover count for this overlap instead of the schedule.
    std::optional<double> known_overlap;
    /// Reflection about |pi>; default is ARO at reflection_epsilon.
    std::optional<PiReflector> reflector;
    /// Default 2^(-2c) / max_iterations.
    std::optional<double> reflection_epsilon;
    /// Confidence of the closing |pi> measurement; unset means c. The leak
    /// target is 2^-(c+2) times 1/N (from |u>) or pi_seed (unsearch).
    std::optional<unsigned> measurement_confidence;
    /// Explicit config for the closing |pi> measurement.
    std::optional<PhaseDetectionConfig> measurement;
    ScheduleOptions schedule;
};

struct AmplificationReport {
    bool succeeded = false;
    std::uint64_t iterations_used = 0;
    std::uint64_t walk_calls = 0;
    std::uint64_t attempts = 0;
    std::optional<std::size_t> sampled_index;
    std::optional<StateVector> output_state;
};

/// Samples an index of M distributed as pi restricted to M, starting every
/// attempt from `pi_state`. Throws ExhaustedRetries.
AmplificationReport search(const WalkBundlePtr& b, const MarkedSet& m, const StateVector& pi_state, unsigned c,
                           RngStream& rng, const AmplifyOptions& opts = {});

/// Prepares |pi> from U_P|seed>|0> by running the search backwards, then
/// certifies it with the |pi> projective measurement. Throws
/// PreconditionViolated if pi_seed = 0 and ExhaustedRetries.
AmplificationReport unsearch_from_basis(const WalkBundlePtr& b, std::size_t seed, unsigned c, RngStream& rng,
                                        const AmplifyOptions& opts = {});

/// Prepares |pi> from |u> = U_P sum_i |i>|0> / sqrt(N): direct attempts,
/// then amplification between the |u> reflection and the |pi> reflection.
/// Throws ExhaustedRetries.
AmplificationReport prepare_from_uniform_amplified(const WalkBundlePtr& b, unsigned c, RngStream& rng,
                                                   const AmplifyOptions& opts = {});

/// Version of prepare_from_uniform_amplified that reports failure instead of
/// throwing.
AmplificationReport try_prepare_from_uniform(const WalkBundlePtr& b, unsigned c, RngStream& rng,
                                             const AmplifyOptions& opts = {});

/// Non-throwing unsearch.
AmplificationReport try_unsearch_from_basis(const WalkBundlePtr& b, std::size_t seed, unsigned c, RngStream& rng,
                                            const AmplifyOptions& opts = {});

}  // namespace szmix
