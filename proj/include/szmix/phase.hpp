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

// Phase detection on W(P), the |pi> projective measurement and the
// approximate reflection ARO(P).
//
// A detection round uses r ancillas: Hadamards, controlled W^(2^j) on ancilla
// j, Hadamards, then a measurement. A busy eigenvector with phase alpha leaves
// every ancilla at 0 with probability |a(alpha)|^2, where
// a(alpha) = 2^-r sum_{x < 2^r} e^{i x alpha}. Rounds are repeated k times.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>

#include "szmix/rng.hpp"
#include "szmix/statevector.hpp"
#include "szmix/szegedy.hpp"

namespace szmix {

struct PhaseDetectionConfig {
    unsigned ancilla_bits = 2;  ///< r
    unsigned repetitions = 1;   ///< k
    double epsilon = 0.25;      ///< target error
};

/// Zero-outcome amplitude a(alpha) of one round with r ancillas.
Complex zero_amplitude(unsigned ancilla_bits, double alpha);

/// Upper bound on |a(alpha)|^2 over |alpha| in [gap, pi]:
/// min(1, 1 / (4^r sin^2(gap / 2))).
double zero_leak_bound(unsigned ancilla_bits, double phase_gap);

/// max(2, ceil(log2(2 pi / gap))).
unsigned ancilla_bits_for(double phase_gap);

/// Config whose rounds miss a nonzero phase with probability <= epsilon.
PhaseDetectionConfig measurement_config(double phase_gap, double epsilon);

/// Config for which ||ARO v - R v|| <= epsilon on every unit v in A + B.
PhaseDetectionConfig reflection_config(double phase_gap, double epsilon);

/// leak^k, the detection error bound.
double measurement_error_bound(const PhaseDetectionConfig& cfg, double phase_gap);

/// 2 leak^(k/2), the reflection error bound.
double reflection_error_bound(const PhaseDetectionConfig& cfg, double phase_gap);

/// k (2^r - 1).
std::uint64_t detection_walk_calls(const PhaseDetectionConfig& cfg);

enum class PhaseBackend { Spectral, Circuit };

struct PhaseDetectResult {
    bool zero_phase;
    StateVector state;
};

/// Runs the k rounds, stopping at the first round with a nonzero ancilla
/// pattern. Throws ConfigTooCoarse if the config misses the bundle's
/// predicted phase gap by more than cfg.epsilon.
PhaseDetectResult phase_detect(const WalkBundle& b, const StateVector& s, const PhaseDetectionConfig& cfg,
                               RngStream& rng, PhaseBackend backend = PhaseBackend::Spectral);

struct ProjectionResult {
    bool success;
    StateVector state;
};

/// Membership test for A followed by phase detection at 2^-(c+2).
ProjectionResult pi_projective_measurement(const WalkBundle& b, const StateVector& s, unsigned c, RngStream& rng,
                                           PhaseBackend backend = PhaseBackend::Spectral);

/// Same with an explicit detection config.
ProjectionResult pi_projective_measurement(const WalkBundle& b, const StateVector& s,
                                           const PhaseDetectionConfig& cfg, RngStream& rng,
                                           PhaseBackend backend = PhaseBackend::Spectral);

/// 2|pi><pi| - 1 built from the reference |pi>.
LinearOperator exact_reflection(const WalkBundle& b);

/// ARO(P): detection, phase flip on any nonzero ancilla pattern, inverse
/// detection. Applying it to a walk-space state and discarding the ancillas
/// gives a channel; apply() samples one trajectory of that channel.
class ApproximateReflection {
public:
    /// Throws ConfigTooCoarse.
    ApproximateReflection(WalkBundlePtr bundle, PhaseDetectionConfig cfg);

    const PhaseDetectionConfig& config() const noexcept { return cfg_; }
    const WalkBundle& bundle() const noexcept { return *bundle_; }
    unsigned total_ancillas() const noexcept { return cfg_.ancilla_bits * cfg_.repetitions; }
    /// 2 k (2^r - 1).
    std::uint64_t walk_calls_per_apply() const noexcept { return 2 * detection_walk_calls(cfg_); }

    StateVector apply(const StateVector& s, RngStream& rng) const;

    /// ||ARO(s (x) 0) - (R s) (x) 0||, computed exactly.
    double error_norm(const StateVector& s) const;

    /// Norm of the part of ARO(s (x) 0) with some ancilla away from 0.
    double ancilla_leakage(const StateVector& s) const;

    /// (<0| (x) 1) ARO (|0> (x) s), unnormalized.
    Amplitudes ancilla_zero_action(const StateVector& s) const;

    /// Walk-space density matrix of the channel output; small N only.
    Eigen::MatrixXcd output_density(const StateVector& s) const;

    /// Gate-level ARO on walk (x) kr ancillas; small configs only.
    StateVector apply_circuit(const StateVector& extended) const;

    /// apply_circuit as an operator on the extended space.
    LinearOperator extended_operator() const;

private:
    WalkBundlePtr bundle_;
    PhaseDetectionConfig cfg_;
    Eigen::VectorXcd amp_;          // A_t = a(phase_t)^k, last entry for the complement
    Eigen::MatrixXcd kraus_;        // row m: g_m(t)
};

ApproximateReflection approximate_reflection(WalkBundlePtr bundle, const PhaseDetectionConfig& cfg);

struct ErrorBudget {
    double eps_meas;                   ///< eta / 4
    double eps_samp;                   ///< 2^(-2c)
    PhaseDetectionConfig measurement;  ///< detection at eps_meas
    PhaseDetectionConfig sampling;     ///< reflection at eps_samp
};

/// Throws DomainError unless eta, delta in (0, 1] and c >= 1.
ErrorBudget error_budget(unsigned c, double eta, double delta);

/// sqrt(1/delta) sqrt(1/xi) (log(1/eps) + log sqrt(1/xi)), without constants.
double preparation_cost_estimate(double delta, double xi, double eps);

}  // namespace szmix
