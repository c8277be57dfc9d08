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

// Dense statevector simulation of the two-register walk space, optionally
// extended by qubit ancillas.
//
// Amplitude layout: index = ancilla * n^2 + i * n + j, where i is the
// register-I value and j the register-II value. Ancilla bit b is bit b of
// the ancilla pattern.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "szmix/cost_ledger.hpp"
#include "szmix/rng.hpp"

namespace szmix {

using Complex = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;

inline constexpr double kNormTolerance = 1e-10;

enum class Register { I, II, Ancilla };

class StateVector {
public:
    /// Takes amplitudes of length n^2 * 2^ancilla_bits. Throws
    /// DimensionMismatch on a wrong length and DomainError if the squared norm
    /// is off by more than kNormTolerance.
    StateVector(std::size_t n, Amplitudes amplitudes, unsigned ancilla_bits = 0);

    /// Normalizes a nonzero vector instead of rejecting it.
    static StateVector normalized(std::size_t n, Amplitudes amplitudes, unsigned ancilla_bits = 0);

    /// |i>_I |j>_II |ancilla>.
    static StateVector basis(std::size_t n, std::size_t i, std::size_t j, unsigned ancilla_bits = 0,
                             std::uint64_t ancilla = 0);

    std::size_t n() const noexcept { return n_; }
    unsigned ancilla_bits() const noexcept { return ancilla_bits_; }
    std::size_t walk_dim() const noexcept { return n_ * n_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }

    const Amplitudes& amplitudes() const noexcept { return amps_; }
    Amplitudes& mutable_amplitudes() noexcept { return amps_; }

    Complex amplitude(std::size_t i, std::size_t j, std::uint64_t ancilla = 0) const {
        return amps_(static_cast<Eigen::Index>(ancilla * walk_dim() + i * n_ + j));
    }

    double norm() const { return amps_.norm(); }

    /// Appends `bits` ancilla qubits in |0>.
    StateVector with_ancillas(unsigned bits) const;

    /// Walk-space part with all ancillas in |0>, unnormalized.
    Amplitudes ancilla_zero_component() const;

    /// Outcome probabilities of a computational-basis measurement.
    Eigen::VectorXd register_probabilities(Register which) const;

private:
    std::size_t n_;
    unsigned ancilla_bits_;
    Amplitudes amps_;
};

enum class OpTag { Untagged, Walk, Diffusion };

/// A linear map on a fixed-dimension space, stored as an application rule.
class LinearOperator {
public:
    using Rule = std::function<void(const Amplitudes& in, Amplitudes& out)>;

    LinearOperator(std::string name, std::size_t dim, Rule rule, OpTag tag = OpTag::Untagged,
                   bool unitary = true, std::uint64_t cost = 1);

    static LinearOperator dense(std::string name, Eigen::MatrixXcd m, OpTag tag = OpTag::Untagged,
                                bool unitary = true);
    static LinearOperator identity(std::size_t dim);

    const std::string& name() const noexcept { return name_; }
    std::size_t dimension() const noexcept { return dim_; }
    OpTag tag() const noexcept { return tag_; }
    bool is_unitary() const noexcept { return unitary_; }
    /// Number of tagged calls charged per application.
    std::uint64_t cost() const noexcept { return cost_; }

    /// Applies without charging any ledger.
    Amplitudes operator()(const Amplitudes& in) const;

    /// Explicit matrix, by application to every basis vector.
    Eigen::MatrixXcd to_dense() const;

    /// `this` after `first`. Tag and cost are taken from `this`.
    LinearOperator after(const LinearOperator& first) const;

private:
    std::string name_;
    std::size_t dim_;
    Rule rule_;
    OpTag tag_;
    bool unitary_;
    std::uint64_t cost_;
};

/// op * s, charging the active ledger for the operator's tag. An operator of
/// walk-space dimension acts on every ancilla sector of an extended state.
/// Throws DimensionMismatch.
StateVector apply(const LinearOperator& op, const StateVector& s);

/// Applies op^power on the sectors where ancilla `bit` is set.
StateVector apply_controlled(const LinearOperator& op, std::uint64_t power, const StateVector& s,
                             unsigned bit);

StateVector apply_hadamard(const StateVector& s, unsigned bit);

struct MeasurementResult {
    std::uint64_t outcome;
    StateVector state;
};

/// Born-rule measurement with collapse and renormalization. For
/// Register::Ancilla the outcome is the full ancilla pattern.
MeasurementResult measure_register(const StateVector& s, Register which, RngStream& rng);

/// <a|b>. Throws DimensionMismatch.
Complex overlap(const StateVector& a, const StateVector& b);

/// sqrt(1 - |<a|b>|^2).
double trace_distance_pure(const StateVector& a, const StateVector& b);

}  // namespace szmix
