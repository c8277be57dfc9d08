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

// Szegedy diffusion and walk operators.
//
// U_P is block diagonal over register I: U_P |i>|j> = |i> U_i |j>, where U_i
// is a real orthogonal N x N block whose first column is sqrt(P(:, i)).
// V_P = SWAP U_P SWAP acts the same way with the registers exchanged.
// A = span{U_P|i>|0>}, B = span{V_P|0>|j>}, W(P) = ref(B) ref(A).

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "szmix/markov.hpp"
#include "szmix/rng.hpp"
#include "szmix/statevector.hpp"

namespace szmix {

enum class Completion { Householder, GramSchmidt };

/// The family of blocks U_i defining U_P (and V_P).
class Diffusion {
public:
    static Diffusion build(const StochasticMatrix& p, Completion completion = Completion::Householder);

    std::size_t n() const noexcept { return n_; }
    /// sqrt of the transition matrix; column i is the first column of U_i.
    const Eigen::MatrixXd& amplitudes() const noexcept { return *sqrt_p_; }
    const Eigen::MatrixXd& block(std::size_t i) const { return (*blocks_)[i]; }

    // Raw kernels on walk-space vectors; no ledger charges.
    void apply_u(const Amplitudes& in, Amplitudes& out) const;
    void apply_u_adjoint(const Amplitudes& in, Amplitudes& out) const;
    void apply_v(const Amplitudes& in, Amplitudes& out) const;
    void apply_v_adjoint(const Amplitudes& in, Amplitudes& out) const;
    /// 2 Pi_A - 1 and 2 Pi_B - 1, each in O(N^2).
    void reflect_a(const Amplitudes& in, Amplitudes& out) const;
    void reflect_b(const Amplitudes& in, Amplitudes& out) const;

    // Diffusion-tagged operators.
    LinearOperator u() const;
    LinearOperator u_adjoint() const;
    LinearOperator v() const;
    LinearOperator v_adjoint() const;

private:
    std::size_t n_ = 0;
    std::shared_ptr<const Eigen::MatrixXd> sqrt_p_;
    std::shared_ptr<const std::vector<Eigen::MatrixXd>> blocks_;
};

/// U_P as a diffusion-tagged operator.
LinearOperator build_diffusion(const StochasticMatrix& p, Completion completion = Completion::Householder);

/// ref(A) = U_P (1 (x) Z) U_P^dagger and ref(B) = V_P (Z (x) 1) V_P^dagger.
/// Each application is charged as two diffusion calls.
LinearOperator build_ref_A(const Diffusion& d);
LinearOperator build_ref_B(const Diffusion& d);

/// Eigen-decomposition of W restricted to the busy subspace A + B.
class WalkSpectrum {
public:
    WalkSpectrum() = default;
    WalkSpectrum(Eigen::MatrixXcd vectors, Eigen::VectorXcd eigenvalues, double snap_tol);

    /// Orthonormal eigenvectors as columns (walk_dim x busy_dim).
    const Eigen::MatrixXcd& vectors() const noexcept { return vectors_; }
    const Eigen::VectorXcd& eigenvalues() const noexcept { return eigenvalues_; }
    /// arg of each eigenvalue in (-pi, pi], exactly 0 below the snap tolerance.
    /// An eigenvalue lambda of P gives args +-2 acos(lambda).
    const Eigen::VectorXd& phases() const noexcept { return phases_; }
    std::size_t busy_dimension() const noexcept { return static_cast<std::size_t>(phases_.size()); }
    std::size_t zero_phase_count() const;
    /// Smallest nonzero |phase|.
    double phase_gap() const;

    /// Coordinates V^dagger psi.
    Eigen::VectorXcd coefficients(const Amplitudes& psi) const;

    /// g(W) psi. The complement of A + B is treated as phase 0.
    Amplitudes apply_function(const std::function<Complex(double)>& g, const Amplitudes& psi) const;

private:
    Eigen::MatrixXcd vectors_;
    Eigen::VectorXcd eigenvalues_;
    Eigen::VectorXd phases_;
};

class WalkBundle {
public:
    struct Options {
        /// Spectral-gap value to use; computed from P when absent.
        std::optional<double> delta;
        Completion completion = Completion::Householder;
        double reversibility_tol = 1e-10;
        double busy_rank_tol = 1e-10;
        double phase_snap_tol = 1e-9;
    };

    /// Throws NotReversible (and NotErgodic from the stationary solve).
    static std::shared_ptr<const WalkBundle> build(const StochasticMatrix& p, const Options& opts);
    static std::shared_ptr<const WalkBundle> build(const StochasticMatrix& p) { return build(p, Options{}); }

    std::size_t n() const noexcept { return chain_.size(); }
    std::size_t walk_dim() const noexcept { return n() * n(); }
    const StochasticMatrix& chain() const noexcept { return chain_; }
    const Distribution& stationary() const noexcept { return pi_; }
    const Diffusion& diffusion() const noexcept { return diffusion_; }

    const LinearOperator& u() const noexcept { return u_; }
    const LinearOperator& u_adjoint() const noexcept { return u_adj_; }
    const LinearOperator& v() const noexcept { return v_; }
    const LinearOperator& v_adjoint() const noexcept { return v_adj_; }
    const LinearOperator& ref_a() const noexcept { return ref_a_; }
    const LinearOperator& ref_b() const noexcept { return ref_b_; }
    /// Walk-tagged W(P) and its inverse ref(A) ref(B).
    const LinearOperator& walk() const noexcept { return walk_; }
    const LinearOperator& walk_adjoint() const noexcept { return walk_adj_; }

    double delta() const noexcept { return delta_; }
    /// 2 acos(1 - delta).
    double predicted_phase_gap() const noexcept { return predicted_gap_; }
    const WalkSpectrum& spectrum() const noexcept { return spectrum_; }

    /// Orthonormal basis of A + B (real).
    const Eigen::MatrixXd& busy_basis() const noexcept { return busy_basis_; }

    /// Reference |pi> = U_P sum_i sqrt(pi_i)|i>|0>, built classically.
    const StateVector& pi_state() const noexcept { return pi_state_; }

private:
    WalkBundle(StochasticMatrix p, Distribution pi, Diffusion d);

    StochasticMatrix chain_;
    Distribution pi_;
    Diffusion diffusion_;
    LinearOperator u_, u_adj_, v_, v_adj_, ref_a_, ref_b_, walk_, walk_adj_;
    double delta_ = 0.0;
    double predicted_gap_ = 0.0;
    Eigen::MatrixXd busy_basis_;
    WalkSpectrum spectrum_;
    StateVector pi_state_;
};

using WalkBundlePtr = std::shared_ptr<const WalkBundle>;

/// Convenience alias for WalkBundle::build.
WalkBundlePtr build_walk(const StochasticMatrix& p, const WalkBundle::Options& opts = {});

/// U_P sum_i sqrt(pi_i)|i>|0>, charged as one diffusion call.
/// Throws DimensionMismatch.
StateVector coherent_encoding(const Distribution& pi, const Diffusion& d);

struct MembershipResult {
    bool in_a;
    StateVector state;
};

/// Applies U_P^dagger, measures whether register II is |0>, then applies U_P.
MembershipResult membership_test_A(const StateVector& s, const Diffusion& d, RngStream& rng);

/// Smallest nonzero |arg| over the busy-subspace spectrum of W.
double phase_gap_measured(const WalkBundle& b);

/// Dense W(P) for small N, built from the kernels.
Eigen::MatrixXd dense_walk(const Diffusion& d);

}  // namespace szmix
