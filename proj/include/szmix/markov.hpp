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

// Classical Markov-chain and distribution mathematics.
//
// Conventions: transition matrices are column-stochastic. Entry (j, i) is the
// probability of moving from state i to state j, and chains act on column
// vectors from the left, so a stationary distribution satisfies P pi = pi.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace szmix {

inline constexpr double kStochasticTolerance = 1e-12;

/// Column-stochastic transition matrix over n states.
class StochasticMatrix {
public:
    /// Validates a square grid (row-major, grid[row][col]).
    /// Throws NotSquare, NegativeEntry or ColumnSumViolation.
    static StochasticMatrix validate(const std::vector<std::vector<double>>& raw,
                                     double tol = kStochasticTolerance);
    static StochasticMatrix validate(const Eigen::MatrixXd& raw, double tol = kStochasticTolerance);

    static StochasticMatrix identity(std::size_t n);

    std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    double operator()(std::size_t row, std::size_t col) const { return m_(row, col); }
    const Eigen::MatrixXd& matrix() const noexcept { return m_; }

private:
    explicit StochasticMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
    Eigen::MatrixXd m_;
};

/// Probability vector over n states.
class Distribution {
public:
    /// Throws InvalidDistribution on negative entries or a bad total.
    static Distribution validate(const Eigen::VectorXd& probs, double tol = kStochasticTolerance);
    static Distribution validate(const std::vector<double>& probs, double tol = kStochasticTolerance);
    /// Clamps tiny negatives to zero and rescales; for numerically produced vectors.
    static Distribution normalized(Eigen::VectorXd weights);

    static Distribution uniform(std::size_t n);
    static Distribution point_mass(std::size_t n, std::size_t index);

    std::size_t size() const noexcept { return static_cast<std::size_t>(p_.size()); }
    double operator[](std::size_t i) const { return p_(static_cast<Eigen::Index>(i)); }
    const Eigen::VectorXd& probs() const noexcept { return p_; }
    double min() const { return p_.minCoeff(); }

private:
    explicit Distribution(Eigen::VectorXd p) : p_(std::move(p)) {}
    Eigen::VectorXd p_;
};

struct SpectralSummary {
    Eigen::VectorXd eigenvalues;  ///< ascending
    double spectral_gap = 0.0;    ///< 1 - max |lambda| over lambda != 1
    double phase_gap = 0.0;       ///< predicted: 2 acos(1 - spectral_gap)
};

enum class Regime { UniformAccessible, ModeAccessible };

struct RegimeLabel {
    Regime regime = Regime::UniformAccessible;
    double fidelity_to_uniform = 0.0;
    std::size_t mode_index = 0;
    double mode_prob = 0.0;
};

struct ModeInfo {
    std::size_t index = 0;
    double prob = 0.0;
};

/// Unique fixed point of an ergodic chain, with ||P pi - pi||_1 <= tol.
/// Throws NotErgodic if eigenvalue 1 is degenerate or the fixed point has a
/// zero entry.
Distribution stationary_distribution(const StochasticMatrix& p, double tol = 1e-12);

/// Eigenvalues, spectral gap and predicted phase gap of a reversible chain.
/// Throws NotReversible, or NotErgodic when the gap vanishes.
SpectralSummary spectral_gap(const StochasticMatrix& p, double reversibility_tol = 1e-10);
SpectralSummary spectral_gap(const StochasticMatrix& p, const Distribution& pi,
                             double reversibility_tol = 1e-10);

/// Detailed balance check |pi_i P(j,i) - pi_j P(i,j)| <= tol for all pairs.
bool is_reversible(const StochasticMatrix& p, const Distribution& pi, double tol = 1e-10);

/// P* = D(pi) P^T D(pi)^{-1}. Throws ZeroStationaryProbability.
StochasticMatrix time_reversal(const StochasticMatrix& p, const Distribution& pi);

/// Fidelity of the coherent encodings, (sum_i sqrt(a_i b_i))^2.
double fidelity_coherent(const Distribution& a, const Distribution& b);

/// f(pi) = sum_i sqrt(pi_i); fidelity to uniform equals f^2 / n.
double f_value(const Distribution& pi);

/// Largest probability and its smallest index.
ModeInfo mode(const Distribution& pi);

/// Total-variation distance (1/2) sum |a_i - b_i|.
double total_variation(const Distribution& a, const Distribution& b);

/// Splits distributions by which preparation route is guaranteed to work.
/// Fidelity to uniform exactly at 1/sqrt(n) counts as UniformAccessible.
RegimeLabel lemma1_classify(const Distribution& pi, double tol = 1e-12);

/// States with pi_i >= 1/(4 sqrt(n)). Requires f(pi) <= n^{1/4}; the
/// returned set carries at least half the mass.
std::vector<std::size_t> lemma2_witness_set(const Distribution& pi, double tol = 1e-12);

/// Fidelity-minimizing distribution with largest entry p_max: floor(1/p_max)
/// entries equal p_max, one entry takes the remainder, the rest are zero.
Distribution extremal_distribution(double p_max, std::size_t n);

}  // namespace szmix
