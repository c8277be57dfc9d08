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

#include "szmix/markov.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "szmix/errors.hpp"

namespace szmix {

namespace {

constexpr double kUnitEigenvalueTol = 1e-8;

}  // namespace

// ---------------------------------------------------------------------------
// StochasticMatrix / Distribution

StochasticMatrix StochasticMatrix::validate(const std::vector<std::vector<double>>& raw, double tol) {
    const std::size_t n = raw.size();
    Eigen::MatrixXd m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (raw[r].size() != n) {
            throw NotSquare("row " + std::to_string(r) + " has " + std::to_string(raw[r].size()) +
                            " entries, expected " + std::to_string(n));
        }
        for (std::size_t c = 0; c < n; ++c) m(r, c) = raw[r][c];
    }
    return validate(m, tol);
}

StochasticMatrix StochasticMatrix::validate(const Eigen::MatrixXd& raw, double tol) {
    if (raw.rows() != raw.cols()) {
        throw NotSquare(std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()));
    }
    if (raw.rows() == 0) throw NotSquare("empty matrix");
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        for (Eigen::Index r = 0; r < raw.rows(); ++r) {
            if (!(raw(r, c) >= 0.0)) {
                throw NegativeEntry("entry (" + std::to_string(r) + "," + std::to_string(c) +
                                    ") = " + std::to_string(raw(r, c)));
            }
        }
        const double s = raw.col(c).sum();
        if (std::abs(s - 1.0) > tol) throw ColumnSumViolation(static_cast<std::size_t>(c), s);
    }
    return StochasticMatrix(raw);
}

StochasticMatrix StochasticMatrix::identity(std::size_t n) {
    return StochasticMatrix(Eigen::MatrixXd::Identity(n, n));
}

Distribution Distribution::validate(const Eigen::VectorXd& probs, double tol) {
    if (probs.size() == 0) throw InvalidDistribution("empty");
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        if (!(probs(i) >= 0.0)) {
            throw InvalidDistribution("entry " + std::to_string(i) + " = " + std::to_string(probs(i)));
        }
    }
    const double s = probs.sum();
    if (std::abs(s - 1.0) > tol) throw InvalidDistribution("sums to " + std::to_string(s));
    return Distribution(probs);
}

Distribution Distribution::validate(const std::vector<double>& probs, double tol) {
    return validate(Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size())), tol);
}

Distribution Distribution::normalized(Eigen::VectorXd weights) {
    if (weights.size() == 0) throw InvalidDistribution("empty");
    weights = weights.cwiseMax(0.0);
    const double s = weights.sum();
    if (!(s > 0.0)) throw InvalidDistribution("no positive weight");
    return Distribution(weights / s);
}

Distribution Distribution::uniform(std::size_t n) {
    if (n == 0) throw InvalidDistribution("empty");
    return Distribution(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

Distribution Distribution::point_mass(std::size_t n, std::size_t index) {
    if (index >= n) throw DomainError("point mass index out of range");
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    p(static_cast<Eigen::Index>(index)) = 1.0;
    return Distribution(p);
}

// ---------------------------------------------------------------------------
// Stationary distribution and spectrum

Distribution stationary_distribution(const StochasticMatrix& p, double tol) {
    const Eigen::MatrixXd& m = p.matrix();
    const Eigen::Index n = m.rows();

    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    int unit_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(es.eigenvalues()(i) - std::complex<double>(1.0, 0.0)) < kUnitEigenvalueTol) ++unit_count;
    }
    if (unit_count != 1) {
        throw NotErgodic("eigenvalue 1 has multiplicity " + std::to_string(unit_count));
    }

    // (P - I) pi = 0 with the normalization row appended.
    Eigen::MatrixXd a(n + 1, n);
    a.topRows(n) = m - Eigen::MatrixXd::Identity(n, n);
    a.row(n).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    b(n) = 1.0;
    Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);

    if (pi.minCoeff() <= 1e-14) {
        throw NotErgodic("fixed point has a zero-probability state");
    }
    pi /= pi.sum();

    // Power-iteration polish when the direct solve is not tight enough.
    for (int it = 0; it < 100000 && (m * pi - pi).lpNorm<1>() > tol; ++it) {
        pi = m * pi;
        pi /= pi.sum();
    }
    return Distribution::normalized(pi);
}

bool is_reversible(const StochasticMatrix& p, const Distribution& pi, double tol) {
    const std::size_t n = p.size();
    if (pi.size() != n) throw DimensionMismatch("chain and distribution sizes differ");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(pi[i] * p(j, i) - pi[j] * p(i, j)) > tol) return false;
        }
    }
    return true;
}

SpectralSummary spectral_gap(const StochasticMatrix& p, double reversibility_tol) {
    return spectral_gap(p, stationary_distribution(p), reversibility_tol);
}

SpectralSummary spectral_gap(const StochasticMatrix& p, const Distribution& pi, double reversibility_tol) {
    if (!is_reversible(p, pi, reversibility_tol)) throw NotReversible("detailed balance fails");
    const Eigen::Index n = static_cast<Eigen::Index>(p.size());

    // D^{-1/2} P D^{1/2} is symmetric under detailed balance.
    const Eigen::VectorXd root = pi.probs().cwiseSqrt();
    Eigen::MatrixXd s = root.cwiseInverse().asDiagonal() * p.matrix() * root.asDiagonal();
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);

    SpectralSummary out;
    out.eigenvalues = es.eigenvalues();
    double second = 0.0;
    if (n > 1) second = std::max(std::abs(out.eigenvalues(0)), std::abs(out.eigenvalues(n - 2)));
    out.spectral_gap = std::min(1.0, 1.0 - second);
    if (out.spectral_gap <= 1e-12) throw NotErgodic("spectral gap vanishes");
    out.phase_gap = 2.0 * std::acos(1.0 - out.spectral_gap);
    return out;
}

StochasticMatrix time_reversal(const StochasticMatrix& p, const Distribution& pi) {
    const std::size_t n = p.size();
    if (pi.size() != n) throw DimensionMismatch("chain and distribution sizes differ");
    if (pi.min() <= 0.0) throw ZeroStationaryProbability("pi has a zero entry");
    const Eigen::VectorXd& w = pi.probs();
    Eigen::MatrixXd r = w.asDiagonal() * p.matrix().transpose() * w.cwiseInverse().asDiagonal();
    // Column sums equal (P pi)_j / pi_j, exact only up to the accuracy of pi.
    for (Eigen::Index c = 0; c < r.cols(); ++c) r.col(c) /= r.col(c).sum();
    return StochasticMatrix::validate(r, 1e-9);
}

// ---------------------------------------------------------------------------
// Distribution functionals

double fidelity_coherent(const Distribution& a, const Distribution& b) {
    if (a.size() != b.size()) throw DimensionMismatch("distribution sizes differ");
    const double s = a.probs().cwiseProduct(b.probs()).cwiseSqrt().sum();
    return std::min(1.0, s * s);
}

double f_value(const Distribution& pi) { return pi.probs().cwiseSqrt().sum(); }

ModeInfo mode(const Distribution& pi) {
    ModeInfo m{0, pi[0]};
    for (std::size_t i = 1; i < pi.size(); ++i) {
        if (pi[i] > m.prob) m = {i, pi[i]};
    }
    return m;
}

double total_variation(const Distribution& a, const Distribution& b) {
    if (a.size() != b.size()) throw DimensionMismatch("distribution sizes differ");
    return 0.5 * (a.probs() - b.probs()).lpNorm<1>();
}

RegimeLabel lemma1_classify(const Distribution& pi, double tol) {
    const double n = static_cast<double>(pi.size());
    const double threshold = 1.0 / std::sqrt(n);
    const double f = f_value(pi);
    const ModeInfo m = mode(pi);

    RegimeLabel label;
    label.fidelity_to_uniform = std::min(1.0, f * f / n);
    label.mode_index = m.index;
    label.mode_prob = m.prob;
    if (label.fidelity_to_uniform >= threshold - tol) {
        label.regime = Regime::UniformAccessible;
        return label;
    }
    label.regime = Regime::ModeAccessible;
    if (m.prob < threshold - tol) {
        throw LemmaViolation("fidelity " + std::to_string(label.fidelity_to_uniform) +
                             " below 1/sqrt(n) but mode probability " + std::to_string(m.prob));
    }
    return label;
}

std::vector<std::size_t> lemma2_witness_set(const Distribution& pi, double tol) {
    const double n = static_cast<double>(pi.size());
    const double f = f_value(pi);
    if (f > std::pow(n, 0.25) + tol) {
        throw PreconditionViolated("f(pi) = " + std::to_string(f) + " exceeds n^(1/4)");
    }
    const double floor_prob = 1.0 / (4.0 * std::sqrt(n));
    std::vector<std::size_t> s;
    double mass = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (pi[i] >= floor_prob) {
            s.push_back(i);
            mass += pi[i];
        }
    }
    if (s.empty() || mass < 0.5 - tol) {
        throw LemmaViolation("witness set carries mass " + std::to_string(mass));
    }
    return s;
}

Distribution extremal_distribution(double p_max, std::size_t n) {
    if (!(p_max > 0.0 && p_max <= 1.0)) throw DomainError("p_max must lie in (0, 1]");
    // Guard against 1/p_max landing a hair below an integer.
    const auto k = static_cast<std::size_t>(std::floor(1.0 / p_max * (1.0 + 1e-12)));
    double remainder = 1.0 - static_cast<double>(k) * p_max;
    if (remainder < 1e-12) remainder = 0.0;
    const std::size_t needed = remainder > 0.0 ? k + 1 : k;
    if (needed > n) {
        throw TooFewStates("need " + std::to_string(needed) + " states, have " + std::to_string(n));
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    p.head(static_cast<Eigen::Index>(k)).setConstant(p_max);
    if (remainder > 0.0) p(static_cast<Eigen::Index>(k)) = remainder;
    return Distribution::normalized(p);
}

}  // namespace szmix
