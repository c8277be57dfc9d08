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

#include "szmix/phase.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "szmix/errors.hpp"

namespace szmix {

namespace {

constexpr std::size_t kMaxCircuitDim = std::size_t{1} << 22;

// Walk-space vector split into busy coordinates and the complement of A + B.
struct Split {
    Eigen::VectorXcd c;
    Amplitudes perp;
};

Split split(const WalkSpectrum& sp, const Amplitudes& psi) {
    Split out;
    out.c = sp.coefficients(psi);
    out.perp = psi - sp.vectors() * out.c;
    return out;
}

Amplitudes join(const WalkSpectrum& sp, const Split& s) { return sp.vectors() * s.c + s.perp; }

StateVector extract_sector(const StateVector& s, std::uint64_t pattern) {
    const auto wd = static_cast<Eigen::Index>(s.walk_dim());
    Amplitudes v = s.amplitudes().segment(static_cast<Eigen::Index>(pattern) * wd, wd);
    return StateVector::normalized(s.n(), std::move(v));
}

StateVector hadamard_all(StateVector s, unsigned first, unsigned count) {
    for (unsigned q = first; q < first + count; ++q) s = apply_hadamard(s, q);
    return s;
}

bool detect_round_spectral(const WalkSpectrum& sp, Split& st, unsigned r, RngStream& rng) {
    const Eigen::VectorXd& ph = sp.phases();
    bool all_zero = true;
    for (unsigned j = 0; j < r; ++j) {
        const double mult = std::ldexp(1.0, static_cast<int>(j));
        Eigen::VectorXcd f0(ph.size());
        for (Eigen::Index t = 0; t < ph.size(); ++t) f0(t) = 0.5 * (1.0 + std::polar(1.0, mult * ph(t)));
        const double perp_w = st.perp.squaredNorm();
        const double w0 = f0.cwiseProduct(st.c).squaredNorm() + perp_w;
        const double total = st.c.squaredNorm() + perp_w;
        const bool zero = rng.uniform() * total < w0;
        if (zero) {
            st.c = f0.cwiseProduct(st.c);
        } else {
            st.c = (Eigen::VectorXcd::Ones(ph.size()) - f0).cwiseProduct(st.c);
            st.perp.setZero();
            all_zero = false;
        }
        const double nrm = std::sqrt(st.c.squaredNorm() + st.perp.squaredNorm());
        st.c /= nrm;
        st.perp /= nrm;
    }
    return all_zero;
}

}  // namespace

// ---------------------------------------------------------------------------
// Calibration

Complex zero_amplitude(unsigned ancilla_bits, double alpha) {
    const double m = std::ldexp(1.0, static_cast<int>(ancilla_bits));
    const Complex z = std::polar(1.0, alpha);
    if (std::abs(1.0 - z) < 1e-12) return 1.0;
    return (1.0 - std::polar(1.0, m * alpha)) / (m * (1.0 - z));
}

double zero_leak_bound(unsigned ancilla_bits, double phase_gap) {
    const double m = std::ldexp(1.0, static_cast<int>(ancilla_bits));
    const double s = std::sin(std::min(phase_gap, std::numbers::pi) / 2.0);
    if (!(s > 0.0)) return 1.0;
    return std::min(1.0, 1.0 / (m * m * s * s));
}

unsigned ancilla_bits_for(double phase_gap) {
    if (!(phase_gap > 0.0)) throw DomainError("phase gap must be positive");
    const double need = std::ceil(std::log2(2.0 * std::numbers::pi / phase_gap) - 1e-12);
    return static_cast<unsigned>(std::max(2.0, need));
}

PhaseDetectionConfig measurement_config(double phase_gap, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
    PhaseDetectionConfig cfg;
    cfg.ancilla_bits = ancilla_bits_for(phase_gap);
    cfg.epsilon = epsilon;
    cfg.repetitions = 1;
    while (measurement_error_bound(cfg, phase_gap) > epsilon) ++cfg.repetitions;
    return cfg;
}

PhaseDetectionConfig reflection_config(double phase_gap, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
    PhaseDetectionConfig cfg;
    cfg.ancilla_bits = ancilla_bits_for(phase_gap);
    cfg.epsilon = epsilon;
    cfg.repetitions = 1;
    while (reflection_error_bound(cfg, phase_gap) > epsilon) ++cfg.repetitions;
    return cfg;
}

double measurement_error_bound(const PhaseDetectionConfig& cfg, double phase_gap) {
    return std::pow(zero_leak_bound(cfg.ancilla_bits, phase_gap), cfg.repetitions);
}

double reflection_error_bound(const PhaseDetectionConfig& cfg, double phase_gap) {
    return std::min(2.0, 2.0 * std::pow(zero_leak_bound(cfg.ancilla_bits, phase_gap), 0.5 * cfg.repetitions));
}

std::uint64_t detection_walk_calls(const PhaseDetectionConfig& cfg) {
    return static_cast<std::uint64_t>(cfg.repetitions) * ((std::uint64_t{1} << cfg.ancilla_bits) - 1);
}

// ---------------------------------------------------------------------------
// Phase detection and projective measurement

PhaseDetectResult phase_detect(const WalkBundle& b, const StateVector& s, const PhaseDetectionConfig& cfg,
                               RngStream& rng, PhaseBackend backend) {
    if (s.ancilla_bits() != 0 || s.n() != b.n()) throw DimensionMismatch("phase detection needs a walk-space state");
    if (cfg.ancilla_bits == 0 || cfg.repetitions == 0) throw ConfigTooCoarse("empty detection config");
    const double bound = measurement_error_bound(cfg, b.predicted_phase_gap());
    if (bound > cfg.epsilon * (1.0 + 1e-12)) {
        throw ConfigTooCoarse("detection error bound " + std::to_string(bound) + " exceeds " +
                              std::to_string(cfg.epsilon));
    }
    const unsigned r = cfg.ancilla_bits;

    if (backend == PhaseBackend::Spectral) {
        const WalkSpectrum& sp = b.spectrum();
        Split st = split(sp, s.amplitudes());
        for (unsigned round = 0; round < cfg.repetitions; ++round) {
            charge_walk_calls((std::uint64_t{1} << r) - 1);
            if (!detect_round_spectral(sp, st, r, rng)) {
                return {false, StateVector::normalized(s.n(), join(sp, st))};
            }
        }
        return {true, StateVector::normalized(s.n(), join(sp, st))};
    }

    if (s.walk_dim() << r > kMaxCircuitDim) throw DomainError("circuit backend: state too large");
    StateVector cur = s;
    for (unsigned round = 0; round < cfg.repetitions; ++round) {
        StateVector ext = hadamard_all(cur.with_ancillas(r), 0, r);
        for (unsigned j = 0; j < r; ++j) ext = apply_controlled(b.walk(), std::uint64_t{1} << j, ext, j);
        ext = hadamard_all(std::move(ext), 0, r);
        MeasurementResult m = measure_register(ext, Register::Ancilla, rng);
        cur = extract_sector(m.state, m.outcome);
        if (m.outcome != 0) return {false, cur};
    }
    return {true, cur};
}

ProjectionResult pi_projective_measurement(const WalkBundle& b, const StateVector& s, unsigned c, RngStream& rng,
                                           PhaseBackend backend) {
    return pi_projective_measurement(
        b, s, measurement_config(b.predicted_phase_gap(), std::ldexp(1.0, -static_cast<int>(c) - 2)), rng, backend);
}

ProjectionResult pi_projective_measurement(const WalkBundle& b, const StateVector& s,
                                           const PhaseDetectionConfig& cfg, RngStream& rng, PhaseBackend backend) {
    charge_projective_measurement();
    MembershipResult mem = membership_test_A(s, b.diffusion(), rng);
    if (!mem.in_a) return {false, std::move(mem.state)};
    PhaseDetectResult pd = phase_detect(b, mem.state, cfg, rng, backend);
    return {pd.zero_phase, std::move(pd.state)};
}

LinearOperator exact_reflection(const WalkBundle& b) {
    const Amplitudes pi = b.pi_state().amplitudes();
    return LinearOperator("R(P)", b.walk_dim(), [pi](const Amplitudes& in, Amplitudes& out) {
        out = 2.0 * pi.dot(in) * pi - in;
    });
}

// ---------------------------------------------------------------------------
// Approximate reflection

ApproximateReflection::ApproximateReflection(WalkBundlePtr bundle, PhaseDetectionConfig cfg)
    : bundle_(std::move(bundle)), cfg_(cfg) {
    if (cfg_.ancilla_bits == 0 || cfg_.repetitions == 0) throw ConfigTooCoarse("empty detection config");
    const double bound = reflection_error_bound(cfg_, bundle_->predicted_phase_gap());
    if (bound > cfg_.epsilon * (1.0 + 1e-12)) {
        throw ConfigTooCoarse("reflection error bound " + std::to_string(bound) + " exceeds " +
                              std::to_string(cfg_.epsilon));
    }

    const Eigen::VectorXd& ph = bundle_->spectrum().phases();
    const Eigen::Index d = ph.size();
    Eigen::VectorXd theta(d + 1);
    theta.head(d) = ph;
    theta(d) = 0.0;
    amp_.resize(d + 1);
    for (Eigen::Index t = 0; t <= d; ++t) {
        amp_(t) = std::pow(zero_amplitude(cfg_.ancilla_bits, theta(t)), static_cast<int>(cfg_.repetitions));
    }

    // Gram matrix of the ancilla states chi_t = 2 A_t phi(-theta_t) - |0>.
    Eigen::MatrixXcd gram(d + 1, d + 1);
    for (Eigen::Index a = 0; a <= d; ++a) {
        for (Eigen::Index b = 0; b <= d; ++b) {
            const Complex cross = std::pow(zero_amplitude(cfg_.ancilla_bits, theta(a) - theta(b)),
                                           static_cast<int>(cfg_.repetitions));
            gram(a, b) = 4.0 * std::conj(amp_(a)) * amp_(b) * cross - 2.0 * std::norm(amp_(a)) -
                         2.0 * std::norm(amp_(b)) + 1.0;
        }
    }
    gram = 0.5 * (gram + gram.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double top = lam.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index m = 0; m < lam.size(); ++m) {
        if (lam(m) > 1e-14 * top) keep.push_back(m);
    }
    kraus_.resize(static_cast<Eigen::Index>(keep.size()), d + 1);
    for (std::size_t row = 0; row < keep.size(); ++row) {
        const Eigen::Index m = keep[row];
        kraus_.row(static_cast<Eigen::Index>(row)) = std::sqrt(lam(m)) * es.eigenvectors().col(m).conjugate().transpose();
    }
}

StateVector ApproximateReflection::apply(const StateVector& s, RngStream& rng) const {
    if (s.ancilla_bits() != 0 || s.n() != bundle_->n()) throw DimensionMismatch("ARO needs a walk-space state");
    charge_walk_calls(walk_calls_per_apply());
    const WalkSpectrum& sp = bundle_->spectrum();
    const Split st = split(sp, s.amplitudes());
    const Eigen::Index d = st.c.size();

    Eigen::VectorXd weight(d + 1);
    weight.head(d) = st.c.cwiseAbs2();
    weight(d) = st.perp.squaredNorm();
    const Eigen::VectorXd probs = kraus_.cwiseAbs2() * weight;
    const std::size_t m = rng.categorical(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())));

    const auto g = kraus_.row(static_cast<Eigen::Index>(m));
    Split out;
    out.c = g.head(d).transpose().cwiseProduct(st.c);
    out.perp = g(d) * st.perp;
    return StateVector::normalized(s.n(), join(sp, out));
}

Eigen::MatrixXcd ApproximateReflection::output_density(const StateVector& s) const {
    if (s.ancilla_bits() != 0 || s.n() != bundle_->n()) throw DimensionMismatch("ARO needs a walk-space state");
    const WalkSpectrum& sp = bundle_->spectrum();
    const Split st = split(sp, s.amplitudes());
    const Eigen::Index d = st.c.size();
    const auto wd = static_cast<Eigen::Index>(s.walk_dim());
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(wd, wd);
    for (Eigen::Index m = 0; m < kraus_.rows(); ++m) {
        Split out;
        out.c = kraus_.row(m).head(d).transpose().cwiseProduct(st.c);
        out.perp = kraus_(m, d) * st.perp;
        const Amplitudes v = join(sp, out);
        rho += v * v.adjoint();
    }
    return rho;
}

Amplitudes ApproximateReflection::ancilla_zero_action(const StateVector& s) const {
    if (s.ancilla_bits() != 0 || s.n() != bundle_->n()) throw DimensionMismatch("ARO needs a walk-space state");
    const WalkSpectrum& sp = bundle_->spectrum();
    Split st = split(sp, s.amplitudes());
    const Eigen::Index d = st.c.size();
    for (Eigen::Index t = 0; t < d; ++t) st.c(t) *= 2.0 * std::norm(amp_(t)) - 1.0;
    return join(sp, st);
}

double ApproximateReflection::error_norm(const StateVector& s) const {
    const Amplitudes zero_part = ancilla_zero_action(s);
    const Amplitudes& pi = bundle_->pi_state().amplitudes();
    const Amplitudes reflected = 2.0 * pi.dot(s.amplitudes()) * pi - s.amplitudes();
    const double sq = 2.0 - 2.0 * reflected.dot(zero_part).real();
    return std::sqrt(std::max(0.0, sq));
}

double ApproximateReflection::ancilla_leakage(const StateVector& s) const {
    return std::sqrt(std::max(0.0, 1.0 - ancilla_zero_action(s).squaredNorm()));
}

StateVector ApproximateReflection::apply_circuit(const StateVector& extended) const {
    const unsigned r = cfg_.ancilla_bits;
    const unsigned bits = total_ancillas();
    if (extended.ancilla_bits() != bits || extended.n() != bundle_->n()) {
        throw DimensionMismatch("ARO circuit needs walk space with " + std::to_string(bits) + " ancillas");
    }
    if (extended.dim() > kMaxCircuitDim) throw DomainError("ARO circuit: state too large");

    StateVector s = hadamard_all(extended, 0, bits);
    for (unsigned round = 0; round < cfg_.repetitions; ++round) {
        for (unsigned j = 0; j < r; ++j) s = apply_controlled(bundle_->walk(), std::uint64_t{1} << j, s, round * r + j);
    }
    s = hadamard_all(std::move(s), 0, bits);

    Amplitudes flipped = s.amplitudes();
    const auto wd = static_cast<Eigen::Index>(s.walk_dim());
    flipped.tail(flipped.size() - wd) *= -1.0;
    s = StateVector(s.n(), std::move(flipped), bits);

    s = hadamard_all(std::move(s), 0, bits);
    for (unsigned round = cfg_.repetitions; round-- > 0;) {
        for (unsigned j = r; j-- > 0;) {
            s = apply_controlled(bundle_->walk_adjoint(), std::uint64_t{1} << j, s, round * r + j);
        }
    }
    return hadamard_all(std::move(s), 0, bits);
}

LinearOperator ApproximateReflection::extended_operator() const {
    const std::size_t dim = bundle_->walk_dim() << total_ancillas();
    if (dim > kMaxCircuitDim) throw DomainError("ARO circuit: state too large");
    ApproximateReflection self = *this;
    const std::size_t n = bundle_->n();
    const unsigned bits = total_ancillas();
    return LinearOperator(
        "ARO(P)", dim,
        [self, n, bits](const Amplitudes& in, Amplitudes& out) {
            const double nrm = in.norm();
            if (nrm == 0.0) {
                out = Amplitudes::Zero(in.size());
                return;
            }
            out = nrm * self.apply_circuit(StateVector(n, in / nrm, bits)).amplitudes();
        },
        OpTag::Walk, true, walk_calls_per_apply());
}

ApproximateReflection approximate_reflection(WalkBundlePtr bundle, const PhaseDetectionConfig& cfg) {
    return ApproximateReflection(std::move(bundle), cfg);
}

// ---------------------------------------------------------------------------
// Budgets

ErrorBudget error_budget(unsigned c, double eta, double delta) {
    if (c < 1) throw DomainError("confidence must be at least 1");
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta must lie in (0, 1]");
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must lie in (0, 1]");
    if (c > 500) throw DomainError("confidence too large");
    const double gap = 2.0 * std::acos(1.0 - delta);
    ErrorBudget eb;
    eb.eps_meas = eta / 4.0;
    eb.eps_samp = std::ldexp(1.0, -2 * static_cast<int>(c));
    eb.measurement = measurement_config(gap, eb.eps_meas);
    eb.sampling = reflection_config(gap, eb.eps_samp);
    return eb;
}

double preparation_cost_estimate(double delta, double xi, double eps) {
    if (!(delta > 0.0 && xi > 0.0 && xi <= 1.0 && eps > 0.0 && eps < 1.0)) {
        throw DomainError("preparation_cost_estimate: arguments out of range");
    }
    const double s = std::sqrt(1.0 / xi);
    return std::sqrt(1.0 / delta) * s * (std::log(1.0 / eps) + std::log(s));
}

}  // namespace szmix
