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

#include "szmix/szegedy.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <string>

#include "szmix/errors.hpp"

namespace szmix {

namespace {

using RowMatC = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<RowMatC>;
using ConstMapC = Eigen::Map<const RowMatC>;

Eigen::MatrixXd householder_block(const Eigen::VectorXd& p) {
    const Eigen::Index n = p.size();
    Eigen::VectorXd w = -p;
    w(0) += 1.0;
    const double ww = w.squaredNorm();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    if (ww > 1e-30) h -= (2.0 / ww) * w * w.transpose();
    return h;
}

Eigen::MatrixXd gram_schmidt_block(const Eigen::VectorXd& p) {
    const Eigen::Index n = p.size();
    Eigen::MatrixXd q(n, n);
    q.col(0) = p;
    Eigen::Index filled = 1;
    for (Eigen::Index e = 0; e < n && filled < n; ++e) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(n, e);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index k = 0; k < filled; ++k) v -= q.col(k).dot(v) * q.col(k);
        }
        const double nv = v.norm();
        if (nv < 1e-8) continue;
        q.col(filled++) = v / nv;
    }
    return q;
}

}  // namespace

// ---------------------------------------------------------------------------
// Diffusion

Diffusion Diffusion::build(const StochasticMatrix& p, Completion completion) {
    Diffusion d;
    d.n_ = p.size();
    auto sqrt_p = std::make_shared<Eigen::MatrixXd>(p.matrix().cwiseMax(0.0).cwiseSqrt());
    auto blocks = std::make_shared<std::vector<Eigen::MatrixXd>>();
    blocks->reserve(d.n_);
    for (std::size_t i = 0; i < d.n_; ++i) {
        Eigen::VectorXd col = sqrt_p->col(static_cast<Eigen::Index>(i));
        col.normalize();
        blocks->push_back(completion == Completion::Householder ? householder_block(col) : gram_schmidt_block(col));
    }
    d.sqrt_p_ = std::move(sqrt_p);
    d.blocks_ = std::move(blocks);
    return d;
}

void Diffusion::apply_u(const Amplitudes& in, Amplitudes& out) const {
    const auto n = static_cast<Eigen::Index>(n_);
    ConstMapC x(in.data(), n, n);
    out.resize(in.size());
    MapC y(out.data(), n, n);
    for (Eigen::Index i = 0; i < n; ++i) y.row(i) = x.row(i) * (*blocks_)[i].transpose();
}

void Diffusion::apply_u_adjoint(const Amplitudes& in, Amplitudes& out) const {
    const auto n = static_cast<Eigen::Index>(n_);
    ConstMapC x(in.data(), n, n);
    out.resize(in.size());
    MapC y(out.data(), n, n);
    for (Eigen::Index i = 0; i < n; ++i) y.row(i) = x.row(i) * (*blocks_)[i];
}

void Diffusion::apply_v(const Amplitudes& in, Amplitudes& out) const {
    const auto n = static_cast<Eigen::Index>(n_);
    ConstMapC x(in.data(), n, n);
    out.resize(in.size());
    MapC y(out.data(), n, n);
    for (Eigen::Index j = 0; j < n; ++j) y.col(j) = (*blocks_)[j] * x.col(j);
}

void Diffusion::apply_v_adjoint(const Amplitudes& in, Amplitudes& out) const {
    const auto n = static_cast<Eigen::Index>(n_);
    ConstMapC x(in.data(), n, n);
    out.resize(in.size());
    MapC y(out.data(), n, n);
    for (Eigen::Index j = 0; j < n; ++j) y.col(j) = (*blocks_)[j].transpose() * x.col(j);
}

void Diffusion::reflect_a(const Amplitudes& in, Amplitudes& out) const {
    const auto n = static_cast<Eigen::Index>(n_);
    ConstMapC x(in.data(), n, n);
    out.resize(in.size());
    MapC y(out.data(), n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto col = (*blocks_)[i].col(0);
        const Complex c = x.row(i) * col.cast<Complex>();
        y.row(i) = 2.0 * c * col.transpose().cast<Complex>() - x.row(i);
    }
}

void Diffusion::reflect_b(const Amplitudes& in, Amplitudes& out) const {
    const auto n = static_cast<Eigen::Index>(n_);
    ConstMapC x(in.data(), n, n);
    out.resize(in.size());
    MapC y(out.data(), n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto col = (*blocks_)[j].col(0);
        const Complex c = col.cast<Complex>().dot(x.col(j));
        y.col(j) = 2.0 * c * col.cast<Complex>() - x.col(j);
    }
}

LinearOperator Diffusion::u() const {
    Diffusion self = *this;
    return LinearOperator(
        "U_P", n_ * n_, [self](const Amplitudes& in, Amplitudes& out) { self.apply_u(in, out); }, OpTag::Diffusion);
}

LinearOperator Diffusion::u_adjoint() const {
    Diffusion self = *this;
    return LinearOperator(
        "U_P^dagger", n_ * n_, [self](const Amplitudes& in, Amplitudes& out) { self.apply_u_adjoint(in, out); },
        OpTag::Diffusion);
}

LinearOperator Diffusion::v() const {
    Diffusion self = *this;
    return LinearOperator(
        "V_P", n_ * n_, [self](const Amplitudes& in, Amplitudes& out) { self.apply_v(in, out); }, OpTag::Diffusion);
}

LinearOperator Diffusion::v_adjoint() const {
    Diffusion self = *this;
    return LinearOperator(
        "V_P^dagger", n_ * n_, [self](const Amplitudes& in, Amplitudes& out) { self.apply_v_adjoint(in, out); },
        OpTag::Diffusion);
}

LinearOperator build_diffusion(const StochasticMatrix& p, Completion completion) {
    return Diffusion::build(p, completion).u();
}

LinearOperator build_ref_A(const Diffusion& d) {
    return LinearOperator(
        "ref(A)", d.n() * d.n(), [d](const Amplitudes& in, Amplitudes& out) { d.reflect_a(in, out); },
        OpTag::Diffusion, true, 2);
}

LinearOperator build_ref_B(const Diffusion& d) {
    return LinearOperator(
        "ref(B)", d.n() * d.n(), [d](const Amplitudes& in, Amplitudes& out) { d.reflect_b(in, out); },
        OpTag::Diffusion, true, 2);
}

Eigen::MatrixXd dense_walk(const Diffusion& d) {
    const auto dim = static_cast<Eigen::Index>(d.n() * d.n());
    Eigen::MatrixXd w(dim, dim);
    Amplitudes e = Amplitudes::Zero(dim);
    Amplitudes mid(dim);
    Amplitudes out(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        e(k) = 1.0;
        d.reflect_a(e, mid);
        d.reflect_b(mid, out);
        w.col(k) = out.real();
        e(k) = 0.0;
    }
    return w;
}

// ---------------------------------------------------------------------------
// WalkSpectrum

WalkSpectrum::WalkSpectrum(Eigen::MatrixXcd vectors, Eigen::VectorXcd eigenvalues, double snap_tol)
    : vectors_(std::move(vectors)), eigenvalues_(std::move(eigenvalues)) {
    phases_.resize(eigenvalues_.size());
    for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
        double ph = std::arg(eigenvalues_(k));
        if (ph <= -std::numbers::pi) ph = std::numbers::pi;
        if (std::abs(ph) < snap_tol) ph = 0.0;
        phases_(k) = ph;
    }
}

std::size_t WalkSpectrum::zero_phase_count() const {
    std::size_t c = 0;
    for (Eigen::Index k = 0; k < phases_.size(); ++k) c += phases_(k) == 0.0 ? 1 : 0;
    return c;
}

double WalkSpectrum::phase_gap() const {
    double gap = std::numbers::pi;
    for (Eigen::Index k = 0; k < phases_.size(); ++k) {
        if (phases_(k) != 0.0) gap = std::min(gap, std::abs(phases_(k)));
    }
    return gap;
}

Eigen::VectorXcd WalkSpectrum::coefficients(const Amplitudes& psi) const {
    return vectors_.adjoint() * psi;
}

Amplitudes WalkSpectrum::apply_function(const std::function<Complex(double)>& g, const Amplitudes& psi) const {
    const Eigen::VectorXcd c = coefficients(psi);
    Eigen::VectorXcd gc(c.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) gc(k) = g(phases_(k)) * c(k);
    return vectors_ * gc + g(0.0) * (psi - vectors_ * c);
}

// ---------------------------------------------------------------------------
// WalkBundle

WalkBundle::WalkBundle(StochasticMatrix p, Distribution pi, Diffusion d)
    : chain_(std::move(p)),
      pi_(std::move(pi)),
      diffusion_(std::move(d)),
      u_(diffusion_.u()),
      u_adj_(diffusion_.u_adjoint()),
      v_(diffusion_.v()),
      v_adj_(diffusion_.v_adjoint()),
      ref_a_(build_ref_A(diffusion_)),
      ref_b_(build_ref_B(diffusion_)),
      walk_("W(P)", diffusion_.n() * diffusion_.n(),
            [d = diffusion_](const Amplitudes& in, Amplitudes& out) {
                Amplitudes mid;
                d.reflect_a(in, mid);
                d.reflect_b(mid, out);
            },
            OpTag::Walk),
      walk_adj_("W(P)^dagger", diffusion_.n() * diffusion_.n(),
                [d = diffusion_](const Amplitudes& in, Amplitudes& out) {
                    Amplitudes mid;
                    d.reflect_b(in, mid);
                    d.reflect_a(mid, out);
                },
                OpTag::Walk),
      pi_state_(StateVector::basis(chain_.size(), 0, 0)) {}

WalkBundlePtr WalkBundle::build(const StochasticMatrix& p, const Options& opts) {
    Distribution pi = stationary_distribution(p);
    if (!is_reversible(p, pi, opts.reversibility_tol)) throw NotReversible("detailed balance fails");

    std::shared_ptr<WalkBundle> b(new WalkBundle(p, pi, Diffusion::build(p, opts.completion)));
    b->delta_ = opts.delta ? *opts.delta : spectral_gap(p, pi, opts.reversibility_tol).spectral_gap;
    if (!(b->delta_ > 0.0 && b->delta_ <= 1.0)) throw DomainError("spectral gap must lie in (0, 1]");
    b->predicted_gap_ = 2.0 * std::acos(1.0 - b->delta_);

    const std::size_t n = p.size();
    const auto nn = static_cast<Eigen::Index>(n);
    const auto dim = nn * nn;

    // Columns a_i = U_P|i>|0> and b_j = V_P|0>|j>.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, 2 * nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        const Eigen::VectorXd a = b->diffusion_.block(static_cast<std::size_t>(i)).col(0);
        for (Eigen::Index j = 0; j < nn; ++j) {
            m(i * nn + j, i) = a(j);
            m(j * nn + i, nn + i) = a(j);
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > opts.busy_rank_tol * sv(0)) ++rank;
    b->busy_basis_ = svd.matrixU().leftCols(rank);

    // W compressed to the busy subspace, then a complex Schur form. W is
    // normal, so T is diagonal and the Schur vectors are eigenvectors.
    Eigen::MatrixXd wq(dim, rank);
    Amplitudes col(dim);
    for (Eigen::Index k = 0; k < rank; ++k) {
        col = b->busy_basis_.col(k).cast<Complex>();
        wq.col(k) = b->walk_(col).real();
    }
    const Eigen::MatrixXd wc = b->busy_basis_.transpose() * wq;
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(wc.cast<Complex>());
    Eigen::MatrixXcd vecs = b->busy_basis_.cast<Complex>() * schur.matrixU();
    Eigen::VectorXcd vals = schur.matrixT().diagonal();
    b->spectrum_ = WalkSpectrum(std::move(vecs), std::move(vals), opts.phase_snap_tol);

    Amplitudes root = Amplitudes::Zero(dim);
    for (Eigen::Index i = 0; i < nn; ++i) root(i * nn) = std::sqrt(pi[static_cast<std::size_t>(i)]);
    Amplitudes enc;
    b->diffusion_.apply_u(root, enc);
    b->pi_state_ = StateVector::normalized(n, std::move(enc));
    return b;
}

WalkBundlePtr build_walk(const StochasticMatrix& p, const WalkBundle::Options& opts) {
    return WalkBundle::build(p, opts);
}

StateVector coherent_encoding(const Distribution& pi, const Diffusion& d) {
    if (pi.size() != d.n()) throw DimensionMismatch("distribution and diffusion sizes differ");
    const auto nn = static_cast<Eigen::Index>(d.n());
    Amplitudes root = Amplitudes::Zero(nn * nn);
    for (Eigen::Index i = 0; i < nn; ++i) root(i * nn) = std::sqrt(pi[static_cast<std::size_t>(i)]);
    return apply(d.u(), StateVector::normalized(d.n(), std::move(root)));
}

MembershipResult membership_test_A(const StateVector& s, const Diffusion& d, RngStream& rng) {
    if (s.ancilla_bits() != 0 || s.n() != d.n()) throw DimensionMismatch("membership test needs a walk-space state");
    const StateVector rotated = apply(d.u_adjoint(), s);
    const auto nn = static_cast<Eigen::Index>(d.n());
    double p0 = 0.0;
    for (Eigen::Index i = 0; i < nn; ++i) p0 += std::norm(rotated.amplitudes()(i * nn));
    const bool in_a = rng.uniform() < p0;
    Amplitudes kept = rotated.amplitudes();
    for (Eigen::Index i = 0; i < nn; ++i) {
        for (Eigen::Index j = 0; j < nn; ++j) {
            if ((j == 0) != in_a) kept(i * nn + j) = 0.0;
        }
    }
    return {in_a, apply(d.u(), StateVector::normalized(d.n(), std::move(kept)))};
}

double phase_gap_measured(const WalkBundle& b) { return b.spectrum().phase_gap(); }

}  // namespace szmix
