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

#include "szmix/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "szmix/errors.hpp"

namespace szmix {

namespace {

std::size_t expected_dim(std::size_t n, unsigned ancilla_bits) {
    if (ancilla_bits > 40) throw DomainError("too many ancilla bits");
    return n * n * (std::size_t{1} << ancilla_bits);
}

void charge(const LinearOperator& op, std::uint64_t times) {
    switch (op.tag()) {
        case OpTag::Walk:
            charge_walk_calls(op.cost() * times);
            break;
        case OpTag::Diffusion:
            charge_diffusion_calls(op.cost() * times);
            break;
        case OpTag::Untagged:
            break;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(std::size_t n, Amplitudes amplitudes, unsigned ancilla_bits)
    : n_(n), ancilla_bits_(ancilla_bits), amps_(std::move(amplitudes)) {
    if (n == 0) throw DimensionMismatch("register size must be positive");
    const std::size_t want = expected_dim(n, ancilla_bits);
    if (static_cast<std::size_t>(amps_.size()) != want) {
        throw DimensionMismatch("expected " + std::to_string(want) + " amplitudes, got " +
                                std::to_string(amps_.size()));
    }
    const double sq = amps_.squaredNorm();
    if (std::abs(sq - 1.0) > kNormTolerance) {
        throw DomainError("state has squared norm " + std::to_string(sq));
    }
}

StateVector StateVector::normalized(std::size_t n, Amplitudes amplitudes, unsigned ancilla_bits) {
    const double nrm = amplitudes.norm();
    if (!(nrm > 0.0)) throw DomainError("cannot normalize the zero vector");
    amplitudes /= nrm;
    return StateVector(n, std::move(amplitudes), ancilla_bits);
}

StateVector StateVector::basis(std::size_t n, std::size_t i, std::size_t j, unsigned ancilla_bits,
                               std::uint64_t ancilla) {
    if (i >= n || j >= n) throw DimensionMismatch("basis index out of range");
    if (ancilla >> ancilla_bits != 0) throw DimensionMismatch("ancilla pattern out of range");
    Amplitudes a = Amplitudes::Zero(static_cast<Eigen::Index>(expected_dim(n, ancilla_bits)));
    a(static_cast<Eigen::Index>(ancilla * n * n + i * n + j)) = 1.0;
    return StateVector(n, std::move(a), ancilla_bits);
}

StateVector StateVector::with_ancillas(unsigned bits) const {
    const unsigned total = ancilla_bits_ + bits;
    Amplitudes a = Amplitudes::Zero(static_cast<Eigen::Index>(expected_dim(n_, total)));
    a.head(amps_.size()) = amps_;
    return StateVector(n_, std::move(a), total);
}

Amplitudes StateVector::ancilla_zero_component() const {
    return amps_.head(static_cast<Eigen::Index>(walk_dim()));
}

Eigen::VectorXd StateVector::register_probabilities(Register which) const {
    const std::size_t wd = walk_dim();
    const std::size_t sectors = std::size_t{1} << ancilla_bits_;
    Eigen::VectorXd p;
    switch (which) {
        case Register::I:
        case Register::II:
            p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
            break;
        case Register::Ancilla:
            p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sectors));
            break;
    }
    for (std::size_t a = 0; a < sectors; ++a) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                const double w = std::norm(amps_(static_cast<Eigen::Index>(a * wd + i * n_ + j)));
                const std::size_t k = which == Register::I ? i : which == Register::II ? j : a;
                p(static_cast<Eigen::Index>(k)) += w;
            }
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// LinearOperator

LinearOperator::LinearOperator(std::string name, std::size_t dim, Rule rule, OpTag tag, bool unitary,
                               std::uint64_t cost)
    : name_(std::move(name)), dim_(dim), rule_(std::move(rule)), tag_(tag), unitary_(unitary), cost_(cost) {}

LinearOperator LinearOperator::dense(std::string name, Eigen::MatrixXcd m, OpTag tag, bool unitary) {
    if (m.rows() != m.cols()) throw DimensionMismatch("operator matrix must be square");
    const auto dim = static_cast<std::size_t>(m.rows());
    auto shared = std::make_shared<const Eigen::MatrixXcd>(std::move(m));
    return LinearOperator(
        std::move(name), dim, [shared](const Amplitudes& in, Amplitudes& out) { out.noalias() = *shared * in; },
        tag, unitary);
}

LinearOperator LinearOperator::identity(std::size_t dim) {
    return LinearOperator("identity", dim, [](const Amplitudes& in, Amplitudes& out) { out = in; });
}

Amplitudes LinearOperator::operator()(const Amplitudes& in) const {
    if (static_cast<std::size_t>(in.size()) != dim_) {
        throw DimensionMismatch(name_ + " expects dimension " + std::to_string(dim_) + ", got " +
                                std::to_string(in.size()));
    }
    Amplitudes out(in.size());
    rule_(in, out);
    return out;
}

Eigen::MatrixXcd LinearOperator::to_dense() const {
    const auto d = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXcd m(d, d);
    Amplitudes e = Amplitudes::Zero(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        e(k) = 1.0;
        m.col(k) = (*this)(e);
        e(k) = 0.0;
    }
    return m;
}

LinearOperator LinearOperator::after(const LinearOperator& first) const {
    if (first.dim_ != dim_) throw DimensionMismatch("cannot compose operators of different dimension");
    auto outer = rule_;
    auto inner = first.rule_;
    return LinearOperator(
        name_ + "*" + first.name_, dim_,
        [outer, inner](const Amplitudes& in, Amplitudes& out) {
            Amplitudes mid(in.size());
            inner(in, mid);
            outer(mid, out);
        },
        tag_, unitary_ && first.unitary_, cost_);
}

// ---------------------------------------------------------------------------
// Free functions

StateVector apply(const LinearOperator& op, const StateVector& s) {
    if (op.dimension() == s.dim()) {
        charge(op, 1);
        return StateVector::normalized(s.n(), op(s.amplitudes()), s.ancilla_bits());
    }
    if (op.dimension() != s.walk_dim()) {
        throw DimensionMismatch(op.name() + " has dimension " + std::to_string(op.dimension()) +
                                ", state has " + std::to_string(s.dim()));
    }
    charge(op, 1);
    const auto wd = static_cast<Eigen::Index>(s.walk_dim());
    Amplitudes out(s.amplitudes().size());
    const std::size_t sectors = std::size_t{1} << s.ancilla_bits();
    for (std::size_t a = 0; a < sectors; ++a) {
        const auto off = static_cast<Eigen::Index>(a) * wd;
        out.segment(off, wd) = op(s.amplitudes().segment(off, wd));
    }
    return StateVector::normalized(s.n(), std::move(out), s.ancilla_bits());
}

StateVector apply_controlled(const LinearOperator& op, std::uint64_t power, const StateVector& s,
                             unsigned bit) {
    if (op.dimension() != s.walk_dim()) throw DimensionMismatch("controlled operator must act on walk space");
    if (bit >= s.ancilla_bits()) throw DimensionMismatch("control bit out of range");
    charge(op, power);
    const auto wd = static_cast<Eigen::Index>(s.walk_dim());
    Amplitudes out = s.amplitudes();
    const std::size_t sectors = std::size_t{1} << s.ancilla_bits();
    for (std::size_t a = 0; a < sectors; ++a) {
        if (((a >> bit) & 1U) == 0) continue;
        const auto off = static_cast<Eigen::Index>(a) * wd;
        Amplitudes v = out.segment(off, wd);
        for (std::uint64_t p = 0; p < power; ++p) v = op(v);
        out.segment(off, wd) = v;
    }
    return StateVector::normalized(s.n(), std::move(out), s.ancilla_bits());
}

StateVector apply_hadamard(const StateVector& s, unsigned bit) {
    if (bit >= s.ancilla_bits()) throw DimensionMismatch("ancilla bit out of range");
    const auto wd = static_cast<Eigen::Index>(s.walk_dim());
    const double h = 1.0 / std::sqrt(2.0);
    Amplitudes out = s.amplitudes();
    const std::size_t sectors = std::size_t{1} << s.ancilla_bits();
    for (std::size_t a = 0; a < sectors; ++a) {
        if (((a >> bit) & 1U) != 0) continue;
        const std::size_t b = a | (std::size_t{1} << bit);
        const auto lo = static_cast<Eigen::Index>(a) * wd;
        const auto hi = static_cast<Eigen::Index>(b) * wd;
        Amplitudes x = s.amplitudes().segment(lo, wd);
        Amplitudes y = s.amplitudes().segment(hi, wd);
        out.segment(lo, wd) = h * (x + y);
        out.segment(hi, wd) = h * (x - y);
    }
    return StateVector(s.n(), std::move(out), s.ancilla_bits());
}

MeasurementResult measure_register(const StateVector& s, Register which, RngStream& rng) {
    const Eigen::VectorXd p = s.register_probabilities(which);
    const std::size_t k = rng.categorical(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
    const std::size_t n = s.n();
    const std::size_t wd = s.walk_dim();
    Amplitudes out = s.amplitudes();
    for (Eigen::Index idx = 0; idx < out.size(); ++idx) {
        const auto u = static_cast<std::size_t>(idx);
        const std::size_t a = u / wd;
        const std::size_t i = (u % wd) / n;
        const std::size_t j = u % n;
        const std::size_t v = which == Register::I ? i : which == Register::II ? j : a;
        if (v != k) out(idx) = 0.0;
    }
    return {k, StateVector::normalized(n, std::move(out), s.ancilla_bits())};
}

Complex overlap(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim() || a.n() != b.n()) throw DimensionMismatch("states live in different spaces");
    return a.amplitudes().dot(b.amplitudes());
}

double trace_distance_pure(const StateVector& a, const StateVector& b) {
    const double f = std::norm(overlap(a, b));
    return std::sqrt(std::max(0.0, 1.0 - f));
}

}  // namespace szmix
