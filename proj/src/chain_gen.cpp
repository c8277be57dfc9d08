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

#include "szmix/chain_gen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "szmix/errors.hpp"

namespace szmix {

namespace {

bool connected(const Eigen::MatrixXd& w) {
    const Eigen::Index n = w.rows();
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        const Eigen::Index i = stack.back();
        stack.pop_back();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i && w(i, j) > 0.0 && !seen[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = true;
                stack.push_back(j);
            }
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

Eigen::MatrixXd random_weights(std::size_t n, RngStream& rng, double density) {
    if (n < 2) throw DomainError("a chain needs at least two states");
    if (!(density > 0.0 && density <= 1.0)) throw DomainError("density must lie in (0, 1]");
    const auto nn = static_cast<Eigen::Index>(n);
    for (;;) {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(nn, nn);
        for (Eigen::Index i = 0; i < nn; ++i) {
            w(i, i) = 0.1 + 0.9 * rng.uniform();
            for (Eigen::Index j = i + 1; j < nn; ++j) {
                if (rng.uniform() < density) w(i, j) = w(j, i) = 0.1 + 0.9 * rng.uniform();
            }
        }
        if (connected(w)) return w;
    }
}

StochasticMatrix chain_from_weights(const Eigen::MatrixXd& w) {
    Eigen::MatrixXd p = w * w.colwise().sum().cwiseInverse().asDiagonal();
    for (Eigen::Index c = 0; c < p.cols(); ++c) p.col(c) /= p.col(c).sum();
    return StochasticMatrix::validate(p);
}

bool neighbors_ok(const SequenceSpec& spec, const Distribution& pi_prev, double delta_prev, const Distribution& pi,
                  double delta) {
    if (fidelity_coherent(pi_prev, pi) < spec.target_eta) return false;
    return delta >= delta_prev / spec.target_kappa && delta <= delta_prev * spec.target_kappa;
}

}  // namespace

StochasticMatrix random_reversible_chain(std::size_t n, RngStream& rng, double density) {
    return chain_from_weights(random_weights(n, rng, density));
}

Eigen::MatrixXd proposal_matrix(std::size_t n, ProposalKind kind, RngStream& rng, std::size_t chords) {
    if (n < 2) throw DomainError("a chain needs at least two states");
    const auto nn = static_cast<Eigen::Index>(n);
    if (kind == ProposalKind::Complete) {
        return Eigen::MatrixXd::Constant(nn, nn, 1.0 / static_cast<double>(n));
    }
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        const Eigen::Index j = (i + 1) % nn;
        if (i != j) adj(i, j) = adj(j, i) = 1;
    }
    const std::size_t max_chords = n * (n - 1) / 2 - (n == 2 ? 1 : n);
    chords = std::min(chords, max_chords);
    for (std::size_t added = 0; added < chords;) {
        const auto i = static_cast<Eigen::Index>(rng.uniform_int(n));
        const auto j = static_cast<Eigen::Index>(rng.uniform_int(n));
        if (i == j || adj(i, j)) continue;
        adj(i, j) = adj(j, i) = 1;
        ++added;
    }
    const double q = 1.0 / static_cast<double>(adj.rowwise().sum().maxCoeff() + 1);
    Eigen::MatrixXd out = q * adj.cast<double>();
    for (Eigen::Index i = 0; i < nn; ++i) out(i, i) = 1.0 - out.col(i).sum();
    return out;
}

StochasticMatrix metropolis_chain(const std::vector<double>& energies, double temperature,
                                  const Eigen::MatrixXd& proposal) {
    if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
    const auto n = static_cast<Eigen::Index>(energies.size());
    if (proposal.rows() != n || proposal.cols() != n) throw DimensionMismatch("proposal size differs from energies");
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double out = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i || proposal(j, i) == 0.0) continue;
            const double de = energies[static_cast<std::size_t>(j)] - energies[static_cast<std::size_t>(i)];
            p(j, i) = proposal(j, i) * std::min(1.0, std::exp(-de / temperature));
            out += p(j, i);
        }
        p(i, i) = std::max(0.0, 1.0 - out);
    }
    return StochasticMatrix::validate(p);
}

StochasticMatrix metropolis_chain(const std::vector<double>& energies, double temperature) {
    RngStream unused(0, 0);
    return metropolis_chain(energies, temperature, proposal_matrix(energies.size(), ProposalKind::Complete, unused));
}

Distribution gibbs_distribution(const std::vector<double>& energies, double temperature) {
    if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
    if (energies.empty()) throw DomainError("no energies");
    const double emin = *std::min_element(energies.begin(), energies.end());
    Eigen::VectorXd w(static_cast<Eigen::Index>(energies.size()));
    for (std::size_t i = 0; i < energies.size(); ++i) {
        w(static_cast<Eigen::Index>(i)) = std::exp(-(energies[i] - emin) / temperature);
    }
    return Distribution::normalized(w);
}

StochasticMatrix mixture_chain(const Distribution& pi, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must lie in (0, 1]");
    const auto n = static_cast<Eigen::Index>(pi.size());
    Eigen::MatrixXd p = delta * pi.probs() * Eigen::RowVectorXd::Ones(n);
    p.diagonal().array() += 1.0 - delta;
    return StochasticMatrix::validate(p, 1e-10);
}

Distribution boundary_distribution(std::size_t n, std::optional<double> fidelity) {
    if (n < 2) throw DomainError("need at least two states");
    const double nd = static_cast<double>(n);
    const double target = fidelity.value_or(1.0 / std::sqrt(nd));
    const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(std::sqrt(nd)) - 1.0));
    const double kd = static_cast<double>(k);
    if (!(target > kd / nd && target <= 1.0)) throw DomainError("fidelity out of reach for this family");

    auto fid = [&](double y) {
        const double x = (1.0 - (nd - kd) * y) / kd;
        const double f = kd * std::sqrt(x) + (nd - kd) * std::sqrt(y);
        return f * f / nd;
    };
    double lo = 0.0;
    double hi = 1.0 / nd;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (fid(mid) < target ? lo : hi) = mid;
    }
    const double y = 0.5 * (lo + hi);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), y);
    p.head(static_cast<Eigen::Index>(k)).setConstant((1.0 - (nd - kd) * y) / kd);
    return Distribution::normalized(p);
}

FirstStepHint classify_hint(const Distribution& pi) {
    const RegimeLabel label = lemma1_classify(pi);
    FirstStepHint h;
    if (label.regime == Regime::UniformAccessible) {
        h.kind = FirstStepHint::Kind::Uniform;
    } else {
        h.kind = FirstStepHint::Kind::Mode;
        h.mode_index = label.mode_index;
    }
    return h;
}

std::string family_name(Family f) {
    switch (f) {
        case Family::ConstantChain:
            return "ConstantChain";
        case Family::MetropolisAnnealing:
            return "MetropolisAnnealing";
        case Family::PerturbedWeights:
            return "PerturbedWeights";
    }
    return "ConstantChain";
}

Family parse_family(const std::string& s) {
    if (s == "ConstantChain") return Family::ConstantChain;
    if (s == "MetropolisAnnealing") return Family::MetropolisAnnealing;
    if (s == "PerturbedWeights") return Family::PerturbedWeights;
    throw ConfigParseError("unknown sequence family '" + s + "'");
}

ChainStep next_in_sequence(const SequenceSpec& spec, SequenceState& st, RngStream& rng) {
    if (spec.n < 2) throw DomainError("sequence needs n >= 2");
    if (!(spec.target_eta > 0.0 && spec.target_eta <= 1.0)) throw DomainError("target_eta must lie in (0, 1]");
    if (!(spec.target_kappa >= 1.0)) throw DomainError("target_kappa must be at least 1");

    auto finish = [&](StochasticMatrix p, Distribution pi, double delta) {
        st.chain = std::move(p);
        st.pi = std::move(pi);
        st.delta = delta;
        ++st.produced;
        ChainStep out{*st.chain, delta, std::nullopt};
        if (st.produced == 1) out.hint = classify_hint(*st.pi);
        return out;
    };

    if (st.produced == 0) {
        switch (spec.family) {
            case Family::ConstantChain:
            case Family::PerturbedWeights: {
                st.weights = random_weights(spec.n, rng, spec.density);
                StochasticMatrix p = chain_from_weights(st.weights);
                Distribution pi = stationary_distribution(p);
                const double d = spectral_gap(p, pi).spectral_gap;
                return finish(std::move(p), std::move(pi), d);
            }
            case Family::MetropolisAnnealing: {
                if (!(spec.t_start > 0.0 && spec.cooling > 0.0 && spec.cooling < 1.0)) {
                    throw DomainError("annealing needs t_start > 0 and cooling in (0, 1)");
                }
                // One ground state at 0, the rest in [scale / 2, scale].
                st.energies.resize(spec.n);
                for (double& e : st.energies) e = spec.energy_scale * (0.5 + 0.5 * rng.uniform());
                st.energies[rng.uniform_int(spec.n)] = 0.0;
                st.proposal = proposal_matrix(spec.n, spec.proposal, rng, spec.chords ? spec.chords : spec.n / 2);
                st.temperature = spec.t_start;
                StochasticMatrix p = metropolis_chain(st.energies, st.temperature, st.proposal);
                Distribution pi = stationary_distribution(p);
                const double d = spectral_gap(p, pi).spectral_gap;
                return finish(std::move(p), std::move(pi), d);
            }
        }
    }

    switch (spec.family) {
        case Family::ConstantChain:
            return finish(*st.chain, *st.pi, st.delta);
        case Family::MetropolisAnnealing: {
            // Temperature floor: exp(-energy_scale / T) = 1e-10.
            const double floor = spec.energy_scale / std::log(1e10);
            for (double step = 1.0; step >= spec.min_step_fraction; step *= 0.5) {
                const double t = std::max(floor, st.temperature * std::pow(spec.cooling, step));
                StochasticMatrix p = metropolis_chain(st.energies, t, st.proposal);
                Distribution pi = stationary_distribution(p);
                const double d = spectral_gap(p, pi).spectral_gap;
                if (neighbors_ok(spec, *st.pi, st.delta, pi, d)) {
                    st.temperature = t;
                    return finish(std::move(p), std::move(pi), d);
                }
            }
            throw StepSizeUnderflow("no cooling step keeps the eta and kappa bounds");
        }
        case Family::PerturbedWeights: {
            for (double step = 1.0; step >= spec.min_step_fraction; step *= 0.5) {
                const double sigma = spec.perturbation * step;
                Eigen::MatrixXd w = st.weights;
                for (Eigen::Index i = 0; i < w.rows(); ++i) {
                    for (Eigen::Index j = i; j < w.cols(); ++j) {
                        if (w(i, j) == 0.0) continue;
                        w(i, j) *= std::exp(sigma * rng.normal());
                        w(j, i) = w(i, j);
                    }
                }
                StochasticMatrix p = chain_from_weights(w);
                Distribution pi = stationary_distribution(p);
                const double d = spectral_gap(p, pi).spectral_gap;
                if (neighbors_ok(spec, *st.pi, st.delta, pi, d)) {
                    st.weights = std::move(w);
                    return finish(std::move(p), std::move(pi), d);
                }
            }
            throw StepSizeUnderflow("no perturbation keeps the eta and kappa bounds");
        }
    }
    throw DomainError("unknown family");
}

GeneratedSequence::GeneratedSequence(SequenceSpec spec) : spec_(spec), rng_(spec.seed, 0x5e9) {}

std::optional<ChainStep> GeneratedSequence::next() {
    if (state_.produced >= spec_.length) return std::nullopt;
    return next_in_sequence(spec_, state_, rng_);
}

std::vector<ChainStep> generate_sequence(const SequenceSpec& spec) {
    GeneratedSequence g(spec);
    std::vector<ChainStep> out;
    while (auto s = g.next()) out.push_back(std::move(*s));
    return out;
}

}  // namespace szmix
