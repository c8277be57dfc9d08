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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "szmix/chain_gen.hpp"
#include "szmix/errors.hpp"
#include "szmix/markov.hpp"

using namespace szmix;

namespace {

void expect_valid_chain(const StochasticMatrix& p) {
    EXPECT_NO_THROW(StochasticMatrix::validate(p.matrix(), 1e-12));
    const Distribution pi = stationary_distribution(p);
    EXPECT_TRUE(is_reversible(p, pi, 1e-10));
    EXPECT_GT(spectral_gap(p, pi).spectral_gap, 0.0);
}

void expect_neighbor_bounds(const std::vector<ChainStep>& steps, double eta, double kappa) {
    for (std::size_t t = 1; t < steps.size(); ++t) {
        const Distribution a = stationary_distribution(steps[t - 1].chain);
        const Distribution b = stationary_distribution(steps[t].chain);
        EXPECT_GE(fidelity_coherent(a, b), eta) << "step " << t + 1;
        const double da = spectral_gap(steps[t - 1].chain).spectral_gap;
        const double db = spectral_gap(steps[t].chain).spectral_gap;
        EXPECT_GE(db, da / kappa * (1.0 - 1e-9)) << "step " << t + 1;
        EXPECT_LE(db, da * kappa * (1.0 + 1e-9)) << "step " << t + 1;
    }
}

}  // namespace

TEST(RandomChain, TwoStatesReversible) {
    RngStream rng(1, 0);
    for (int k = 0; k < 50; ++k) {
        const StochasticMatrix p = random_reversible_chain(2, rng);
        const double a = p(1, 0);
        const double b = p(0, 1);
        EXPECT_GT(a, 0.0);
        EXPECT_LT(a, 1.0);
        EXPECT_GT(b, 0.0);
        EXPECT_LT(b, 1.0);
        EXPECT_NEAR(p(0, 0), 1.0 - a, 1e-15);
        EXPECT_TRUE(is_reversible(p, stationary_distribution(p)));
    }
}

TEST(RandomChain, EightStatesReversible) {
    RngStream rng(2, 0);
    for (int k = 0; k < 50; ++k) expect_valid_chain(random_reversible_chain(8, rng));
}

TEST(RandomChain, SparseRequestStillConnected) {
    RngStream rng(3, 0);
    for (int k = 0; k < 50; ++k) {
        const StochasticMatrix p = random_reversible_chain(10, rng, 0.1);
        // Connected with self-loops means a unique fixed point.
        EXPECT_NO_THROW(stationary_distribution(p));
        expect_valid_chain(p);
    }
    EXPECT_THROW(random_reversible_chain(1, rng), DomainError);
    EXPECT_THROW(random_reversible_chain(4, rng, 0.0), DomainError);
}

TEST(Proposal, SymmetricStochastic) {
    RngStream rng(4, 0);
    for (ProposalKind kind : {ProposalKind::Complete, ProposalKind::RingChords}) {
        const Eigen::MatrixXd q = proposal_matrix(9, kind, rng, 4);
        EXPECT_LE((q - q.transpose()).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_NO_THROW(StochasticMatrix::validate(q, 1e-12));
        EXPECT_GE(q.minCoeff(), 0.0);
    }
}

TEST(Metropolis, StationaryIsGibbs) {
    RngStream rng(5, 0);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> e(7);
        for (double& x : e) x = 3.0 * rng.uniform();
        const double temp = 0.3 + rng.uniform();
        const Eigen::MatrixXd q = proposal_matrix(7, ProposalKind::RingChords, rng, 3);
        const StochasticMatrix p = metropolis_chain(e, temp, q);
        expect_valid_chain(p);
        EXPECT_LE(total_variation(stationary_distribution(p), gibbs_distribution(e, temp)), 1e-8);
    }
}

TEST(Metropolis, HighTemperatureNearUniform) {
    const std::vector<double> e{0.0, 0.4, 1.0, 0.7, 0.2};
    const StochasticMatrix p = metropolis_chain(e, 1e6);
    EXPECT_LE(total_variation(stationary_distribution(p), Distribution::uniform(5)), 1e-3);
}

TEST(Metropolis, EqualEnergiesUniform) {
    const StochasticMatrix p = metropolis_chain(std::vector<double>(6, 1.5), 0.7);
    EXPECT_LE(total_variation(stationary_distribution(p), Distribution::uniform(6)), 1e-12);
}

TEST(Metropolis, TwoLevelRatio) {
    const double e = 1.3;
    const StochasticMatrix p = metropolis_chain({0.0, e}, e / std::log(2.0));
    const Distribution pi = stationary_distribution(p);
    EXPECT_NEAR(pi[0], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(pi[1], 1.0 / 3.0, 1e-12);
}

TEST(Metropolis, Errors) {
    EXPECT_THROW(metropolis_chain({0.0, 1.0}, 0.0), DomainError);
    EXPECT_THROW(metropolis_chain({0.0, 1.0}, -1.0), DomainError);
    EXPECT_THROW(metropolis_chain({0.0, 1.0}, 1.0, Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0)), DimensionMismatch);
}

TEST(Mixture, StationaryAndGap) {
    Eigen::VectorXd w(4);
    w << 0.1, 0.2, 0.3, 0.4;
    const Distribution pi = Distribution::normalized(w);
    for (double d : {0.01, 0.3, 1.0}) {
        const StochasticMatrix p = mixture_chain(pi, d);
        EXPECT_LE(total_variation(stationary_distribution(p), pi), 1e-12);
        EXPECT_NEAR(spectral_gap(p).spectral_gap, d, 1e-10);
    }
    EXPECT_THROW(mixture_chain(pi, 0.0), DomainError);
    EXPECT_THROW(mixture_chain(pi, 1.5), DomainError);
}

TEST(Boundary, FidelityOnTarget) {
    for (std::size_t n : {4u, 8u, 16u, 32u, 64u}) {
        const Distribution pi = boundary_distribution(n);
        const double f = fidelity_coherent(pi, Distribution::uniform(n));
        EXPECT_NEAR(f, 1.0 / std::sqrt(static_cast<double>(n)), 1e-10) << n;
        EXPECT_EQ(lemma1_classify(pi, 1e-9).regime, Regime::UniformAccessible);
    }
    const Distribution pi = boundary_distribution(16, 0.5);
    EXPECT_NEAR(fidelity_coherent(pi, Distribution::uniform(16)), 0.5, 1e-10);
    EXPECT_THROW(boundary_distribution(16, 1.5), DomainError);
}

TEST(Hint, MatchesRegime) {
    EXPECT_EQ(classify_hint(Distribution::uniform(8)).kind, FirstStepHint::Kind::Uniform);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(8, 0.001);
    w(5) = 1.0;
    const FirstStepHint h = classify_hint(Distribution::normalized(w));
    EXPECT_EQ(h.kind, FirstStepHint::Kind::Mode);
    EXPECT_EQ(h.mode_index, 5u);
}

TEST(Family, Names) {
    for (Family f : {Family::ConstantChain, Family::MetropolisAnnealing, Family::PerturbedWeights}) {
        EXPECT_EQ(parse_family(family_name(f)), f);
    }
    EXPECT_THROW(parse_family("Annealing"), ConfigParseError);
}

TEST(Sequence, ConstantRepeatsChain) {
    SequenceSpec spec;
    spec.n = 5;
    spec.length = 6;
    spec.seed = 10;
    const std::vector<ChainStep> steps = generate_sequence(spec);
    ASSERT_EQ(steps.size(), 6u);
    ASSERT_TRUE(steps.front().hint);
    for (const ChainStep& s : steps) {
        EXPECT_EQ(s.chain.matrix(), steps.front().chain.matrix());
        EXPECT_DOUBLE_EQ(s.delta, steps.front().delta);
    }
    for (std::size_t t = 1; t < steps.size(); ++t) EXPECT_FALSE(steps[t].hint);
    expect_neighbor_bounds(steps, 1.0 - 1e-12, 1.0);
}

TEST(Sequence, AnnealingSlowCoolingKeepsFidelity) {
    SequenceSpec spec;
    spec.family = Family::MetropolisAnnealing;
    spec.n = 8;
    spec.length = 50;
    spec.cooling = 0.97;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        spec.seed = seed;
        const std::vector<ChainStep> steps = generate_sequence(spec);
        ASSERT_EQ(steps.size(), 50u);
        for (const ChainStep& s : steps) expect_valid_chain(s.chain);
        expect_neighbor_bounds(steps, 0.9, spec.target_kappa);
    }
}

TEST(Sequence, AnnealingSweepsBothRegimes) {
    SequenceSpec spec;
    spec.family = Family::MetropolisAnnealing;
    spec.n = 8;
    spec.length = 20;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        spec.seed = seed;
        const std::vector<ChainStep> steps = generate_sequence(spec);
        EXPECT_EQ(steps.front().hint->kind, FirstStepHint::Kind::Uniform) << seed;
        EXPECT_EQ(lemma1_classify(stationary_distribution(steps.back().chain)).regime, Regime::ModeAccessible)
            << seed;
    }
}

TEST(Sequence, PerturbedKeepsKappa) {
    SequenceSpec spec;
    spec.family = Family::PerturbedWeights;
    spec.n = 6;
    spec.length = 100;
    spec.perturbation = 0.05;
    spec.target_kappa = 2.0;
    spec.seed = 14;
    const std::vector<ChainStep> steps = generate_sequence(spec);
    ASSERT_EQ(steps.size(), 100u);
    for (const ChainStep& s : steps) {
        EXPECT_NEAR(s.delta, spectral_gap(s.chain).spectral_gap, 1e-12);
    }
    expect_neighbor_bounds(steps, spec.target_eta, 2.0);
}

TEST(Sequence, DeterministicGivenSeed) {
    SequenceSpec spec;
    spec.family = Family::PerturbedWeights;
    spec.n = 5;
    spec.length = 8;
    spec.seed = 15;
    const auto a = generate_sequence(spec);
    const auto b = generate_sequence(spec);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(a[t].chain.matrix(), b[t].chain.matrix());
}

TEST(Sequence, UnsatisfiableBoundsUnderflow) {
    SequenceSpec spec;
    spec.family = Family::PerturbedWeights;
    spec.n = 5;
    spec.length = 5;
    spec.seed = 16;
    spec.target_kappa = 1.0;
    spec.min_step_fraction = 0.1;
    EXPECT_THROW(generate_sequence(spec), StepSizeUnderflow);
}

TEST(Sequence, AnnealingParameterErrors) {
    SequenceSpec spec;
    spec.family = Family::MetropolisAnnealing;
    spec.cooling = 1.0;
    EXPECT_THROW(generate_sequence(spec), DomainError);
    spec.cooling = 0.9;
    spec.t_start = 0.0;
    EXPECT_THROW(generate_sequence(spec), DomainError);
}
