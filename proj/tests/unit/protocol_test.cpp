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

#include <algorithm>
#include <cmath>
#include <vector>

#include "szmix/chain_gen.hpp"
#include "szmix/errors.hpp"
#include "szmix/markov.hpp"
#include "szmix/protocol.hpp"

using namespace szmix;

namespace {

Distribution empirical(const std::vector<std::size_t>& xs, std::size_t n) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t x : xs) h(static_cast<Eigen::Index>(x)) += 1.0;
    return Distribution::normalized(h);
}

ProtocolConfig config(std::size_t n, unsigned c = 5) {
    ProtocolConfig cfg;
    cfg.n = n;
    cfg.c = c;
    return cfg;
}

// Point-like distribution on n states: all but `mass` on state 0.
Distribution point_like(std::size_t n, double mass) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), mass / static_cast<double>(n - 1));
    w(0) = 1.0 - mass;
    return Distribution::normalized(w);
}

// Two-state distribution (x, 1 - x) with fidelity f to uniform.
Distribution two_state_at_fidelity(double f) {
    // sqrt(x) + sqrt(1 - x) = sqrt(2 f)
    const double s = std::sqrt(2.0 * f);
    const double r = (s + std::sqrt(2.0 - s * s)) / 2.0;
    return Distribution::validate(std::vector<double>{r * r, 1.0 - r * r}, 1e-12);
}

ChainStep step_of(const StochasticMatrix& p, std::optional<FirstStepHint> hint = std::nullopt) {
    return ChainStep{p, spectral_gap(p).spectral_gap, hint};
}

}  // namespace

TEST(FailureBound, Examples) {
    const FailureBound b1 = failure_bound(1);
    EXPECT_DOUBLE_EQ(b1.exact, 0.25);
    EXPECT_DOUBLE_EQ(b1.ideal, 0.5);
    EXPECT_DOUBLE_EQ(b1.imperfect, 1.0);
    const FailureBound b3 = failure_bound(3);
    EXPECT_NEAR(b3.exact, 1.0 - std::pow(1.0 - 1.0 / 64.0, 3), 1e-15);
    EXPECT_NEAR(b3.exact, 0.046146, 1e-6);
    EXPECT_LE(b3.exact, 0.125);
}

TEST(FailureBound, MonotoneAndBelowIdeal) {
    for (unsigned c = 1; c <= 20; ++c) {
        const FailureBound b = failure_bound(c);
        EXPECT_LE(b.exact, b.ideal) << c;
        EXPECT_LE(b.ideal, b.imperfect);
        EXPECT_DOUBLE_EQ(b.ideal, std::ldexp(1.0, -static_cast<int>(c)));
        if (c > 1) {
            EXPECT_LT(b.exact, failure_bound(c - 1).exact);
        }
    }
    EXPECT_THROW(failure_bound(0), DomainError);
}

TEST(ProtocolConfig, Validation) {
    ProtocolConfig cfg = config(4);
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.internal_confidence(), 6u);
    cfg.eta = 0.0;
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = config(4);
    cfg.kappa = 0.5;
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = config(1);
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = config(4, 0);
    EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(PrepareFromUniform, UniformTargetFirstDirectAttempt) {
    const auto b = build_walk(mixture_chain(Distribution::uniform(4), 0.5));
    RngStream rng(11, 0);
    for (int k = 0; k < 20; ++k) {
        const PrepareOutcome o = prepare_from_uniform_sub(b, 5, config(4), rng);
        ASSERT_TRUE(o.state);
        EXPECT_EQ(o.report.attempts, 1u);
        EXPECT_EQ(o.report.iterations_used, 0u);
    }
}

TEST(PrepareFromUniform, PointLikeN16MostlyUnsuccessful) {
    const Distribution pi = point_like(16, 0.03);
    ASSERT_LT(fidelity_coherent(pi, Distribution::uniform(16)), 0.25);
    ASSERT_EQ(lemma1_classify(pi).regime, Regime::ModeAccessible);
    const auto b = build_walk(mixture_chain(pi, 0.5));
    const unsigned c = 5;
    RngStream rng(12, 0);
    const int trials = 400;
    int unsuccessful = 0;
    for (int k = 0; k < trials; ++k) {
        if (!prepare_from_uniform_sub(b, c, config(16, c), rng).state) ++unsuccessful;
    }
    EXPECT_GE(static_cast<double>(unsuccessful) / trials, 1.0 - std::ldexp(1.0, -static_cast<int>(c)));
}

TEST(PrepareFromUniform, HighFidelityN4Succeeds) {
    Eigen::VectorXd w(4);
    w << 0.7, 0.15, 0.1, 0.05;
    const Distribution pi = Distribution::normalized(w);
    const double f = fidelity_coherent(pi, Distribution::uniform(4));
    ASSERT_NEAR(f, 0.8, 0.05);
    const auto b = build_walk(mixture_chain(pi, 0.5));
    const unsigned c = 5;
    RngStream rng(13, 0);
    const int trials = 400;
    int ok = 0;
    for (int k = 0; k < trials; ++k) {
        const PrepareOutcome o = prepare_from_uniform_sub(b, c, config(4, c), rng);
        if (!o.state) continue;
        ++ok;
        const Amplitudes want = coherent_encoding(pi, b->diffusion()).amplitudes();
        EXPECT_GE(std::norm(want.dot(o.state->amplitudes())), 1.0 - 1e-3);
    }
    EXPECT_GE(static_cast<double>(ok) / trials, 1.0 - std::ldexp(1.0, -static_cast<int>(c)));
}

TEST(PrepareSamples, ConstantSequenceProjectsEveryCopy) {
    RngStream gen(21, 0);
    const StochasticMatrix p = random_reversible_chain(4, gen);
    const auto prev = build_walk(p);
    const auto cur = build_walk(p);
    const ProtocolConfig cfg = config(4, 5);
    SampleCache cache{1, {0, 1, 2, 3, 0}, Method::Uniform};
    RngStream rng(22, 0);
    std::size_t rebuilds = 0;
    std::size_t accepted = 0;
    for (int k = 0; k < 40; ++k) {
        const SamplesOutcome so = prepare_samples_sub(prev, cur, cache, cfg, rng);
        ASSERT_EQ(so.samples.size(), cfg.c);
        rebuilds += so.rebuilds;
        accepted += so.samples.size();
    }
    EXPECT_GE(static_cast<double>(accepted) / static_cast<double>(rebuilds), 0.97);
}

TEST(PrepareSamples, RebuildsMatchInverseFidelity) {
    const Distribution pi1 = Distribution::uniform(2);
    const Distribution pi2 = two_state_at_fidelity(0.81);
    ASSERT_NEAR(fidelity_coherent(pi1, pi2), 0.81, 1e-12);
    const auto prev = build_walk(mixture_chain(pi1, 0.5));
    const auto cur = build_walk(mixture_chain(pi2, 0.5));
    ProtocolConfig cfg = config(2, 1);
    const SampleCache cache{1, {0}, Method::Uniform};
    RngStream rng(23, 0);
    std::size_t rebuilds = 0;
    std::size_t accepted = 0;
    std::vector<std::size_t> samples;
    for (int k = 0; k < 1000; ++k) {
        const SamplesOutcome so = prepare_samples_sub(prev, cur, cache, cfg, rng);
        rebuilds += so.rebuilds;
        accepted += so.samples.size();
        samples.insert(samples.end(), so.samples.begin(), so.samples.end());
    }
    const double mean = static_cast<double>(rebuilds) / static_cast<double>(accepted);
    EXPECT_NEAR(mean, 1.0 / 0.81, 0.1 / 0.81);
    EXPECT_LE(total_variation(empirical(samples, 2), pi2), 0.05);
}

TEST(PrepareSamples, BadCacheSwitchesToUniform) {
    // Uniform-accessible target whose cached seeds all sit on a tiny state.
    Eigen::VectorXd w = Eigen::VectorXd::Constant(16, 1.0);
    w(3) = 1e-5;
    const Distribution pi = Distribution::normalized(w);
    ASSERT_EQ(lemma1_classify(pi).regime, Regime::UniformAccessible);
    ASSERT_LT(pi[3], 1.0 / (4.0 * std::sqrt(16.0)));
    const auto b = build_walk(mixture_chain(pi, 0.5));
    const ProtocolConfig cfg = config(16, 3);
    const SampleCache cache{1, {3, 3, 3}, Method::Samples};
    RngStream rng(24, 0);
    int switched = 0;
    for (int k = 0; k < 20; ++k) {
        const SamplesOutcome so = prepare_samples_sub(b, b, cache, cfg, rng);
        EXPECT_EQ(so.samples.size(), cfg.c);
        if (so.route_switches > 0) {
            ++switched;
            EXPECT_EQ(so.route, Method::Uniform);
        }
    }
    EXPECT_GE(switched, 18);
}

TEST(PrepareSamples, BothRoutesExhaustedThrows) {
    // Point-like target: seeds off the mode, and |u> is far from |pi>.
    const Distribution pi = point_like(16, 1e-6);
    const auto b = build_walk(mixture_chain(pi, 0.5));
    const ProtocolConfig cfg = config(16, 2);
    const SampleCache cache{1, {5, 9}, Method::Samples};
    RngStream rng(25, 0);
    int failures = 0;
    int switched = 0;
    for (int k = 0; k < 20; ++k) {
        try {
            const SamplesOutcome so = prepare_samples_sub(b, b, cache, cfg, rng);
            EXPECT_EQ(so.samples.size(), cfg.c);
            if (so.route_switches > 0) ++switched;
        } catch (const StepFailure&) {
            ++failures;
        }
    }
    // Every run either switches routes or fails outright.
    EXPECT_EQ(failures + switched, 20);
}

TEST(PrepareSamples, SizeMismatchThrows) {
    const auto a = build_walk(mixture_chain(Distribution::uniform(2), 0.5));
    const auto b = build_walk(mixture_chain(Distribution::uniform(3), 0.5));
    RngStream rng(26, 0);
    EXPECT_THROW(prepare_samples_sub(a, b, SampleCache{1, {0}, Method::Uniform}, config(3, 1), rng),
                 DimensionMismatch);
}

TEST(Fallback, PointMassN16WithinSqrtCap) {
    const Distribution pi = point_like(16, 1e-6);
    const auto b = build_walk(mixture_chain(pi, 0.5));
    const ProtocolConfig cfg = config(16, 3);
    RngStream rng(31, 0);
    for (int k = 0; k < 10; ++k) {
        CostLedger ledger;
        FallbackOutcome fb;
        {
            LedgerScope scope(ledger);
            fb = fallback_full_prepare(b, cfg, rng);
        }
        ASSERT_EQ(fb.samples.size(), cfg.c);
        for (std::size_t s : fb.samples) EXPECT_EQ(s, 0u);
        // Each fresh preparation runs at most ceil(2 sqrt(16)) = 8 iterations.
        EXPECT_LE(ledger.amplification_iterations, 8 * ledger.wall_steps);
    }
}

TEST(Fallback, UniformImmediate) {
    const auto b = build_walk(mixture_chain(Distribution::uniform(8), 0.5));
    const ProtocolConfig cfg = config(8, 4);
    RngStream rng(32, 0);
    CostLedger ledger;
    FallbackOutcome fb;
    {
        LedgerScope scope(ledger);
        fb = fallback_full_prepare(b, cfg, rng);
    }
    EXPECT_EQ(fb.samples.size(), cfg.c);
    EXPECT_EQ(ledger.amplification_iterations, 0u);
}

TEST(Mixer, FirstStepUniformOutput) {
    const auto b = mixture_chain(Distribution::uniform(4), 0.5);
    std::vector<std::size_t> out;
    for (int trial = 0; trial < 10000; ++trial) {
        SequentialMixer m(config(4, 1), RngStream(41, static_cast<std::uint64_t>(trial)));
        out.push_back(m.step(step_of(b, FirstStepHint{})).output_sample);
    }
    EXPECT_LE(total_variation(empirical(out, 4), Distribution::uniform(4)), 0.03);
}

TEST(Mixer, FirstStepNeedsHint) {
    SequentialMixer m(config(4), RngStream(42, 0));
    EXPECT_THROW(m.step(step_of(mixture_chain(Distribution::uniform(4), 0.5))), PreconditionViolated);
}

TEST(Mixer, ChainSizeMustMatch) {
    SequentialMixer m(config(4), RngStream(43, 0));
    EXPECT_THROW(m.step(step_of(mixture_chain(Distribution::uniform(3), 0.5), FirstStepHint{})), DimensionMismatch);
}

TEST(Mixer, ConstantSequenceEveryStepMatchesPi) {
    SequenceSpec spec;
    spec.n = 8;
    spec.length = 10;
    spec.seed = 44;
    const std::vector<ChainStep> steps = generate_sequence(spec);
    const Distribution pi = stationary_distribution(steps.front().chain);
    std::vector<std::vector<std::size_t>> per_step(steps.size());
    std::size_t max_held = 0;
    // 400 runs at c = 5 give 2000 samples per step.
    for (int trial = 0; trial < 400; ++trial) {
        SequentialMixer m(config(8, 5), RngStream(45, static_cast<std::uint64_t>(trial)));
        VectorSequence seq(steps);
        const std::vector<StepResult> rs = m.run(seq);
        ASSERT_EQ(rs.size(), steps.size());
        for (std::size_t t = 0; t < rs.size(); ++t) {
            EXPECT_EQ(rs[t].t, t + 1);
            ASSERT_EQ(rs[t].cache.samples.size(), 5u);
            per_step[t].insert(per_step[t].end(), rs[t].cache.samples.begin(), rs[t].cache.samples.end());
        }
        max_held = std::max(max_held, m.max_bundles_held());
        EXPECT_LE(m.bundles_held(), 1u);
    }
    EXPECT_LE(max_held, 2u);
    for (std::size_t t = 0; t < per_step.size(); ++t) {
        EXPECT_LE(total_variation(empirical(per_step[t], 8), pi), 0.05) << "step " << t + 1;
    }
}

TEST(Mixer, ModeHintUsesSamplesRoute) {
    const Distribution pi = point_like(8, 0.01);
    const auto p = mixture_chain(pi, 0.5);
    const FirstStepHint hint = classify_hint(pi);
    ASSERT_EQ(hint.kind, FirstStepHint::Kind::Mode);
    SequentialMixer m(config(8, 3), RngStream(46, 0));
    const StepResult r = m.step(step_of(p, hint));
    EXPECT_EQ(r.cache.method, Method::Samples);
    EXPECT_EQ(r.cache.samples.size(), 3u);
}

TEST(Mixer, RetainCoherentPreparesExtraCopy) {
    ProtocolConfig cfg = config(4, 3);
    cfg.retain_coherent = true;
    const Distribution pi = Distribution::uniform(4);
    const auto p = mixture_chain(pi, 0.5);
    SequentialMixer m(cfg, RngStream(47, 0));
    for (int t = 0; t < 3; ++t) {
        const StepResult r = m.step(step_of(p, FirstStepHint{}));
        EXPECT_EQ(r.cache.samples.size(), 3u);
        ASSERT_TRUE(r.coherent_state_available);
        ASSERT_TRUE(r.coherent_state);
        const auto b = build_walk(p);
        EXPECT_GE(std::norm(coherent_encoding(pi, b->diffusion()).amplitudes().dot(r.coherent_state->amplitudes())),
                  1.0 - 1e-6);
    }
}

TEST(Mixer, TestModeChecksHintsAndNeighbors) {
    ProtocolConfig cfg = config(16, 2);
    cfg.test_mode = true;
    {
        SequentialMixer m(cfg, RngStream(48, 0));
        const StochasticMatrix p = mixture_chain(point_like(16, 0.01), 0.5);
        EXPECT_THROW(m.step(step_of(p, FirstStepHint{})), PreconditionViolated);
    }
    {
        SequentialMixer m(cfg, RngStream(48, 1));
        const StochasticMatrix p = mixture_chain(Distribution::uniform(16), 0.5);
        EXPECT_THROW(m.step(ChainStep{p, 0.9, FirstStepHint{}}), PreconditionViolated);
    }
    {
        SequentialMixer m(cfg, RngStream(48, 2));
        m.step(step_of(mixture_chain(Distribution::uniform(16), 0.5), FirstStepHint{}));
        EXPECT_THROW(m.step(step_of(mixture_chain(Distribution::uniform(16), 0.1))), PreconditionViolated);
    }
    {
        SequentialMixer m(cfg, RngStream(48, 3));
        m.step(step_of(mixture_chain(Distribution::uniform(16), 0.5), FirstStepHint{}));
        EXPECT_THROW(m.step(step_of(mixture_chain(point_like(16, 0.01), 0.5))), PreconditionViolated);
    }
}

TEST(PrepareSamples, DistantTargetExhaustsProjections) {
    // Neighbors far below any eta: projections keep failing.
    const auto prev = build_walk(mixture_chain(point_like(4, 1e-4), 0.5));
    Eigen::VectorXd w = Eigen::VectorXd::Constant(4, 1e-4 / 3.0);
    w(2) = 1.0 - 1e-4;
    const auto cur = build_walk(mixture_chain(Distribution::normalized(w), 0.5));
    const SampleCache cache{1, {0, 0}, Method::Samples};
    RngStream rng(27, 0);
    EXPECT_THROW(prepare_samples_sub(prev, cur, cache, config(4, 2), rng), StepFailure);
}

TEST(Mixer, FallbackDisabledNeverMarksFailed) {
    ProtocolConfig cfg = config(16, 2);
    cfg.fallback = false;
    const StochasticMatrix uniform_chain = mixture_chain(Distribution::uniform(16), 0.5);
    const StochasticMatrix spike = mixture_chain(point_like(16, 1e-6), 0.5);
    for (int trial = 0; trial < 10; ++trial) {
        SequentialMixer m(cfg, RngStream(49, static_cast<std::uint64_t>(trial)));
        EXPECT_FALSE(m.step(step_of(uniform_chain, FirstStepHint{})).failed);
        try {
            EXPECT_FALSE(m.step(step_of(spike)).failed);
        } catch (const StepFailure&) {
        }
    }
}

TEST(Mixer, LedgerChargesEveryStep) {
    SequenceSpec spec;
    spec.n = 4;
    spec.length = 5;
    spec.seed = 50;
    const std::vector<ChainStep> steps = generate_sequence(spec);
    SequentialMixer m(config(4, 3), RngStream(51, 0));
    VectorSequence seq(steps);
    for (const StepResult& r : m.run(seq)) {
        EXPECT_GT(r.ledger.diffusion_calls + r.ledger.walk_calls, 0u);
        EXPECT_GE(r.ledger.wall_steps, 3u);
    }
}

TEST(Mixer, LagOneAutocorrelationSmall) {
    SequenceSpec spec;
    spec.n = 4;
    spec.length = 10000;
    spec.seed = 52;
    SequentialMixer m(config(4, 1), RngStream(53, 0));
    GeneratedSequence seq(spec);
    std::vector<double> xs;
    while (auto s = seq.next()) xs.push_back(static_cast<double>(m.step(*s).output_sample));
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    double cov = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        var += (xs[k] - mean) * (xs[k] - mean);
        if (k > 0) cov += (xs[k] - mean) * (xs[k - 1] - mean);
    }
    const double rho = cov / var;
    EXPECT_LE(std::abs(rho), 4.0 / std::sqrt(n));
}
