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

#include "szmix/protocol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "szmix/errors.hpp"
#include "szmix/phase.hpp"

namespace szmix {

namespace {

std::uint64_t quarter_cap(std::size_t n) {
    return static_cast<std::uint64_t>(std::ceil(2.0 * std::pow(static_cast<double>(n), 0.25) - 1e-12));
}

std::uint64_t sqrt_cap(std::size_t n) {
    return static_cast<std::uint64_t>(std::ceil(2.0 * std::sqrt(static_cast<double>(n)) - 1e-12));
}

std::size_t sample_from(const StateVector& s, RngStream& rng) {
    return measure_register(s, Register::I, rng).outcome;
}

std::size_t copies_needed(const ProtocolConfig& cfg) { return cfg.c + (cfg.retain_coherent ? 1 : 0); }

// Moves a state of the previous walk space to the current one: U_{t-1}^dagger,
// a check that register II holds 0, then U_t.
std::optional<StateVector> transfer(const StateVector& s, const WalkBundle& from, const WalkBundle& to,
                                    RngStream& rng) {
    const StateVector rotated = apply(from.u_adjoint(), s);
    const std::size_t n = s.n();
    double p0 = 0.0;
    Amplitudes kept = Amplitudes::Zero(rotated.amplitudes().size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<Eigen::Index>(i * n);
        kept(idx) = rotated.amplitudes()(idx);
        p0 += std::norm(kept(idx));
    }
    if (!(rng.uniform() < p0)) return std::nullopt;
    return apply(to.u(), StateVector::normalized(n, std::move(kept)));
}

}  // namespace

void ProtocolConfig::validate() const {
    if (c < 1 || c > 60) throw DomainError("c must lie in [1, 60]");
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta must lie in (0, 1]");
    if (!(kappa >= 1.0)) throw DomainError("kappa must be at least 1");
    if (n < 2) throw DomainError("state count must be at least 2");
}

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::Uniform:
            return "uniform";
        case Method::Samples:
            return "samples";
        case Method::Fallback:
            return "fallback";
    }
    return "uniform";
}

std::optional<ChainStep> VectorSequence::next() {
    if (pos_ >= steps_.size()) return std::nullopt;
    return steps_[pos_++];
}

FailureBound failure_bound(unsigned c) {
    if (c < 1 || c > 1000) throw DomainError("c must lie in [1, 1000]");
    const double q = std::ldexp(1.0, -2 * static_cast<int>(c));
    FailureBound fb;
    fb.ideal = std::ldexp(1.0, -static_cast<int>(c));
    fb.imperfect = std::ldexp(1.0, 1 - static_cast<int>(c));
    fb.exact = -std::expm1(static_cast<double>(c) * std::log1p(-q));
    return fb;
}

// ---------------------------------------------------------------------------
// Subroutines

PrepareOutcome prepare_from_uniform_sub(const WalkBundlePtr& b, unsigned c, const ProtocolConfig& cfg,
                                        RngStream& rng) {
    (void)cfg;
    AmplifyOptions opts;
    opts.max_iterations = quarter_cap(b->n());
    AmplificationReport rep = try_prepare_from_uniform(b, c, rng, opts);
    PrepareOutcome out;
    if (rep.succeeded) out.state = rep.output_state;
    out.report = std::move(rep);
    return out;
}

SamplesOutcome prepare_samples_sub(const WalkBundlePtr& prev, const WalkBundlePtr& cur, const SampleCache& cache_prev,
                                   const ProtocolConfig& cfg, RngStream& rng) {
    if (prev->n() != cur->n()) throw DimensionMismatch("consecutive chains differ in size");
    const unsigned ci = cfg.internal_confidence();
    const std::size_t n = cur->n();
    const std::size_t needed = copies_needed(cfg);
    const ErrorBudget budget = error_budget(ci, cfg.eta, prev->delta());
    const PhaseDetectionConfig projection =
        measurement_config(cur->predicted_phase_gap(), std::min(budget.eps_meas, budget.eps_samp));

    std::vector<std::size_t> seeds;
    for (std::size_t s : cache_prev.samples) {
        if (std::find(seeds.begin(), seeds.end(), s) == seeds.end()) seeds.push_back(s);
    }
    std::size_t preferred = 0;

    AmplifyOptions rebuild;
    rebuild.max_iterations = quarter_cap(n);
    rebuild.measurement = budget.measurement;

    auto rebuild_uniform = [&]() -> std::optional<StateVector> {
        AmplificationReport rep = try_prepare_from_uniform(prev, ci, rng, rebuild);
        if (!rep.succeeded) return std::nullopt;
        return rep.output_state;
    };
    auto rebuild_samples = [&]() -> std::optional<StateVector> {
        AmplifyOptions o = rebuild;
        o.direct_attempts = 1;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            const std::size_t idx = (preferred + k) % seeds.size();
            if (!(prev->stationary()[seeds[idx]] > 0.0)) continue;
            AmplificationReport rep = try_unsearch_from_basis(prev, seeds[idx], ci, rng, o);
            if (rep.succeeded) {
                preferred = idx;
                return rep.output_state;
            }
        }
        return std::nullopt;
    };

    const std::array<Method, 2> routes = cache_prev.method == Method::Uniform
                                             ? std::array<Method, 2>{Method::Uniform, Method::Samples}
                                             : std::array<Method, 2>{Method::Samples, Method::Uniform};
    std::size_t route = 0;
    const auto max_projections = static_cast<std::size_t>(
        std::ceil(8.0 * static_cast<double>(needed + ci) / cfg.eta));
    std::size_t projections = 0;

    SamplesOutcome out;
    while (out.samples.size() + (out.coherent_state ? 1 : 0) < needed) {
        std::optional<StateVector> prev_state =
            routes[route] == Method::Uniform ? rebuild_uniform() : rebuild_samples();
        if (!prev_state) {
            if (++route == routes.size()) throw StepFailure("both preparation routes failed");
            ++out.route_switches;
            continue;
        }
        ++out.rebuilds;
        if (++projections > max_projections) {
            throw StepFailure("projection onto the new stationary state keeps failing");
        }
        std::optional<StateVector> moved = transfer(*prev_state, *prev, *cur, rng);
        if (!moved) continue;
        ProjectionResult pr = pi_projective_measurement(*cur, *moved, projection, rng);
        if (!pr.success) continue;
        if (out.samples.size() < cfg.c) {
            out.samples.push_back(sample_from(pr.state, rng));
        } else {
            out.coherent_state = std::move(pr.state);
        }
    }
    out.route = routes[route];
    return out;
}

FallbackOutcome fallback_full_prepare(const WalkBundlePtr& b, const ProtocolConfig& cfg, RngStream& rng) {
    const unsigned ci = cfg.internal_confidence();
    AmplifyOptions opts;
    opts.max_iterations = sqrt_cap(b->n());
    opts.sweeps = 1;
    FallbackOutcome out;
    const std::size_t needed = copies_needed(cfg);
    constexpr int kMaxRounds = 100000;
    for (int round = 0; round < kMaxRounds && out.samples.size() + (out.coherent_state ? 1 : 0) < needed; ++round) {
        AmplificationReport rep = try_prepare_from_uniform(b, ci, rng, opts);
        if (!rep.succeeded) continue;
        if (out.samples.size() < cfg.c) {
            out.samples.push_back(sample_from(*rep.output_state, rng));
        } else {
            out.coherent_state = std::move(rep.output_state);
        }
    }
    if (out.samples.size() + (out.coherent_state ? 1 : 0) < needed) throw StepFailure("forced preparation failed");
    return out;
}

// ---------------------------------------------------------------------------
// SequentialMixer

SequentialMixer::SequentialMixer(ProtocolConfig cfg, RngStream rng) : cfg_(cfg), rng_(std::move(rng)) {
    cfg_.validate();
}

std::vector<StepResult> SequentialMixer::run(ChainSequence& seq) {
    std::vector<StepResult> out;
    while (auto s = seq.next()) out.push_back(step(*s));
    return out;
}

StepResult SequentialMixer::step(const ChainStep& s) {
    if (s.chain.size() != cfg_.n) throw DimensionMismatch("chain size differs from the configured n");
    WalkBundle::Options opts;
    opts.delta = s.delta;
    WalkBundlePtr b = build_walk(s.chain, opts);

    if (cfg_.test_mode) {
        const double gap = spectral_gap(s.chain, b->stationary()).spectral_gap;
        if (s.delta > gap * (1.0 + 1e-9)) throw PreconditionViolated("delta exceeds the true spectral gap");
        if (t_ > 0) {
            const double eps = 1e-9;
            if (gap < prev_delta_ / cfg_.kappa * (1.0 - eps) || gap > prev_delta_ * cfg_.kappa * (1.0 + eps)) {
                throw PreconditionViolated("neighbor gaps violate the kappa bound");
            }
            const double f = fidelity_coherent(cur_->stationary(), b->stationary());
            if (f < cfg_.eta - 1e-12) throw PreconditionViolated("neighbor fidelity below eta");
        }
        prev_delta_ = gap;
    }

    prev_ = std::move(cur_);
    cur_ = b;
    max_held_ = std::max(max_held_, bundles_held());

    StepResult r = t_ == 0 ? first_step(s, b) : later_step(b);
    ++t_;
    r.t = t_;
    r.delta = s.delta;
    r.n = cfg_.n;
    r.cache.step = t_;
    r.output_sample = r.cache.samples.front();
    r.coherent_state_available = r.coherent_state.has_value();
    cache_ = r.cache;
    prev_.reset();
    return r;
}

StepResult SequentialMixer::first_step(const ChainStep& s, const WalkBundlePtr& b) {
    if (!s.hint) throw PreconditionViolated("the first chain needs a preparation hint");
    const FirstStepHint hint = *s.hint;
    const std::size_t n = cfg_.n;
    if (cfg_.test_mode) {
        const double floor = 1.0 / std::sqrt(static_cast<double>(n));
        if (hint.kind == FirstStepHint::Kind::Uniform &&
            fidelity_coherent(b->stationary(), Distribution::uniform(n)) < floor - 1e-12) {
            throw PreconditionViolated("uniform hint but fidelity to uniform below 1/sqrt(n)");
        }
        if (hint.kind == FirstStepHint::Kind::Mode && b->stationary()[hint.mode_index] < floor - 1e-12) {
            throw PreconditionViolated("mode hint with probability below 1/sqrt(n)");
        }
    }
    if (hint.kind == FirstStepHint::Kind::Mode && hint.mode_index >= n) throw DomainError("mode index out of range");

    StepResult r;
    LedgerScope scope(r.ledger);
    const unsigned ci = cfg_.internal_confidence();
    const std::size_t needed = copies_needed(cfg_);
    AmplifyOptions opts;
    opts.max_iterations = quarter_cap(n);

    bool ok = true;
    std::vector<std::size_t> samples;
    std::optional<StateVector> coherent;
    while (ok && samples.size() + (coherent ? 1 : 0) < needed) {
        AmplificationReport rep = hint.kind == FirstStepHint::Kind::Uniform
                                      ? try_prepare_from_uniform(b, ci, rng_, opts)
                                      : try_unsearch_from_basis(b, hint.mode_index, ci, rng_, opts);
        if (!rep.succeeded) {
            ok = false;
            break;
        }
        if (samples.size() < cfg_.c) {
            samples.push_back(sample_from(*rep.output_state, rng_));
        } else {
            coherent = std::move(rep.output_state);
        }
    }

    if (ok) {
        r.cache.samples = std::move(samples);
        r.cache.method = hint.kind == FirstStepHint::Kind::Uniform ? Method::Uniform : Method::Samples;
        r.coherent_state = std::move(coherent);
        return r;
    }
    if (!cfg_.fallback) throw StepFailure("first-step preparation failed");
    FallbackOutcome fb = fallback_full_prepare(b, cfg_, rng_);
    r.cache.samples = std::move(fb.samples);
    r.cache.method = Method::Fallback;
    r.coherent_state = std::move(fb.coherent_state);
    r.failed = true;
    return r;
}

StepResult SequentialMixer::later_step(const WalkBundlePtr& b) {
    StepResult r;
    LedgerScope scope(r.ledger);
    const unsigned ci = cfg_.internal_confidence();
    const std::size_t needed = copies_needed(cfg_);

    std::vector<std::size_t> samples;
    std::optional<StateVector> coherent;
    bool all_ok = true;
    for (std::size_t k = 0; k < needed; ++k) {
        PrepareOutcome po = prepare_from_uniform_sub(b, 2 * ci, cfg_, rng_);
        if (!po.state) {
            all_ok = false;
            break;
        }
        if (samples.size() < cfg_.c) {
            samples.push_back(sample_from(*po.state, rng_));
        } else {
            coherent = std::move(po.state);
        }
    }
    if (all_ok) {
        r.cache.samples = std::move(samples);
        r.cache.method = Method::Uniform;
        r.coherent_state = std::move(coherent);
        return r;
    }

    try {
        SamplesOutcome so = prepare_samples_sub(prev_, b, cache_, cfg_, rng_);
        r.cache.samples = std::move(so.samples);
        r.cache.method = Method::Samples;
        r.coherent_state = std::move(so.coherent_state);
        return r;
    } catch (const StepFailure&) {
        if (!cfg_.fallback) throw;
    }
    FallbackOutcome fb = fallback_full_prepare(b, cfg_, rng_);
    r.cache.samples = std::move(fb.samples);
    r.cache.method = Method::Fallback;
    r.coherent_state = std::move(fb.coherent_state);
    r.failed = true;
    return r;
}

}  // namespace szmix
