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

// The sequential mixing protocol: one |pi(t)> preparation and c classical
// samples per chain of a slowly evolving sequence.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "szmix/amplify.hpp"
#include "szmix/cost_ledger.hpp"
#include "szmix/markov.hpp"
#include "szmix/rng.hpp"
#include "szmix/statevector.hpp"
#include "szmix/szegedy.hpp"

namespace szmix {

struct ProtocolConfig {
    unsigned c = 5;       ///< confidence; also the cache size
    double eta = 0.9;     ///< lower bound on neighbor fidelity
    double kappa = 2.0;   ///< neighbor gap ratio bound
    std::size_t n = 0;    ///< state count
    bool fallback = true;          ///< run the forced preparation after a StepFailure
    bool retain_coherent = false;  ///< prepare one extra copy and keep it
    bool test_mode = false;        ///< recompute gaps and hints classically and assert them

    /// Throws DomainError.
    void validate() const;
    /// c + 1, used for every precision and retry budget.
    unsigned internal_confidence() const noexcept { return c + 1; }
};

enum class Method { Uniform, Samples, Fallback };

std::string_view method_name(Method m) noexcept;

struct SampleCache {
    std::size_t step = 0;
    std::vector<std::size_t> samples;
    Method method = Method::Uniform;
};

/// How the first chain's stationary state can be prepared cheaply.
struct FirstStepHint {
    enum class Kind { Uniform, Mode };
    Kind kind = Kind::Uniform;
    std::size_t mode_index = 0;
};

struct ChainStep {
    StochasticMatrix chain;
    double delta;  ///< spectral gap or a lower bound on it
    std::optional<FirstStepHint> hint;
};

class ChainSequence {
public:
    virtual ~ChainSequence() = default;
    virtual std::optional<ChainStep> next() = 0;
};

/// A finite sequence held in memory.
class VectorSequence : public ChainSequence {
public:
    explicit VectorSequence(std::vector<ChainStep> steps) : steps_(std::move(steps)) {}
    std::optional<ChainStep> next() override;

private:
    std::vector<ChainStep> steps_;
    std::size_t pos_ = 0;
};

struct StepResult {
    std::size_t t = 0;
    std::size_t output_sample = 0;
    bool coherent_state_available = false;
    std::optional<StateVector> coherent_state;
    SampleCache cache;
    CostLedger ledger;
    bool failed = false;
    double delta = 0.0;
    std::size_t n = 0;
};

/// Prepared copy of |pi>, or nothing when the attempt was unsuccessful.
struct PrepareOutcome {
    std::optional<StateVector> state;
    AmplificationReport report;
};

/// Direct attempts, then the randomized schedule capped at ceil(2 N^(1/4)).
PrepareOutcome prepare_from_uniform_sub(const WalkBundlePtr& b, unsigned c, const ProtocolConfig& cfg,
                                        RngStream& rng);

struct SamplesOutcome {
    std::vector<std::size_t> samples;
    std::optional<StateVector> coherent_state;
    std::size_t rebuilds = 0;      ///< copies of |pi(t-1)> rebuilt
    std::size_t route_switches = 0;
    Method route = Method::Samples;  ///< route in use when the step finished
};

/// Rebuilds |pi(t-1)> (from cached seeds or from uniform, previous method
/// first), moves it to the walk space of P_t and projects onto |pi(t)> until
/// c copies are accepted. Throws StepFailure once both routes are exhausted.
SamplesOutcome prepare_samples_sub(const WalkBundlePtr& prev, const WalkBundlePtr& cur, const SampleCache& cache_prev,
                                   const ProtocolConfig& cfg, RngStream& rng);

/// Amplification from |u> with cap ceil(2 sqrt(N)), repeated until `count`
/// samples exist. The last prepared state is returned when `keep_state`.
struct FallbackOutcome {
    std::vector<std::size_t> samples;
    std::optional<StateVector> coherent_state;
};
FallbackOutcome fallback_full_prepare(const WalkBundlePtr& b, const ProtocolConfig& cfg, RngStream& rng);

struct FailureBound {
    double ideal;      ///< 2^-c
    double imperfect;  ///< 2^(-c+1)
    double exact;      ///< 1 - (1 - 4^-c)^c
};

/// Throws DomainError unless 1 <= c <= 1000.
FailureBound failure_bound(unsigned c);

/// Runs the protocol one chain at a time.
class SequentialMixer {
public:
    SequentialMixer(ProtocolConfig cfg, RngStream rng);

    /// Throws StepFailure when fallback is disabled and both routes fail,
    /// PreconditionViolated on a first step without a usable hint.
    StepResult step(const ChainStep& s);

    /// Steps until the sequence ends.
    std::vector<StepResult> run(ChainSequence& seq);

    std::size_t steps_done() const noexcept { return t_; }
    /// Walk bundles currently kept alive by the mixer (at most two).
    std::size_t bundles_held() const noexcept { return (prev_ ? 1 : 0) + (cur_ ? 1 : 0); }
    std::size_t max_bundles_held() const noexcept { return max_held_; }

private:
    StepResult first_step(const ChainStep& s, const WalkBundlePtr& b);
    StepResult later_step(const WalkBundlePtr& b);

    ProtocolConfig cfg_;
    RngStream rng_;
    std::size_t t_ = 0;
    WalkBundlePtr prev_;
    WalkBundlePtr cur_;
    SampleCache cache_;
    std::size_t max_held_ = 0;
    double prev_delta_ = 0.0;
};

}  // namespace szmix
