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

// Reversible chain generators and slowly evolving chain sequences.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "szmix/markov.hpp"
#include "szmix/protocol.hpp"
#include "szmix/rng.hpp"

namespace szmix {

/// Random connected weighted graph with self-loops; P(j, i) = w_ij / sum_k w_ik.
/// `density` is the probability that an off-diagonal edge is present.
StochasticMatrix random_reversible_chain(std::size_t n, RngStream& rng, double density = 1.0);

enum class ProposalKind { Complete, RingChords };

/// Symmetric column-stochastic proposal matrix. RingChords adds `chords`
/// random non-ring edges; every edge gets 1 / (max degree + 1).
Eigen::MatrixXd proposal_matrix(std::size_t n, ProposalKind kind, RngStream& rng, std::size_t chords = 0);

/// Metropolis chain for exp(-E / T) over a symmetric proposal.
/// Throws DomainError unless temperature > 0.
StochasticMatrix metropolis_chain(const std::vector<double>& energies, double temperature,
                                  const Eigen::MatrixXd& proposal);
/// Same with the complete-graph proposal.
StochasticMatrix metropolis_chain(const std::vector<double>& energies, double temperature);

/// Gibbs distribution exp(-E_i / T) / Z.
Distribution gibbs_distribution(const std::vector<double>& energies, double temperature);

/// P = (1 - delta) 1 + delta pi 1^T: stationary pi, spectral gap exactly delta.
StochasticMatrix mixture_chain(const Distribution& pi, double delta);

/// Two-level distribution with ceil(sqrt(n)) heavy states whose fidelity to
/// uniform equals `fidelity` (default 1/sqrt(n)).
Distribution boundary_distribution(std::size_t n, std::optional<double> fidelity = std::nullopt);

/// Hint certified classically: Uniform when F(u, pi) >= 1/sqrt(n), else Mode.
FirstStepHint classify_hint(const Distribution& pi);

enum class Family { ConstantChain, MetropolisAnnealing, PerturbedWeights };

std::string family_name(Family f);
/// Throws ConfigParseError.
Family parse_family(const std::string& s);

struct SequenceSpec {
    Family family = Family::ConstantChain;
    std::size_t n = 4;
    std::size_t length = 10;
    std::uint64_t seed = 0;
    double target_eta = 0.9;
    double target_kappa = 2.0;
    /// Edge density for random weight graphs.
    double density = 1.0;
    // MetropolisAnnealing
    double t_start = 2.0;
    double cooling = 0.85;  ///< geometric factor per step, down to energy_scale / ln(1e10)
    /// Energies: one ground state at 0, the others uniform in [scale / 2, scale].
    double energy_scale = 1.0;
    ProposalKind proposal = ProposalKind::RingChords;
    std::size_t chords = 0;  ///< 0 picks n / 2
    // PerturbedWeights
    double perturbation = 0.05;
    /// Smallest step, relative to the nominal one, before StepSizeUnderflow.
    double min_step_fraction = 1e-3;
};

/// Mutable generator state between steps.
struct SequenceState {
    std::size_t produced = 0;
    std::optional<StochasticMatrix> chain;
    std::optional<Distribution> pi;
    double delta = 0.0;
    double temperature = 0.0;
    std::vector<double> energies;
    Eigen::MatrixXd proposal;
    Eigen::MatrixXd weights;
};

/// Produces the next chain, shrinking the step until the eta and kappa bounds
/// hold against the previous one. Returns the exact spectral gap. Throws
/// StepSizeUnderflow.
ChainStep next_in_sequence(const SequenceSpec& spec, SequenceState& state, RngStream& rng);

/// A ChainSequence backed by next_in_sequence.
class GeneratedSequence : public ChainSequence {
public:
    explicit GeneratedSequence(SequenceSpec spec);
    std::optional<ChainStep> next() override;
    const SequenceSpec& spec() const noexcept { return spec_; }

private:
    SequenceSpec spec_;
    SequenceState state_;
    RngStream rng_;
};

/// All steps of a finite spec.
std::vector<ChainStep> generate_sequence(const SequenceSpec& spec);

}  // namespace szmix
