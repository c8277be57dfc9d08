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

// Experiment configs, run modes and result summaries.
//
// Config files are flat `key = value` lines; `#` starts a comment. Lists are
// comma separated. Keys:
//
//   mode            protocol | scaling | lemma_suite | spectral_suite
//   seed            u64, required (or given on the command line)
//   trials          protocol runs per sequence (default 1)
//   outputs         output directory (default "results")
//   sequence_file   directory written by export_sequence; replaces the
//                   generated sequence
//   family, n, length, sequence_seed, target_eta, target_kappa, density,
//   t_start, cooling, energy_scale, proposal, chords, perturbation,
//   min_step_fraction
//                   sequence generator parameters (see chain_gen.hpp)
//   c, eta, kappa, fallback, retain_coherent, test_mode
//                   protocol parameters
//   scaling_n, scaling_delta, delta
//                   scaling grid; each point is the constant chain
//                   mixture_chain(boundary_distribution(n), delta)
//   lemma_n, lemma_samples
//   spectral_n, spectral_chains
//
// Every mode writes newline-delimited JSON records or a single JSON document
// into `outputs`. Output depends only on the config and seed.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "szmix/chain_gen.hpp"
#include "szmix/markov.hpp"
#include "szmix/protocol.hpp"
#include "szmix/rng.hpp"

namespace szmix {

enum class RunMode { Protocol, Scaling, LemmaSuite, SpectralSuite };

std::string run_mode_name(RunMode m);
/// Accepts protocol, scaling, lemma_suite, spectral_suite. Throws ConfigParseError.
RunMode parse_run_mode(const std::string& s);

struct ExperimentConfig {
    RunMode mode = RunMode::Protocol;
    std::optional<std::uint64_t> seed;
    std::size_t trials = 1;
    std::filesystem::path outputs = "results";
    std::optional<std::filesystem::path> sequence_file;
    std::optional<std::uint64_t> sequence_seed;
    SequenceSpec sequence;
    ProtocolConfig protocol;
    std::vector<std::size_t> scaling_n;
    std::vector<double> scaling_delta;
    double delta = 0.05;
    std::vector<std::size_t> lemma_n{4, 16, 64, 256, 1024};
    std::size_t lemma_samples = 10000;
    std::vector<std::size_t> spectral_n{2, 4, 8};
    std::size_t spectral_chains = 50;
};

/// Throws ConfigParseError on unknown keys, malformed values or duplicates.
ExperimentConfig parse_config(const std::string& text);
/// Throws IoError or ConfigParseError.
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOutcome {
    int exit_status = 0;  ///< 0 on completion, 3 on a StepFailure without fallback
    std::vector<std::filesystem::path> files;
};

/// Throws ConfigParseError when the seed is missing or a referenced file is
/// absent, IoError on output failures.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// One output record line with the fixed key order.
std::string format_record(std::size_t step, std::size_t trial, const StepResult& r);

/// Reads NDJSON record files and aggregates them. A `sequence/manifest.json`
/// next to the first file, when present, supplies the stationary oracle for
/// the TV summary. Throws SchemaError on empty or malformed input.
std::string summarize(const std::vector<std::filesystem::path>& files);

// Building blocks shared with the test suites.

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::optional<double> ci_low;   ///< 95% interval; absent with two points
    std::optional<double> ci_high;
    std::size_t points = 0;
};

/// Least squares of log y on log x. Throws DomainError on fewer than two
/// points or nonpositive values.
LogLogFit log_log_fit(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

/// Random distribution over n states spanning flat, heavy-tailed, sparse and
/// near-extremal shapes. All entries are positive.
Distribution random_distribution(std::size_t n, RngStream& rng);

struct LemmaSuiteReport {
    std::size_t n = 0;
    std::size_t samples = 0;
    std::size_t lemma1_applicable = 0;
    std::size_t lemma1_violations = 0;
    std::size_t lemma2_applicable = 0;
    std::size_t lemma2_violations = 0;
    double extremal_fidelity = 0.0;  ///< fidelity to uniform at p_max = 1/sqrt(n)
    bool extremal_ok = false;
};

LemmaSuiteReport run_lemma_suite(std::size_t n, std::size_t samples, RngStream& rng);

struct SpectralCheck {
    double max_phase_error = 0.0;      ///< half-angles arg/2 on A + B vs +-acos(lambda)
    double stationary_error = 0.0;     ///< || W|pi> - |pi> ||
    double complement_error = 0.0;     ///< || (W - 1) restricted to the complement of A + B ||
    std::size_t busy_dimension = 0;
};

/// Dense check of the walk spectrum against the chain spectrum.
SpectralCheck check_spectral_correspondence(const StochasticMatrix& p);

}  // namespace szmix
