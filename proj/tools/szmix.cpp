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

// szmix command line:
//   szmix run <config> [--seed N] [--out DIR] [--mode NAME] [--trials N]
//   szmix summarize <records...>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "szmix/errors.hpp"
#include "szmix/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Sequential quantum sampling from slowly evolving Markov chains"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> mode;
    std::optional<std::size_t> trials;
    CLI::App* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--seed", seed, "Seed (overrides the config)");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--mode", mode, "protocol, scaling, lemma_suite or spectral_suite");
    run->add_option("--trials", trials, "Trials per sequence");

    std::vector<std::string> inputs;
    CLI::App* sum = app.add_subcommand("summarize", "Aggregate record files into one JSON document");
    sum->add_option("results", inputs, "Record files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            szmix::ExperimentConfig cfg = szmix::load_config(config_path);
            if (seed) cfg.seed = *seed;
            if (out_dir) cfg.outputs = *out_dir;
            if (mode) cfg.mode = szmix::parse_run_mode(*mode);
            if (trials) cfg.trials = *trials;
            const szmix::RunOutcome r = szmix::run_experiment(cfg);
            for (const auto& f : r.files) std::cout << f.string() << "\n";
            if (r.exit_status != 0) std::cerr << "step failure without fallback\n";
            return r.exit_status;
        }
        std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
        std::cout << szmix::summarize(paths);
        return 0;
    } catch (const szmix::ConfigParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const szmix::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
