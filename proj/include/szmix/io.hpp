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

// Plain-text chain and distribution files, and sequence directories.
//
// Matrix file: first line N, then N lines of N entries, row-major.
// Distribution file: first line N, second line N entries.
// Sequence directory: step_<t>.txt per chain plus manifest.json holding
// n, the step files, their gaps and the first-step hint.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "szmix/markov.hpp"
#include "szmix/protocol.hpp"

namespace szmix {

/// Throws IoError when the file cannot be read, SchemaError on bad content
/// and the StochasticMatrix validation errors.
StochasticMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const StochasticMatrix& p);

Distribution read_distribution(const std::filesystem::path& path);
void write_distribution(const std::filesystem::path& path, const Distribution& d);

/// Creates `dir` if needed. Throws IoError.
void export_sequence(const std::filesystem::path& dir, const std::vector<ChainStep>& steps);
/// Throws IoError or SchemaError.
std::vector<ChainStep> import_sequence(const std::filesystem::path& dir);

/// Whole file as a string. Throws IoError.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace szmix
