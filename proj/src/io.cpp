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

#include "szmix/io.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "szmix/errors.hpp"

namespace szmix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> read_numbers(const fs::path& path, std::size_t& n) {
    std::istringstream in(read_text(path));
    long long header = 0;
    if (!(in >> header) || header <= 0) throw SchemaError(path.string() + ": missing or bad size header");
    n = static_cast<std::size_t>(header);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw SchemaError(path.string() + ": non-numeric entry");
    return out;
}

}  // namespace

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

StochasticMatrix read_matrix(const fs::path& path) {
    std::size_t n = 0;
    const std::vector<double> v = read_numbers(path, n);
    if (v.size() != n * n) {
        throw SchemaError(path.string() + ": expected " + std::to_string(n * n) + " entries, found " +
                          std::to_string(v.size()));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r * n + c];
    }
    return StochasticMatrix::validate(m, 1e-9);
}

void write_matrix(const fs::path& path, const StochasticMatrix& p) {
    std::string s = std::to_string(p.size()) + "\n";
    for (std::size_t r = 0; r < p.size(); ++r) {
        for (std::size_t c = 0; c < p.size(); ++c) {
            if (c) s += ' ';
            s += fmt(p(r, c));
        }
        s += '\n';
    }
    write_text(path, s);
}

Distribution read_distribution(const fs::path& path) {
    std::size_t n = 0;
    const std::vector<double> v = read_numbers(path, n);
    if (v.size() != n) throw SchemaError(path.string() + ": entry count differs from header");
    return Distribution::validate(v, 1e-9);
}

void write_distribution(const fs::path& path, const Distribution& d) {
    std::string s = std::to_string(d.size()) + "\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i) s += ' ';
        s += fmt(d[i]);
    }
    write_text(path, s + "\n");
}

void export_sequence(const fs::path& dir, const std::vector<ChainStep>& steps) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    json manifest;
    manifest["n"] = steps.empty() ? 0 : steps.front().chain.size();
    manifest["steps"] = json::array();
    for (std::size_t t = 0; t < steps.size(); ++t) {
        const std::string file = "step_" + std::to_string(t + 1) + ".txt";
        write_matrix(dir / file, steps[t].chain);
        json e{{"file", file}, {"delta", steps[t].delta}};
        if (steps[t].hint) {
            const bool uni = steps[t].hint->kind == FirstStepHint::Kind::Uniform;
            e["hint"] = uni ? json{{"kind", "uniform"}} : json{{"kind", "mode"}, {"mode_index", steps[t].hint->mode_index}};
        }
        manifest["steps"].push_back(e);
    }
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<ChainStep> import_sequence(const fs::path& dir) {
    json manifest;
    try {
        manifest = json::parse(read_text(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("manifest: ") + e.what());
    }
    std::vector<ChainStep> out;
    try {
        for (const json& e : manifest.at("steps")) {
            StochasticMatrix p = read_matrix(dir / e.at("file").get<std::string>());
            std::optional<FirstStepHint> hint;
            if (e.contains("hint")) {
                FirstStepHint h;
                const std::string kind = e["hint"].at("kind").get<std::string>();
                if (kind == "mode") {
                    h.kind = FirstStepHint::Kind::Mode;
                    h.mode_index = e["hint"].at("mode_index").get<std::size_t>();
                } else if (kind != "uniform") {
                    throw SchemaError("manifest: unknown hint kind " + kind);
                }
                hint = h;
            }
            out.push_back(ChainStep{std::move(p), e.at("delta").get<double>(), hint});
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("manifest: ") + e.what());
    }
    return out;
}

}  // namespace szmix
