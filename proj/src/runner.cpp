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

#include "szmix/runner.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "szmix/errors.hpp"
#include "szmix/io.hpp"
#include "szmix/szegedy.hpp"

namespace szmix {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigParseError(key + ": expected a non-negative integer, got '" + v + "'");
    }
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigParseError(key + ": integer out of range");
    }
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(d)) {
        throw ConfigParseError(key + ": expected a number, got '" + v + "'");
    }
    return d;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigParseError(key + ": expected true or false, got '" + v + "'");
}

struct Record {
    std::size_t step;
    std::size_t trial;
    std::size_t sample;
    std::string method;
    double walk_calls;
    double diffusion_calls;
    bool failed;
    double delta;
    std::size_t n;
};

Record parse_record(const std::string& line, const std::string& where) {
    ojson j;
    try {
        j = ojson::parse(line);
    } catch (const ojson::exception& e) {
        throw SchemaError(where + ": " + e.what());
    }
    static const char* keys[] = {"step", "trial", "sample", "method", "walk_calls", "diffusion_calls",
                                 "failed", "delta", "n"};
    if (!j.is_object()) throw SchemaError(where + ": record is not an object");
    for (const char* k : keys) {
        if (!j.contains(k)) throw SchemaError(where + ": missing key '" + k + "'");
    }
    try {
        Record r{j["step"].get<std::size_t>(),     j["trial"].get<std::size_t>(),
                 j["sample"].get<std::size_t>(),   j["method"].get<std::string>(),
                 j["walk_calls"].get<double>(),    j["diffusion_calls"].get<double>(),
                 j["failed"].get<bool>(),          j["delta"].get<double>(),
                 j["n"].get<std::size_t>()};
        if (r.method != "uniform" && r.method != "samples" && r.method != "fallback") {
            throw SchemaError(where + ": unknown method '" + r.method + "'");
        }
        return r;
    } catch (const ojson::exception& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

ojson fit_json(const LogLogFit& f) {
    ojson j{{"slope", f.slope}, {"intercept", f.intercept}, {"points", f.points}};
    j["ci_low"] = f.ci_low ? ojson(*f.ci_low) : ojson(nullptr);
    j["ci_high"] = f.ci_high ? ojson(*f.ci_high) : ojson(nullptr);
    return j;
}

// Two-sided 95% Student t quantiles for 1..30 degrees of freedom.
double t_quantile_975(std::size_t dof) {
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                   2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120, 2.110,
                                   2.101,  2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
                                   2.052,  2.048, 2.045, 2.042};
    if (dof == 0) return std::numeric_limits<double>::infinity();
    if (dof <= 30) return table[dof - 1];
    return 1.96;
}

ProtocolConfig protocol_for(const ExperimentConfig& cfg, std::size_t n) {
    ProtocolConfig p = cfg.protocol;
    p.n = n;
    p.validate();
    return p;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct TrialRun {
    std::string records;
    std::vector<StepResult> results;
    bool step_failure = false;
};

TrialRun run_trial(const std::vector<ChainStep>& steps, const ProtocolConfig& pcfg, std::uint64_t seed,
                   std::size_t trial, std::uint64_t stream) {
    TrialRun out;
    SequentialMixer mixer(pcfg, RngStream(seed, stream));
    for (const ChainStep& s : steps) {
        try {
            StepResult r = mixer.step(s);
            out.records += format_record(r.t, trial, r) + "\n";
            out.results.push_back(std::move(r));
        } catch (const StepFailure&) {
            out.step_failure = true;
            break;
        }
    }
    return out;
}

RunOutcome run_protocol(const ExperimentConfig& cfg, std::uint64_t seed) {
    std::vector<ChainStep> steps;
    if (cfg.sequence_file) {
        steps = import_sequence(*cfg.sequence_file);
    } else {
        SequenceSpec spec = cfg.sequence;
        spec.seed = cfg.sequence_seed.value_or(seed);
        steps = generate_sequence(spec);
    }
    if (steps.empty()) throw ConfigParseError("sequence is empty");
    const ProtocolConfig pcfg = protocol_for(cfg, steps.front().chain.size());

    RunOutcome out;
    ensure_dir(cfg.outputs);
    export_sequence(cfg.outputs / "sequence", steps);
    out.files.push_back(cfg.outputs / "sequence" / "manifest.json");

    std::string text;
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        TrialRun tr = run_trial(steps, pcfg, seed, trial, trial + 1);
        text += tr.records;
        if (tr.step_failure) {
            out.exit_status = 3;
            break;
        }
    }
    write_text(cfg.outputs / "records.ndjson", text);
    out.files.push_back(cfg.outputs / "records.ndjson");
    return out;
}

RunOutcome run_scaling(const ExperimentConfig& cfg, std::uint64_t seed) {
    const std::vector<std::size_t> ns = cfg.scaling_n.empty() ? std::vector<std::size_t>{cfg.sequence.n} : cfg.scaling_n;
    const std::vector<double> ds = cfg.scaling_delta.empty() ? std::vector<double>{cfg.delta} : cfg.scaling_delta;
    const std::size_t length = std::max<std::size_t>(cfg.sequence.length, 2);

    RunOutcome out;
    ensure_dir(cfg.outputs);
    std::string text;
    ojson points = ojson::array();
    std::vector<double> xn, yn, xd, yd;
    std::uint64_t stream = 1;
    for (std::size_t n : ns) {
        for (double d : ds) {
            const Distribution pi = boundary_distribution(n);
            const StochasticMatrix p = mixture_chain(pi, d);
            std::vector<ChainStep> steps;
            for (std::size_t t = 0; t < length; ++t) {
                steps.push_back(ChainStep{p, d, t == 0 ? std::optional(classify_hint(pi)) : std::nullopt});
            }
            const ProtocolConfig pcfg = protocol_for(cfg, n);
            std::vector<double> costs;
            for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
                TrialRun tr = run_trial(steps, pcfg, seed, trial, stream++);
                text += tr.records;
                for (const StepResult& r : tr.results) {
                    if (r.t >= 2) costs.push_back(static_cast<double>(r.ledger.walk_calls));
                }
                if (tr.step_failure) out.exit_status = 3;
            }
            const double med = costs.empty() ? 0.0 : median(costs);
            points.push_back(ojson{{"n", n}, {"delta", d}, {"median_walk_calls", med}, {"steps_measured", costs.size()}});
            if (ds.size() == 1) {
                xn.push_back(static_cast<double>(n));
                yn.push_back(med);
            }
            if (ns.size() == 1) {
                xd.push_back(d);
                yd.push_back(med);
            }
        }
    }
    ojson doc{{"mode", "scaling"}, {"points", points}};
    auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() < 2 || std::any_of(y.begin(), y.end(), [](double v) { return v <= 0.0; })) return ojson(nullptr);
        return fit_json(log_log_fit(x, y));
    };
    doc["slope_n"] = slope(xn, yn);
    doc["slope_delta"] = slope(xd, yd);
    write_text(cfg.outputs / "records.ndjson", text);
    write_text(cfg.outputs / "scaling.json", doc.dump(2) + "\n");
    out.files.push_back(cfg.outputs / "records.ndjson");
    out.files.push_back(cfg.outputs / "scaling.json");
    return out;
}

RunOutcome run_lemma(const ExperimentConfig& cfg, std::uint64_t seed) {
    RunOutcome out;
    ensure_dir(cfg.outputs);
    ojson per_n = ojson::array();
    std::size_t violations = 0;
    bool extremal = true;
    for (std::size_t i = 0; i < cfg.lemma_n.size(); ++i) {
        RngStream rng(seed, 1000 + i);
        const LemmaSuiteReport r = run_lemma_suite(cfg.lemma_n[i], cfg.lemma_samples, rng);
        violations += r.lemma1_violations + r.lemma2_violations;
        extremal = extremal && r.extremal_ok;
        per_n.push_back(ojson{{"n", r.n},
                              {"samples", r.samples},
                              {"lemma1_applicable", r.lemma1_applicable},
                              {"lemma1_violations", r.lemma1_violations},
                              {"lemma2_applicable", r.lemma2_applicable},
                              {"lemma2_violations", r.lemma2_violations},
                              {"extremal_fidelity", r.extremal_fidelity},
                              {"extremal_ok", r.extremal_ok}});
    }
    ojson doc{{"mode", "lemma_suite"}, {"violations", violations}, {"extremal_ok", extremal}, {"per_n", per_n}};
    write_text(cfg.outputs / "lemma_suite.json", doc.dump(2) + "\n");
    out.files.push_back(cfg.outputs / "lemma_suite.json");
    return out;
}

RunOutcome run_spectral(const ExperimentConfig& cfg, std::uint64_t seed) {
    RunOutcome out;
    ensure_dir(cfg.outputs);
    ojson per_n = ojson::array();
    for (std::size_t i = 0; i < cfg.spectral_n.size(); ++i) {
        RngStream rng(seed, 2000 + i);
        SpectralCheck worst;
        for (std::size_t k = 0; k < cfg.spectral_chains; ++k) {
            const SpectralCheck c = check_spectral_correspondence(random_reversible_chain(cfg.spectral_n[i], rng));
            worst.max_phase_error = std::max(worst.max_phase_error, c.max_phase_error);
            worst.stationary_error = std::max(worst.stationary_error, c.stationary_error);
            worst.complement_error = std::max(worst.complement_error, c.complement_error);
        }
        per_n.push_back(ojson{{"n", cfg.spectral_n[i]},
                              {"chains", cfg.spectral_chains},
                              {"max_phase_error", worst.max_phase_error},
                              {"max_stationary_error", worst.stationary_error},
                              {"max_complement_error", worst.complement_error}});
    }
    ojson doc{{"mode", "spectral_suite"}, {"per_n", per_n}};
    write_text(cfg.outputs / "spectral_suite.json", doc.dump(2) + "\n");
    out.files.push_back(cfg.outputs / "spectral_suite.json");
    return out;
}

}  // namespace

std::string run_mode_name(RunMode m) {
    switch (m) {
        case RunMode::Protocol:
            return "protocol";
        case RunMode::Scaling:
            return "scaling";
        case RunMode::LemmaSuite:
            return "lemma_suite";
        case RunMode::SpectralSuite:
            return "spectral_suite";
    }
    return "protocol";
}

RunMode parse_run_mode(const std::string& s) {
    if (s == "protocol") return RunMode::Protocol;
    if (s == "scaling") return RunMode::Scaling;
    if (s == "lemma_suite") return RunMode::LemmaSuite;
    if (s == "spectral_suite") return RunMode::SpectralSuite;
    throw ConfigParseError("unknown mode '" + s + "'");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigParseError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigParseError("duplicate key '" + key + "'");
        SequenceSpec& s = cfg.sequence;
        ProtocolConfig& p = cfg.protocol;
        if (key == "mode") cfg.mode = parse_run_mode(v);
        else if (key == "seed") cfg.seed = to_u64(key, v);
        else if (key == "trials") cfg.trials = to_u64(key, v);
        else if (key == "outputs") cfg.outputs = v;
        else if (key == "sequence_file") cfg.sequence_file = fs::path(v);
        else if (key == "sequence_seed") cfg.sequence_seed = to_u64(key, v);
        else if (key == "family") s.family = parse_family(v);
        else if (key == "n") s.n = to_u64(key, v);
        else if (key == "length") s.length = to_u64(key, v);
        else if (key == "target_eta") s.target_eta = to_double(key, v);
        else if (key == "target_kappa") s.target_kappa = to_double(key, v);
        else if (key == "density") s.density = to_double(key, v);
        else if (key == "t_start") s.t_start = to_double(key, v);
        else if (key == "cooling") s.cooling = to_double(key, v);
        else if (key == "energy_scale") s.energy_scale = to_double(key, v);
        else if (key == "proposal") {
            if (v == "Complete") s.proposal = ProposalKind::Complete;
            else if (v == "RingChords") s.proposal = ProposalKind::RingChords;
            else throw ConfigParseError("proposal: expected Complete or RingChords");
        }
        else if (key == "chords") s.chords = to_u64(key, v);
        else if (key == "perturbation") s.perturbation = to_double(key, v);
        else if (key == "min_step_fraction") s.min_step_fraction = to_double(key, v);
        else if (key == "c") p.c = static_cast<unsigned>(to_u64(key, v));
        else if (key == "eta") p.eta = to_double(key, v);
        else if (key == "kappa") p.kappa = to_double(key, v);
        else if (key == "fallback") p.fallback = to_bool(key, v);
        else if (key == "retain_coherent") p.retain_coherent = to_bool(key, v);
        else if (key == "test_mode") p.test_mode = to_bool(key, v);
        else if (key == "delta") cfg.delta = to_double(key, v);
        else if (key == "scaling_n" || key == "lemma_n" || key == "spectral_n") {
            std::vector<std::size_t> xs;
            for (const std::string& item : split_list(v)) xs.push_back(to_u64(key, item));
            if (xs.empty()) throw ConfigParseError(key + ": empty list");
            (key == "scaling_n" ? cfg.scaling_n : key == "lemma_n" ? cfg.lemma_n : cfg.spectral_n) = xs;
        }
        else if (key == "scaling_delta") {
            cfg.scaling_delta.clear();
            for (const std::string& item : split_list(v)) cfg.scaling_delta.push_back(to_double(key, item));
            if (cfg.scaling_delta.empty()) throw ConfigParseError(key + ": empty list");
        }
        else if (key == "lemma_samples") cfg.lemma_samples = to_u64(key, v);
        else if (key == "spectral_chains") cfg.spectral_chains = to_u64(key, v);
        else throw ConfigParseError("unknown key '" + key + "'");
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(read_text(path)); }

RunOutcome run_experiment(const ExperimentConfig& cfg) {
    if (!cfg.seed) throw ConfigParseError("seed is required");
    if (cfg.sequence_file && !fs::exists(*cfg.sequence_file / "manifest.json")) {
        throw ConfigParseError("sequence_file " + cfg.sequence_file->string() + " has no manifest.json");
    }
    switch (cfg.mode) {
        case RunMode::Protocol:
            return run_protocol(cfg, *cfg.seed);
        case RunMode::Scaling:
            return run_scaling(cfg, *cfg.seed);
        case RunMode::LemmaSuite:
            return run_lemma(cfg, *cfg.seed);
        case RunMode::SpectralSuite:
            return run_spectral(cfg, *cfg.seed);
    }
    return {};
}

std::string format_record(std::size_t step, std::size_t trial, const StepResult& r) {
    ojson j;
    j["step"] = step;
    j["trial"] = trial;
    j["sample"] = r.output_sample;
    j["method"] = std::string(method_name(r.cache.method));
    j["walk_calls"] = r.ledger.walk_calls;
    j["diffusion_calls"] = r.ledger.diffusion_calls;
    j["failed"] = r.failed;
    j["delta"] = r.delta;
    j["n"] = r.n;
    return j.dump();
}

std::string summarize(const std::vector<fs::path>& files) {
    std::vector<Record> recs;
    for (const fs::path& f : files) {
        std::istringstream in(read_text(f));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            recs.push_back(parse_record(line, f.string() + ":" + std::to_string(lineno)));
        }
    }
    if (recs.empty()) throw SchemaError("no records");

    ojson doc;
    doc["records"] = recs.size();
    std::set<std::size_t> trials;
    std::size_t failed = 0;
    std::map<std::string, std::size_t> methods{{"uniform", 0}, {"samples", 0}, {"fallback", 0}};
    for (const Record& r : recs) {
        trials.insert(r.trial);
        failed += r.failed ? 1 : 0;
        ++methods[r.method];
    }
    doc["trials"] = trials.size();
    doc["failure_rate"] = static_cast<double>(failed) / static_cast<double>(recs.size());
    doc["methods"] = methods;

    // TV against the stationary oracle of the exported sequence.
    const fs::path manifest_dir = files.front().parent_path() / "sequence";
    if (fs::exists(manifest_dir / "manifest.json")) {
        const std::vector<ChainStep> steps = import_sequence(manifest_dir);
        ojson per_step = ojson::array();
        double worst = 0.0;
        bool ok = true;
        for (std::size_t t = 1; t <= steps.size(); ++t) {
            const Distribution pi = stationary_distribution(steps[t - 1].chain);
            Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pi.size()));
            std::size_t m = 0;
            for (const Record& r : recs) {
                if (r.step != t) continue;
                if (r.sample >= pi.size()) throw SchemaError("sample index out of range");
                counts(static_cast<Eigen::Index>(r.sample)) += 1.0;
                ++m;
            }
            if (m == 0) continue;
            const double tv = total_variation(Distribution::normalized(counts), pi);
            const double threshold =
                std::max(0.05, 1.5 * std::sqrt(static_cast<double>(pi.size()) / static_cast<double>(m)));
            ok = ok && tv <= threshold;
            worst = std::max(worst, tv);
            per_step.push_back(ojson{{"step", t}, {"samples", m}, {"tv", tv}, {"threshold", threshold}});
        }
        doc["tv"] = ojson{{"per_step", per_step}, {"max", worst}, {"within_threshold", ok}};
    } else {
        doc["tv"] = nullptr;
    }

    // Cost regressions on medians of later-step walk calls.
    std::map<std::size_t, std::vector<double>> by_n;
    std::map<double, std::vector<double>> by_delta;
    bool later = std::any_of(recs.begin(), recs.end(), [](const Record& r) { return r.step >= 2; });
    for (const Record& r : recs) {
        if (later && r.step < 2) continue;
        by_n[r.n].push_back(r.walk_calls);
        by_delta[r.delta].push_back(r.walk_calls);
    }
    auto table = [](const auto& groups, const char* key, std::vector<double>& x, std::vector<double>& y) {
        ojson rows = ojson::array();
        for (const auto& [k, v] : groups) {
            const double med = median(v);
            rows.push_back(ojson{{key, k}, {"median_walk_calls", med}, {"count", v.size()}});
            x.push_back(static_cast<double>(k));
            y.push_back(med);
        }
        return rows;
    };
    std::vector<double> xn, yn, xd, yd;
    doc["cost_by_n"] = table(by_n, "n", xn, yn);
    doc["cost_by_delta"] = table(by_delta, "delta", xd, yd);
    auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() < 2 || std::any_of(y.begin(), y.end(), [](double v) { return v <= 0.0; })) return ojson(nullptr);
        return fit_json(log_log_fit(x, y));
    };
    doc["slope_n"] = slope(xn, yn);
    doc["slope_delta"] = slope(xd, yd);
    return doc.dump(2) + "\n";
}

LogLogFit log_log_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("log-log fit needs two or more paired points");
    const std::size_t k = x.size();
    std::vector<double> lx(k), ly(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("log-log fit needs positive values");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("log-log fit needs distinct x values");
    LogLogFit f;
    f.points = k;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (k > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double r = ly[i] - (f.intercept + f.slope * lx[i]);
            ssr += r * r;
        }
        const double se = std::sqrt(ssr / static_cast<double>(k - 2) / sxx);
        const double t = t_quantile_975(k - 2);
        f.ci_low = f.slope - t * se;
        f.ci_high = f.slope + t * se;
    }
    return f;
}

double median(std::vector<double> v) {
    if (v.empty()) throw DomainError("median of an empty set");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

Distribution random_distribution(std::size_t n, RngStream& rng) {
    if (n == 0) throw DomainError("empty distribution");
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd w(nn);
    constexpr double kFloor = 1e-15;
    switch (rng.uniform_int(5)) {
        case 0:
            for (Eigen::Index i = 0; i < nn; ++i) w(i) = 0.5 + rng.uniform();
            break;
        case 1: {
            const double k = std::exp(std::log(0.5) + rng.uniform() * (std::log(60.0) - std::log(0.5)));
            for (Eigen::Index i = 0; i < nn; ++i) w(i) = std::pow(rng.uniform(), k) + kFloor;
            break;
        }
        case 2: {
            const std::uint64_t support = 1 + rng.uniform_int(n);
            w.setConstant(kFloor);
            for (std::uint64_t s = 0; s < support; ++s) w(static_cast<Eigen::Index>(rng.uniform_int(n))) = rng.uniform() + kFloor;
            break;
        }
        case 3: {
            const double pmax = std::min(1.0, (1.0 + 0.1 * (2.0 * rng.uniform() - 1.0)) / std::sqrt(static_cast<double>(n)));
            const auto k = std::min<std::size_t>(n, static_cast<std::size_t>(std::floor(1.0 / pmax)));
            w.setConstant(kFloor);
            w.head(static_cast<Eigen::Index>(k)).setConstant(pmax);
            if (k < n) w(static_cast<Eigen::Index>(k)) = std::max(kFloor, 1.0 - static_cast<double>(k) * pmax);
            break;
        }
        default: {
            const std::uint64_t heavy = 1 + rng.uniform_int(n);
            const double ratio = std::exp(rng.uniform() * std::log(1e6));
            for (Eigen::Index i = 0; i < nn; ++i) w(i) = static_cast<std::uint64_t>(i) < heavy ? ratio : 1.0;
            break;
        }
    }
    return Distribution::normalized(w);
}

LemmaSuiteReport run_lemma_suite(std::size_t n, std::size_t samples, RngStream& rng) {
    LemmaSuiteReport r;
    r.n = n;
    r.samples = samples;
    const double nd = static_cast<double>(n);
    const double root = std::sqrt(nd);
    constexpr double kTol = 1e-12;
    for (std::size_t s = 0; s < samples; ++s) {
        const Distribution pi = random_distribution(n, rng);
        const double f = pi.probs().cwiseSqrt().sum();
        const double fid = f * f / nd;
        if (fid <= 1.0 / root) {
            ++r.lemma1_applicable;
            bool ok = pi.probs().maxCoeff() >= 1.0 / root - kTol;
            try {
                lemma1_classify(pi);
            } catch (const LemmaViolation&) {
                ok = false;
            }
            if (!ok) ++r.lemma1_violations;
        }
        if (f <= std::pow(nd, 0.25)) {
            ++r.lemma2_applicable;
            double mass = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (pi[i] >= 1.0 / (4.0 * root)) mass += pi[i];
            }
            bool ok = mass >= 0.5 - kTol;
            try {
                lemma2_witness_set(pi);
            } catch (const LemmaViolation&) {
                ok = false;
            }
            if (!ok) ++r.lemma2_violations;
        }
    }
    const Distribution ext = extremal_distribution(1.0 / root, n);
    const double fe = ext.probs().cwiseSqrt().sum();
    r.extremal_fidelity = fe * fe / nd;
    r.extremal_ok = r.extremal_fidelity >= 1.0 / root - 1e-10;
    return r;
}

SpectralCheck check_spectral_correspondence(const StochasticMatrix& p) {
    const auto n = static_cast<Eigen::Index>(p.size());
    const Eigen::MatrixXd w = dense_walk(Diffusion::build(p));
    const Eigen::MatrixXd sq = p.matrix().cwiseSqrt();

    Eigen::MatrixXd ab = Eigen::MatrixXd::Zero(n * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            ab(i * n + j, i) = sq(j, i);
            ab(j * n + i, n + i) = sq(j, i);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ab, Eigen::ComputeFullU);
    const Eigen::VectorXd sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
    const Eigen::MatrixXd q = svd.matrixU().leftCols(rank);
    const Eigen::MatrixXd qc = svd.matrixU().rightCols(n * n - rank);

    SpectralCheck out;
    out.busy_dimension = static_cast<std::size_t>(rank);

    Eigen::EigenSolver<Eigen::MatrixXd> es(q.transpose() * w * q, false);
    std::vector<double> got;
    for (Eigen::Index k = 0; k < rank; ++k) {
        double ph = std::arg(es.eigenvalues()(k));
        if (ph < -std::numbers::pi + 1e-9) ph = std::numbers::pi;
        got.push_back(ph);
    }

    const Distribution pi = stationary_distribution(p);
    const Eigen::VectorXd root = pi.probs().cwiseSqrt();
    Eigen::MatrixXd sym = root.cwiseInverse().asDiagonal() * p.matrix() * root.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> chain(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
    // W has eigenvalues e^{+-2i acos(lambda)}; lambda = +-1 contribute one each.
    auto wrap = [](double a) {
        const double ph = std::arg(std::polar(1.0, a));
        return ph < -std::numbers::pi + 1e-9 ? std::numbers::pi : ph;
    };
    std::vector<double> want;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double lam = std::clamp(chain.eigenvalues()(k), -1.0, 1.0);
        const double theta = std::acos(lam);
        if (std::abs(lam - 1.0) < 1e-9) {
            want.push_back(0.0);
        } else if (std::abs(lam + 1.0) < 1e-9) {
            want.push_back(0.0);
        } else {
            want.push_back(wrap(2.0 * theta));
            want.push_back(wrap(-2.0 * theta));
        }
    }
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got.size() != want.size()) {
        out.max_phase_error = std::numeric_limits<double>::infinity();
    } else {
        for (std::size_t k = 0; k < got.size(); ++k) {
            out.max_phase_error = std::max(out.max_phase_error, 0.5 * std::abs(got[k] - want[k]));
        }
    }

    Eigen::VectorXd pis = Eigen::VectorXd::Zero(n * n);
    for (Eigen::Index i = 0; i < n; ++i) pis += root(i) * ab.col(i);
    out.stationary_error = (w * pis - pis).norm();
    if (qc.cols() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> c((w - Eigen::MatrixXd::Identity(n * n, n * n)) * qc);
        out.complement_error = c.singularValues()(0);
    }
    return out;
}

}  // namespace szmix
