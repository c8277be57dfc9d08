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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. `acceptance 3 7` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "szmix/amplify.hpp"
#include "szmix/chain_gen.hpp"
#include "szmix/errors.hpp"
#include "szmix/io.hpp"
#include "szmix/markov.hpp"
#include "szmix/phase.hpp"
#include "szmix/protocol.hpp"
#include "szmix/runner.hpp"
#include "szmix/szegedy.hpp"

using namespace szmix;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Verdict()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double sigma(double p, double shots) { return std::sqrt(std::max(p * (1.0 - p), 1e-12) / shots); }

StateVector random_busy_state(const WalkBundle& b, RngStream& rng) {
    const Eigen::MatrixXd& q = b.busy_basis();
    Eigen::VectorXcd c(q.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = Complex(rng.normal(), rng.normal());
    return StateVector::normalized(b.n(), q.cast<Complex>() * c);
}

// a |target> + sqrt(1 - a^2) |v>, with v a random busy direction orthogonal to target.
StateVector mix_with_orthogonal(const WalkBundle& b, const StateVector& target, double a, RngStream& rng) {
    Amplitudes v = random_busy_state(b, rng).amplitudes();
    v -= target.amplitudes() * target.amplitudes().dot(v);
    v.normalize();
    return StateVector::normalized(b.n(), a * target.amplitudes() + std::sqrt(1.0 - a * a) * v);
}

Distribution histogram(const std::vector<std::size_t>& xs, std::size_t n) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t x : xs) h(static_cast<Eigen::Index>(x)) += 1.0;
    return Distribution::normalized(h);
}

fs::path scratch_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("szmix_acceptance_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Verdict spectral_correspondence() {
    RngStream rng(101, 0);
    double phase = 0.0, stat = 0.0, comp = 0.0;
    for (std::size_t n : {2u, 4u, 8u}) {
        for (int k = 0; k < 50; ++k) {
            const SpectralCheck s = check_spectral_correspondence(random_reversible_chain(n, rng));
            phase = std::max(phase, s.max_phase_error);
            stat = std::max(stat, s.stationary_error);
            comp = std::max(comp, s.complement_error);
        }
    }
    Verdict v;
    v.pass = phase <= 1e-8 && stat <= 1e-10 && comp <= 1e-10;
    v.detail = "phase err " + fmt("%.2e", phase) + ", W|pi> err " + fmt("%.2e", stat) + ", complement err " +
               fmt("%.2e", comp);
    return v;
}

Verdict lemma_suite() {
    RngStream rng(102, 0);
    Verdict v;
    std::size_t violations = 0;
    double worst_extremal = 1.0;
    for (std::size_t n : {4u, 16u, 64u, 256u, 1024u}) {
        const LemmaSuiteReport r = run_lemma_suite(n, 10000, rng);
        violations += r.lemma1_violations + r.lemma2_violations;
        v.pass = v.pass && r.extremal_ok;
        worst_extremal = std::min(worst_extremal, r.extremal_fidelity * std::sqrt(static_cast<double>(n)));
    }
    v.pass = v.pass && violations == 0;
    v.detail = std::to_string(violations) + " violations over 5 x 10^4 samples, min extremal F*sqrt(N) " +
               fmt("%.12f", worst_extremal);
    return v;
}

Verdict projection_calibration() {
    RngStream rng(103, 0);
    Verdict v;
    double worst = -1.0;
    const int shots = 10000;
    for (unsigned c : {3u, 5u}) {
        for (std::size_t n : {2u, 4u, 8u}) {
            const WalkBundlePtr b = build_walk(random_reversible_chain(n, rng));
            std::vector<StateVector> states;
            for (double f : {0.1, 0.5, 0.9}) states.push_back(mix_with_orthogonal(*b, b->pi_state(), std::sqrt(f), rng));
            states.push_back(random_busy_state(*b, rng));
            for (const StateVector& s : states) {
                const double f = std::norm(overlap(s, b->pi_state()));
                int hits = 0;
                for (int k = 0; k < shots; ++k) hits += pi_projective_measurement(*b, s, c, rng).success ? 1 : 0;
                const double dev = std::abs(hits / double(shots) - f);
                const double tol = std::ldexp(1.0, -static_cast<int>(c)) + 4.0 * sigma(f, shots);
                v.pass = v.pass && dev <= tol;
                worst = std::max(worst, dev / tol);
            }
        }
    }
    v.detail = "worst deviation / tolerance " + fmt("%.3f", worst) + " over 24 states";
    return v;
}

Verdict aro_accuracy() {
    RngStream rng(104, 0);
    Verdict v;
    double worst = 0.0;
    double worst_ratio = 0.0;
    for (std::size_t n : {2u, 4u, 8u}) {
        const WalkBundlePtr b = build_walk(random_reversible_chain(n, rng));
        std::uint64_t calls_coarse = 0;
        std::uint64_t calls_fine = 0;
        for (double eps : {0.1, 0.01}) {
            const ApproximateReflection aro(b, reflection_config(b->predicted_phase_gap(), eps));
            (eps == 0.1 ? calls_coarse : calls_fine) = aro.walk_calls_per_apply();
            for (int k = 0; k < 100; ++k) {
                const double e = aro.error_norm(random_busy_state(*b, rng));
                v.pass = v.pass && e <= eps;
                worst = std::max(worst, e / eps);
            }
        }
        const double ratio = static_cast<double>(calls_fine) / static_cast<double>(calls_coarse);
        v.pass = v.pass && ratio <= 2.0;
        worst_ratio = std::max(worst_ratio, ratio);
    }
    v.detail = "worst error / eps " + fmt("%.3f", worst) + ", walk-call ratio eps 0.01 vs 0.1 " + fmt("%.2f", worst_ratio);
    return v;
}

Verdict search_distribution() {
    RngStream rng(105, 0);
    Verdict v;
    double worst_tv = 0.0;
    for (std::size_t n : {4u, 8u}) {
        const WalkBundlePtr b = build_walk(random_reversible_chain(n, rng));
        const MarkedSet m = n == 4 ? MarkedSet::make({1, 3}, 4) : MarkedSet::make({0, 2, 5}, 8);
        const Distribution target = m.truncate(b->stationary());
        std::vector<std::size_t> out;
        for (int k = 0; k < 10000; ++k) out.push_back(*search(b, m, b->pi_state(), 5, rng).sampled_index);
        const double tv = total_variation(histogram(out, n), target);
        v.pass = v.pass && tv <= 0.02;
        worst_tv = std::max(worst_tv, tv);
    }
    double min_fid = 1.0;
    for (unsigned c : {3u, 5u}) {
        const WalkBundlePtr b = build_walk(random_reversible_chain(8, rng));
        const std::size_t seed = mode(b->stationary()).index;
        for (int k = 0; k < 200; ++k) {
            const AmplificationReport r = unsearch_from_basis(b, seed, c, rng);
            const double f = std::norm(overlap(*r.output_state, b->pi_state()));
            v.pass = v.pass && f >= 1.0 - std::ldexp(1.0, -static_cast<int>(c));
            min_fid = std::min(min_fid, f);
        }
    }
    v.detail = "search TV " + fmt("%.4f", worst_tv) + ", min unsearch fidelity " + fmt("%.5f", min_fid);
    return v;
}

Verdict end_to_end() {
    SequenceSpec spec;
    spec.family = Family::MetropolisAnnealing;
    spec.n = 8;
    spec.length = 20;
    spec.target_eta = 0.9;
    spec.target_kappa = 2.0;
    spec.seed = 106;
    const std::vector<ChainStep> steps = generate_sequence(spec);

    ProtocolConfig cfg;
    cfg.n = 8;
    cfg.c = 5;
    cfg.eta = 0.9;
    cfg.kappa = 2.0;

    // 400 runs x c = 2000 pooled cache samples per step.
    const int runs = 400;
    std::vector<std::vector<std::size_t>> pooled(steps.size());
    std::size_t failed = 0, total = 0, exceptions = 0;
    std::set<Method> routes;
    for (int run = 0; run < runs; ++run) {
        SequentialMixer m(cfg, RngStream(106, static_cast<std::uint64_t>(run) + 1));
        for (std::size_t t = 0; t < steps.size(); ++t) {
            try {
                const StepResult r = m.step(steps[t]);
                pooled[t].insert(pooled[t].end(), r.cache.samples.begin(), r.cache.samples.end());
                failed += r.failed ? 1 : 0;
                if (t > 0) routes.insert(r.cache.method);
            } catch (const StepFailure&) {
                ++exceptions;
                ++failed;
                break;
            }
            ++total;
        }
    }
    double worst_tv = 0.0;
    for (std::size_t t = 0; t < steps.size(); ++t) {
        worst_tv = std::max(worst_tv, total_variation(histogram(pooled[t], 8), stationary_distribution(steps[t].chain)));
    }
    const double failure_rate = static_cast<double>(failed) / static_cast<double>(total);
    const bool both = routes.count(Method::Uniform) && routes.count(Method::Samples);
    const Regime first = lemma1_classify(stationary_distribution(steps.front().chain)).regime;
    const Regime last = lemma1_classify(stationary_distribution(steps.back().chain)).regime;

    Verdict v;
    v.pass = worst_tv <= 0.05 && failure_rate <= 1.0 / 16.0 && both;
    v.detail = "max step TV " + fmt("%.4f", worst_tv) + ", failure rate " + fmt("%.4f", failure_rate) + " (" +
               std::to_string(exceptions) + " unrecovered), routes at t>1:";
    for (Method r : routes) v.detail += " " + std::string(method_name(r));
    v.detail += std::string(", regimes ") + (first == Regime::UniformAccessible ? "uniform" : "mode") + " -> " +
                (last == Regime::UniformAccessible ? "uniform" : "mode");
    return v;
}

json run_scaling(const std::string& tag, const std::string& grid) {
    const fs::path dir = scratch_dir(tag);
    ExperimentConfig cfg = parse_config("mode = scaling\nseed = 107\nlength = 3\ntrials = 31\nc = 5\n" + grid);
    cfg.outputs = dir;
    run_experiment(cfg);
    json doc = json::parse(read_text(dir / "scaling.json"));
    fs::remove_all(dir);
    return doc;
}

Verdict scaling() {
    const json by_n = run_scaling("n", "scaling_n = 4,8,16,32,64\ndelta = 0.1\n");
    const json by_d = run_scaling("delta", "scaling_n = 16\nscaling_delta = 0.2,0.1,0.05,0.02,0.01,0.005,0.002\n");
    const double sn = by_n["slope_n"]["slope"].get<double>();
    const double sd = by_d["slope_delta"]["slope"].get<double>();
    Verdict v;
    v.pass = std::abs(sn - 0.25) <= 0.15 && std::abs(sd + 0.5) <= 0.15;
    v.detail = "(a) slope vs N " + fmt("%.3f", sn) + " [" + fmt("%.3f", by_n["slope_n"]["ci_low"].get<double>()) + ", " +
               fmt("%.3f", by_n["slope_n"]["ci_high"].get<double>()) + "], (b) slope vs delta " + fmt("%.3f", sd) + " [" +
               fmt("%.3f", by_d["slope_delta"]["ci_low"].get<double>()) + ", " +
               fmt("%.3f", by_d["slope_delta"]["ci_high"].get<double>()) + "]";
    return v;
}

Verdict failure_arithmetic() {
    Verdict v;
    double worst_rel = 0.0;
    for (unsigned c = 1; c <= 20; ++c) {
        const FailureBound fb = failure_bound(c);
        // 1 - (1 - q)^c = sum_k (-1)^(k+1) C(c, k) q^k
        const long double q = std::ldexp(1.0L, -2 * static_cast<int>(c));
        long double series = 0.0L, term = 1.0L;
        for (unsigned k = 1; k <= c; ++k) {
            term *= -q * static_cast<long double>(c - k + 1) / static_cast<long double>(k);
            series -= term;
        }
        const double rel = static_cast<double>(std::fabs((static_cast<long double>(fb.exact) - series) / series));
        worst_rel = std::max(worst_rel, rel);
        v.pass = v.pass && rel <= 1e-13 && fb.exact <= fb.ideal && fb.ideal == std::ldexp(1.0, -static_cast<int>(c));
    }

    // eta: ideal success rate of projecting the previous stationary state
    // onto the current one. eta': measured on an eps-perturbed copy with an
    // eps-accurate projection.
    RngStream rng(108, 0);
    const Distribution pi_prev = Distribution::validate(std::vector<double>{0.4, 0.3, 0.2, 0.1});
    const Distribution pi_cur = Distribution::validate(std::vector<double>{0.1, 0.2, 0.3, 0.4});
    const WalkBundlePtr cur = build_walk(mixture_chain(pi_cur, 0.3));
    const StateVector prev = coherent_encoding(pi_prev, cur->diffusion());
    const double eta = std::norm(overlap(prev, cur->pi_state()));
    const int shots = 20000;
    double worst = 0.0;
    for (double eps : {0.05, 0.1}) {
        const PhaseDetectionConfig meas = measurement_config(cur->predicted_phase_gap(), eps);
        for (int inst = 0; inst < 3; ++inst) {
            // Trace distance between pure states is sqrt(1 - |<a|b>|^2) = eps.
            const StateVector rho = mix_with_orthogonal(*cur, prev, std::sqrt(1.0 - eps * eps), rng);
            int hits = 0;
            for (int k = 0; k < shots; ++k) hits += pi_projective_measurement(*cur, rho, meas, rng).success ? 1 : 0;
            const double eta_prime = hits / double(shots);
            const double dev = std::abs(eta - eta_prime);
            const double tol = 2.0 * eps + 4.0 * sigma(eta_prime, shots);
            v.pass = v.pass && dev <= tol;
            worst = std::max(worst, dev / tol);
        }
    }
    v.detail = "exact bound rel err " + fmt("%.1e", worst_rel) + " for c = 1..20; eta " + fmt("%.4f", eta) + ", worst |eta - eta'| / (2 eps + 4 sigma) " +
               fmt("%.3f", worst);
    return v;
}

Verdict determinism() {
    std::vector<std::string> texts;
    for (int k = 0; k < 2; ++k) {
        const fs::path dir = scratch_dir("det" + std::to_string(k));
        ExperimentConfig cfg = parse_config(
            "mode = protocol\nseed = 109\nfamily = MetropolisAnnealing\nn = 6\nlength = 8\ntrials = 10\nc = 3\n");
        cfg.outputs = dir;
        run_experiment(cfg);
        texts.push_back(read_text(dir / "records.ndjson") + read_text(dir / "sequence" / "manifest.json"));
        fs::remove_all(dir);
    }
    Verdict v;
    v.pass = !texts[0].empty() && texts[0] == texts[1];
    v.detail = std::to_string(texts[0].size()) + " bytes, " + (v.pass ? "identical" : "different");
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "spectral correspondence", 60, spectral_correspondence},
        {2, "lemma suite", 60, lemma_suite},
        {3, "projective-measurement calibration", 600, projection_calibration},
        {4, "ARO accuracy", 600, aro_accuracy},
        {5, "search distribution", 600, search_distribution},
        {6, "end-to-end protocol", 1800, end_to_end},
        {7, "scaling exponents", 3600, scaling},
        {8, "failure-bound arithmetic", 300, failure_arithmetic},
        {9, "determinism", 60, determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool ok = v.pass && in_time;
        failures += ok ? 0 : 1;
        std::printf("%s criterion %d (%s): %s; %.1f s of %.0f s\n", ok ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                    secs, c.budget_seconds);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
