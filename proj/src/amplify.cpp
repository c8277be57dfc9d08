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

#include "szmix/amplify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>

#include "szmix/errors.hpp"

namespace szmix {

namespace {

std::uint64_t default_cap(std::size_t n) {
    return static_cast<std::uint64_t>(std::ceil(2.0 * std::sqrt(static_cast<double>(n))));
}

PiReflector reflector_for(const WalkBundlePtr& b, unsigned c, std::uint64_t cap, const AmplifyOptions& opts) {
    if (opts.reflector) return *opts.reflector;
    double eps = opts.reflection_epsilon.value_or(std::ldexp(1.0, -2 * static_cast<int>(c)) /
                                                  static_cast<double>(std::max<std::uint64_t>(1, cap)));
    eps = std::min(eps, 0.5);
    auto aro = std::make_shared<const ApproximateReflection>(b, reflection_config(b->predicted_phase_gap(), eps));
    return PiReflector::approximate(std::move(aro));
}

// Leak target 2^-(conf+2) * overlap_floor, the floor being a lower bound on
// |<psi|pi>|^2 before amplification.
PhaseDetectionConfig closing_measurement(const WalkBundle& b, unsigned c, double overlap_floor,
                                         const AmplifyOptions& opts) {
    if (opts.measurement) return *opts.measurement;
    const unsigned conf = opts.measurement_confidence.value_or(c);
    const double floor = std::clamp(overlap_floor, 1e-300, 1.0);
    return measurement_config(b.predicted_phase_gap(), std::ldexp(1.0, -static_cast<int>(conf) - 2) * floor);
}

// Runs direct attempts, then the fixed-count or randomized schedule, calling
// `attempt(iterations)` until it reports success.
AmplificationReport drive(unsigned c, std::uint64_t cap, RngStream& rng, const AmplifyOptions& opts,
                          const std::function<bool(std::uint64_t, AmplificationReport&)>& attempt) {
    CostLedger local;
    LedgerScope scope(local);
    AmplificationReport rep;
    const unsigned sweeps = opts.sweeps ? opts.sweeps : c;

    auto run = [&](std::uint64_t j) {
        ++rep.attempts;
        rep.iterations_used += j;
        const bool ok = attempt(j, rep);
        rep.walk_calls = local.walk_calls;
        if (ok) rep.succeeded = true;
        return ok;
    };

    if (opts.known_overlap) {
        const std::uint64_t m = grover_iterations(*opts.known_overlap);
        const unsigned direct = opts.direct_attempts.value_or(0);
        for (unsigned a = 0; a < direct; ++a) {
            if (run(0)) return rep;
        }
        for (unsigned a = 0; a < sweeps; ++a) {
            if (run(m)) return rep;
        }
        return rep;
    }

    const unsigned direct = opts.direct_attempts.value_or(3 * c);
    for (unsigned a = 0; a < direct; ++a) {
        if (run(0)) return rep;
    }
    for (unsigned s = 0; s < sweeps; ++s) {
        for (std::uint64_t j : boyer_schedule(cap, rng, opts.schedule)) {
            if (run(j)) return rep;
        }
    }
    return rep;
}

}  // namespace

// ---------------------------------------------------------------------------
// Marked sets

MarkedSet MarkedSet::make(std::vector<std::size_t> indices, std::size_t n) {
    if (indices.empty()) throw DomainError("marked set is empty");
    MarkedSet m;
    m.n_ = n;
    m.member_.assign(n, false);
    for (std::size_t i : indices) {
        if (i >= n) throw DomainError("marked index " + std::to_string(i) + " out of range");
        if (m.member_[i]) throw DomainError("duplicate marked index " + std::to_string(i));
        m.member_[i] = true;
    }
    std::sort(indices.begin(), indices.end());
    m.indices_ = std::move(indices);
    return m;
}

double MarkedSet::weight(const Distribution& pi) const {
    if (pi.size() != n_) throw DimensionMismatch("marked set and distribution sizes differ");
    double w = 0.0;
    for (std::size_t i : indices_) w += pi[i];
    return w;
}

Distribution MarkedSet::truncate(const Distribution& pi) const {
    if (pi.size() != n_) throw DimensionMismatch("marked set and distribution sizes differ");
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t i : indices_) p(static_cast<Eigen::Index>(i)) = pi[i];
    return Distribution::normalized(p);
}

LinearOperator marked_phase_flip(const MarkedSet& m) {
    const std::size_t n = m.n();
    std::vector<bool> flip(n, false);
    for (std::size_t i : m.indices()) flip[i] = true;
    return LinearOperator("Z_M", n * n, [n, flip](const Amplitudes& in, Amplitudes& out) {
        out = in;
        const std::size_t sectors = static_cast<std::size_t>(in.size()) / (n * n);
        for (std::size_t a = 0; a < sectors; ++a) {
            for (std::size_t i = 0; i < n; ++i) {
                if (flip[i]) out.segment(static_cast<Eigen::Index>(a * n * n + i * n), static_cast<Eigen::Index>(n)) *= -1.0;
            }
        }
    });
}

// ---------------------------------------------------------------------------
// Reflectors and schedules

PiReflector PiReflector::exact(WalkBundlePtr b) {
    PiReflector r;
    r.bundle_ = std::move(b);
    return r;
}

PiReflector PiReflector::approximate(std::shared_ptr<const ApproximateReflection> aro) {
    PiReflector r;
    r.bundle_ = WalkBundlePtr(aro, &aro->bundle());
    r.aro_ = std::move(aro);
    return r;
}

StateVector PiReflector::operator()(const StateVector& s, RngStream& rng) const {
    if (aro_) return aro_->apply(s, rng);
    const Amplitudes& pi = bundle_->pi_state().amplitudes();
    return StateVector::normalized(s.n(), 2.0 * pi.dot(s.amplitudes()) * pi - s.amplitudes());
}

std::uint64_t grover_iterations(double overlap) {
    if (!(overlap > 0.0 && overlap <= 1.0)) throw DomainError("overlap must lie in (0, 1]");
    const double phi = std::asin(std::sqrt(overlap));
    return static_cast<std::uint64_t>(std::floor((std::numbers::pi / 4.0) / phi));
}

std::vector<std::uint64_t> boyer_schedule(std::uint64_t max_iterations, RngStream& rng, const ScheduleOptions& opts) {
    if (!(opts.growth > 1.0)) throw DomainError("schedule growth factor must exceed 1");
    const std::uint64_t cap = std::max<std::uint64_t>(1, max_iterations);
    std::vector<std::uint64_t> out;
    for (double m = 1.0; m < static_cast<double>(cap); m *= opts.growth) {
        const auto hi = std::min(cap, static_cast<std::uint64_t>(std::ceil(m)));
        out.push_back(1 + rng.uniform_int(hi));
    }
    for (unsigned t = 0; t < opts.tail_attempts; ++t) out.push_back(1 + rng.uniform_int(cap));
    return out;
}

// ---------------------------------------------------------------------------
// Search, unsearch, preparation from uniform

AmplificationReport search(const WalkBundlePtr& b, const MarkedSet& m, const StateVector& pi_state, unsigned c,
                           RngStream& rng, const AmplifyOptions& opts) {
    if (m.n() != b->n() || pi_state.n() != b->n()) throw DimensionMismatch("search inputs disagree on N");
    const std::uint64_t cap = opts.max_iterations ? opts.max_iterations : default_cap(b->n());
    const PiReflector reflect = reflector_for(b, c, cap, opts);
    const LinearOperator z = marked_phase_flip(m);

    AmplificationReport rep = drive(c, cap, rng, opts, [&](std::uint64_t j, AmplificationReport& r) {
        charge_wall_step();
        StateVector psi = pi_state;
        for (std::uint64_t it = 0; it < j; ++it) psi = reflect(apply(z, psi), rng);
        charge_amplification_iterations(j);
        const MeasurementResult out = measure_register(psi, Register::I, rng);
        if (!m.contains(out.outcome)) return false;
        r.sampled_index = out.outcome;
        return true;
    });
    if (!rep.succeeded) throw ExhaustedRetries("search found no marked element in " + std::to_string(rep.attempts) + " attempts");
    return rep;
}

AmplificationReport try_unsearch_from_basis(const WalkBundlePtr& b, std::size_t seed, unsigned c, RngStream& rng,
                                            const AmplifyOptions& opts) {
    if (seed >= b->n()) throw DomainError("seed index out of range");
    if (!(b->stationary()[seed] > 0.0)) throw PreconditionViolated("seed has zero stationary probability");
    const std::uint64_t cap = opts.max_iterations ? opts.max_iterations : default_cap(b->n());
    const PiReflector reflect = reflector_for(b, c, cap, opts);
    const LinearOperator z = marked_phase_flip(MarkedSet::make({seed}, b->n()));
    const PhaseDetectionConfig meas = closing_measurement(*b, c, b->stationary()[seed], opts);

    return drive(c, cap, rng, opts, [&](std::uint64_t j, AmplificationReport& r) {
        charge_wall_step();
        StateVector psi = apply(b->u(), StateVector::basis(b->n(), seed, 0));
        for (std::uint64_t it = 0; it < j; ++it) psi = apply(z, reflect(psi, rng));
        charge_amplification_iterations(j);
        ProjectionResult pr = pi_projective_measurement(*b, psi, meas, rng);
        if (!pr.success) return false;
        r.output_state = std::move(pr.state);
        return true;
    });
}

AmplificationReport unsearch_from_basis(const WalkBundlePtr& b, std::size_t seed, unsigned c, RngStream& rng,
                                        const AmplifyOptions& opts) {
    AmplificationReport rep = try_unsearch_from_basis(b, seed, c, rng, opts);
    if (!rep.succeeded) throw ExhaustedRetries("unsearch from seed " + std::to_string(seed) + " failed");
    return rep;
}

AmplificationReport try_prepare_from_uniform(const WalkBundlePtr& b, unsigned c, RngStream& rng,
                                             const AmplifyOptions& opts) {
    const std::size_t n = b->n();
    const std::uint64_t cap = opts.max_iterations ? opts.max_iterations : default_cap(n);
    const PiReflector reflect = reflector_for(b, c, cap, opts);
    const PhaseDetectionConfig meas = closing_measurement(*b, c, 1.0 / static_cast<double>(n), opts);

    Amplitudes root = Amplitudes::Zero(static_cast<Eigen::Index>(n * n));
    for (std::size_t i = 0; i < n; ++i) root(static_cast<Eigen::Index>(i * n)) = 1.0 / std::sqrt(static_cast<double>(n));
    Amplitudes u;
    b->diffusion().apply_u(root, u);

    return drive(c, cap, rng, opts, [&](std::uint64_t j, AmplificationReport& r) {
        charge_wall_step();
        StateVector psi = coherent_encoding(Distribution::uniform(n), b->diffusion());
        for (std::uint64_t it = 0; it < j; ++it) {
            const StateVector rp = reflect(psi, rng);
            // -R_u R_pi; R_u = U_P (2|u0><u0| - 1) U_P^dagger.
            charge_diffusion_calls(2);
            psi = StateVector::normalized(n, rp.amplitudes() - 2.0 * u.dot(rp.amplitudes()) * u);
        }
        charge_amplification_iterations(j);
        ProjectionResult pr = pi_projective_measurement(*b, psi, meas, rng);
        if (!pr.success) return false;
        r.output_state = std::move(pr.state);
        return true;
    });
}

AmplificationReport prepare_from_uniform_amplified(const WalkBundlePtr& b, unsigned c, RngStream& rng,
                                                   const AmplifyOptions& opts) {
    AmplificationReport rep = try_prepare_from_uniform(b, c, rng, opts);
    if (!rep.succeeded) throw ExhaustedRetries("amplification from the uniform state failed");
    return rep;
}

}  // namespace szmix
