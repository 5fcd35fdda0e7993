// Copyright 2026 The epifront Authors
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

#include "epifront/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "epifront/rng.hpp"

namespace epifront {

namespace {

InvariantCheck& entry(InvariantReport& report, const std::string& name) {
    for (auto& c : report.checks) {
        if (c.name == name) {
            return c;
        }
    }
    report.checks.push_back(InvariantCheck{name, true, 0, {}});
    return report.checks.back();
}

void violate(InvariantCheck& check, const std::string& what) {
    check.passed = false;
    if (check.violations++ == 0) {
        check.detail = what;
    }
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string at(const char* what, double t) {
    std::ostringstream os;
    os.precision(17);
    os << what << " at t=" << t;
    return os.str();
}

/// (1/n) int_0^dbar rho(u) [N(t - u) - N(t - u - dbar)] du with N the
/// infection counting function, integrated piecewise between its jumps.
double convolution_contagion(const KernelSpec& kernel, const std::vector<double>& taus, std::size_t n, double t) {
    const double dbar = kernel.dbar;
    std::vector<double> cuts{0.0, dbar};
    for (double tau : taus) {
        for (double u : {t - tau, t - tau - dbar}) {
            if (u > 0.0 && u < dbar) {
                cuts.push_back(u);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto counting = [&](double s) {
        return static_cast<double>(std::upper_bound(taus.begin(), taus.end(), s) - taus.begin());
    };
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k];
        const double hi = cuts[k + 1];
        // The counting difference is constant on the open piece; read it at the midpoint.
        const double mid = 0.5 * (lo + hi);
        const double weight = counting(t - mid) - counting(t - mid - dbar);
        if (weight == 0.0) {
            continue;
        }
        const double mass = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double u) { return kernel_density(kernel, u); }, lo, hi, 15, 1e-12);
        total += weight * mass;
    }
    return total / static_cast<double>(n);
}

}  // namespace

bool InvariantReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
}

const InvariantCheck* InvariantReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

void check_trace_invariants(const RunConfig& config, const SystemTrace& trace, std::size_t probes,
                            std::uint64_t probe_seed, InvariantReport& report) {
    const std::size_t n = trace.n;
    const std::size_t steps = trace.steps();
    const double a0 = config.model.a0();
    const double alpha = config.model.alpha;

    auto& front = entry(report, "front_monotone");
    if (trace.front.empty() || trace.front[0] != a0) {
        violate(front, "A(0) differs from a0");
    }
    for (std::size_t k = 0; k <= steps; ++k) {
        if (k > 0 && trace.front[k] < trace.front[k - 1]) {
            violate(front, at("A decreased", trace.times[k]));
        }
        const double cap = a0 + alpha * trace.infected[k];
        if (trace.front[k] > cap * (1.0 + 1e-14) + 1e-14 || cap > a0 + alpha * (1.0 + 1e-15)) {
            violate(front, at("A above a0 + alpha I", trace.times[k]));
        }
    }

    auto& above = entry(report, "susceptible_above");
    auto& complement = entry(report, "complementarity");
    if (!trace.has_particle_data()) {
        violate(above, "trace has no particle data");
        violate(complement, "trace has no particle data");
    } else {
        std::vector<double> tau(n);
        for (std::size_t j = 0; j < n; ++j) {
            tau[j] = trace.tau_of(j);
        }
        for (std::size_t k = 0; k <= steps; ++k) {
            const double t = trace.times[k];
            for (std::size_t j = 0; j < n; ++j) {
                const double x = trace.position(k, j);
                if (tau[j] > t && !(x >= trace.front[k])) {
                    violate(above, at("susceptible particle below A", t));
                }
                if (k == steps) {
                    continue;
                }
                const double dl = trace.local_time_increment(k, j);
                if (!(dl >= 0.0)) {
                    violate(complement, at("negative local-time increment", t));
                }
                const double x_next = trace.position(k + 1, j);
                if (dl > 0.0 && std::isfinite(x_next) && x_next != trace.front[k + 1]) {
                    violate(complement, at("local time charged away from the boundary", t));
                }
            }
        }
    }

    auto& jumps = entry(report, "infection_jumps");
    const auto per_step = trace.infections_per_step();
    std::size_t cumulative = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        cumulative += per_step[k];
        const double expected = static_cast<double>(cumulative) / static_cast<double>(n);
        if (std::abs(trace.infected[k + 1] - expected) > 1e-15) {
            violate(jumps, at("I differs from #infections / n", trace.times[k + 1]));
        }
    }
    if (trace.infected[0] != 0.0) {
        violate(jumps, "I(0) is not zero");
    }

    auto& comp = entry(report, "compensator");
    if (trace.compensator[0] != 0.0 || trace.martingale[0] != 0.0) {
        violate(comp, "V(0) or M(0) is not zero");
    }
    for (std::size_t k = 0; k <= steps; ++k) {
        if (k > 0 && trace.compensator[k] < trace.compensator[k - 1]) {
            violate(comp, at("V decreased", trace.times[k]));
        }
        if (trace.martingale[k] != trace.infected[k] - trace.compensator[k]) {
            violate(comp, at("M differs from I - V", trace.times[k]));
        }
    }

    auto& quad = entry(report, "contagion_quadrature");
    FrontState state(config.model.kernel, a0, alpha, n);
    std::vector<double> taus;
    for (const auto& ev : trace.infections) {
        state.add_infection(ev.tau);
        taus.push_back(ev.tau);
    }
    NoiseStream probe_stream(probe_seed, 0, StreamKind::Auxiliary);
    const double horizon = trace.times.back();
    double worst = 0.0;
    for (std::size_t p = 0; p < probes; ++p) {
        const double t = probe_stream.uniform() * horizon;
        const double closed = contagiousness(state, t);
        const double direct = convolution_contagion(config.model.kernel, taus, n, t);
        worst = std::max(worst, std::abs(closed - direct));
        if (std::abs(closed - direct) > 1e-6) {
            violate(quad, at("closed-form C differs from the convolution", t));
        }
    }
    for (std::size_t k = 0; k <= steps; ++k) {
        if (trace.contagion[k] != contagiousness(state, trace.times[k])) {
            violate(quad, at("traced C differs from the closed form", trace.times[k]));
            break;
        }
    }
    if (quad.passed) {
        std::ostringstream os;
        os << "max |closed - quadrature| = " << worst;
        quad.detail = os.str();
    }
}

void check_coupling(const RunConfig& config, std::span<const std::uint64_t> seeds, InvariantReport& report,
                    ThreadPool* pool) {
    auto& art = entry(report, "coupling_artificial");
    auto& glob = entry(report, "coupling_global");
    for (std::uint64_t seed : seeds) {
        RunConfig base = config;
        base.seed = seed;
        base.record_particles = true;
        base.mode = TrueMode{};
        const SystemTrace truth = run(base, pool);
        const std::size_t n = truth.n;
        const std::size_t grid = truth.times.size();

        for (std::size_t i = 0; i < n; ++i) {
            RunConfig other = base;
            other.mode = ArtificialMode{i};
            const SystemTrace shadow = run(other, pool);
            const double tau_i = truth.tau_of(i);
            for (std::size_t k = 0; k < grid && truth.times[k] < tau_i; ++k) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (j != i && !same(truth.position(k, j), shadow.position(k, j))) {
                        violate(art, at("paths diverge before tau_i", truth.times[k]));
                    }
                }
            }
            auto before = [&](const SystemTrace& tr) {
                std::vector<std::pair<std::size_t, double>> evs;
                for (const auto& ev : tr.infections) {
                    if (ev.particle != i && ev.tau < tau_i) {
                        evs.emplace_back(ev.particle, ev.tau);
                    }
                }
                return evs;
            };
            if (before(truth) != before(shadow)) {
                violate(art, at("infections before tau_i differ", tau_i));
            }
        }

        RunConfig reflected = base;
        reflected.mode = GloballyReflectedMode{};
        const SystemTrace global = run(reflected, pool);
        if (global.infections.size() != truth.infections.size()) {
            violate(glob, "infection counts differ");
            continue;
        }
        for (std::size_t e = 0; e < truth.infections.size(); ++e) {
            if (global.infections[e].particle != truth.infections[e].particle ||
                global.infections[e].tau != truth.infections[e].tau) {
                violate(glob, at("infection times differ", truth.infections[e].tau));
            }
        }
        if (global.front != truth.front) {
            violate(glob, "fronts differ");
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double tau_j = truth.tau_of(j);
            for (std::size_t k = 0; k < grid && truth.times[k] < tau_j; ++k) {
                if (!same(truth.position(k, j), global.position(k, j))) {
                    violate(glob, at("path differs before its own tau", truth.times[k]));
                }
            }
        }
    }
}

InvariantReport invariant_suite(const RunConfig& config, std::size_t trace_seeds, std::size_t coupling_n,
                                std::size_t coupling_seeds, ThreadPool* pool) {
    InvariantReport report;
    for (std::size_t s = 0; s < trace_seeds; ++s) {
        RunConfig c = config;
        c.seed = derive_seed(config.seed, s);
        c.record_particles = true;
        const SystemTrace trace = run(c, pool);
        check_trace_invariants(c, trace, 100, derive_seed(c.seed, 0xC0), report);
    }
    RunConfig small = config;
    small.n = coupling_n;
    std::vector<std::uint64_t> seeds;
    for (std::size_t s = 0; s < coupling_seeds; ++s) {
        seeds.push_back(derive_seed(config.seed ^ 0xC0C0, s));
    }
    check_coupling(small, seeds, report, pool);
    return report;
}

}  // namespace epifront
