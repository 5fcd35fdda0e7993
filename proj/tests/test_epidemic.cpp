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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "epifront/epidemic.hpp"
#include "epifront/invariants.hpp"
#include "epifront/parallel.hpp"
#include "epifront/rng.hpp"
#include "epifront/sde.hpp"
#include "oracles.hpp"

using namespace epifront;

namespace {

RunConfig base_config(std::size_t n, std::uint64_t seed) {
    RunConfig c;
    c.model.kernel = KernelSpec{TaperedUniformKernel{0.05}, 0.5};
    c.model.coefficients.diffusion = ConstantDiffusion{1.0};
    c.model.coefficients.rate = AffineRate{5.0, 20.0};
    c.model.initial = InitialLaw{PointLaw{0.3}, 0.0};
    c.model.alpha = 0.5;
    c.n = n;
    c.horizon = 1.0;
    c.dt = 1e-3;
    c.seed = seed;
    return c;
}

// I_s as a step function of the infection list.
double infected_fraction(const std::vector<double>& taus, std::size_t n, double s) {
    double count = 0.0;
    for (double tau : taus) {
        if (tau <= s) {
            count += 1.0;
        }
    }
    return count / static_cast<double>(n);
}

// C_t = int_{t - dbar}^t rho(t - s) (I_s - I_{s - dbar}) ds, integrated piecewise
// between the jump times of the integrand.
double contagion_by_quadrature(const KernelSpec& kernel, const std::vector<double>& taus, std::size_t n,
                               double t) {
    const double lo = t - kernel.dbar;
    std::vector<double> cuts{lo, t};
    for (double tau : taus) {
        for (double c : {tau, tau + kernel.dbar}) {
            if (c > lo && c < t) {
                cuts.push_back(c);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        // Sample strictly inside each piece so the step function is evaluated on one side.
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (b - a < 1e-15) {
            continue;
        }
        const double ia = infected_fraction(taus, n, 0.5 * (a + b));
        const double ib = infected_fraction(taus, n, 0.5 * (a + b) - kernel.dbar);
        total += (ia - ib) * oracle::simpson([&](double s) { return kernel_density(kernel, t - s); }, a, b, 1e-13);
    }
    return total;
}

}  // namespace

TEST_CASE("front level from two infections under a uniform kernel") {
    FrontState front(KernelSpec{UniformKernel{}, 2.0}, 0.1, 0.8, 4);
    front.add_infection(0.0);
    front.add_infection(0.5);
    // P(1) = 0.5 and P(0.5) = 0.25 for the uniform density on [0, 2].
    CHECK(front.level(1.0) == doctest::Approx(0.1 + 0.8 / 4.0 * (0.5 + 0.25)).epsilon(1e-14));
    CHECK(front_level(front, 1.0) == doctest::Approx(0.1 + 0.8 / 4.0 * (0.5 + 0.25)).epsilon(1e-14));
    CHECK(front.level(0.25) == doctest::Approx(0.1 + 0.2 * 0.125).epsilon(1e-14));
    CHECK(front.level(10.0) == doctest::Approx(0.1 + 0.8 / 4.0 * 2.0).epsilon(1e-14));
}

TEST_CASE("contagiousness rises then decays back to zero") {
    FrontState front(KernelSpec{UniformKernel{}, 2.0}, 0.0, 1.0, 4);
    front.add_infection(0.0);
    front.add_infection(0.5);
    CHECK(front.contagiousness(1.0) == doctest::Approx(0.75 / 4.0).epsilon(1e-14));
    // At t = 3: first infection contributes P(3) - P(1) = 0.5, second P(2.5) - P(0.5) = 0.75.
    CHECK(front.contagiousness(3.0) == doctest::Approx(1.25 / 4.0).epsilon(1e-14));
    CHECK(contagiousness(front, 3.0) == doctest::Approx(1.25 / 4.0).epsilon(1e-14));
    CHECK(front.contagiousness(4.5) == 0.0);
}

TEST_CASE("closed-form contagiousness matches the convolution integral") {
    const std::vector<KernelSpec> kernels{KernelSpec{UniformKernel{}, 1.0},
                                          KernelSpec{TruncatedWeibullKernel{2.0, 0.5}, 1.0},
                                          KernelSpec{TaperedUniformKernel{0.1}, 1.0}};
    const std::vector<double> taus{0.05, 0.3, 0.3, 0.9, 1.4, 2.2};
    for (const auto& kernel : kernels) {
        FrontState front(kernel, 0.0, 1.0, 8);
        for (double tau : taus) {
            front.add_infection(tau);
        }
        for (double t : {0.2, 0.7, 1.1, 1.5, 2.0, 2.5, 3.1, 4.0}) {
            CAPTURE(t);
            const double quad = contagion_by_quadrature(kernel, taus, 8, t);
            CHECK(std::abs(front.contagiousness(t) - quad) < 1e-10);
        }
    }
}

TEST_CASE("retiring settled infections leaves level and contagiousness bit-identical") {
    const KernelSpec kernel{TruncatedWeibullKernel{2.0, 0.3}, 0.5};
    FrontState retired(kernel, 0.0, 0.7, 50);
    FrontState full(kernel, 0.0, 0.7, 50);
    NoiseStream s(5, 0, StreamKind::Auxiliary);
    double t = 0.0;
    for (int k = 0; k < 400; ++k) {
        t += 0.01;
        if (s.uniform() < 0.2) {
            retired.add_infection(t);
            full.add_infection(t);
        }
        retired.retire(t);
        CHECK(retired.level(t) == full.level(t));
        CHECK(retired.contagiousness(t) == full.contagiousness(t));
    }
}

TEST_CASE("with zero infection rate the system is pure reflected dynamics") {
    RunConfig c = base_config(16, 3);
    c.model.coefficients.rate = ConstantRate{0.0};
    c.record_particles = true;
    const auto trace = run(c);
    CHECK(trace.infections.empty());
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        CHECK(trace.front[k] == 0.0);
        CHECK(trace.infected[k] == 0.0);
        CHECK(trace.compensator[k] == 0.0);
    }
    // Each particle follows its own reflected Euler recursion from its Brownian stream.
    for (std::size_t i = 0; i < c.n; ++i) {
        NoiseStream noise(c.seed, i, StreamKind::Brownian);
        double x = trace.initial_positions[i];
        for (std::size_t k = 0; k < trace.steps(); ++k) {
            const auto r = reflected_euler_step(x, trace.times[k], c.dt, 0.0, c.model.coefficients, noise.normal());
            x = r.position;
            CHECK(trace.position(k + 1, i) == x);
            CHECK(trace.local_time_increment(k, i) == r.local_time);
        }
    }
}

TEST_CASE("particles that start far above the front never touch it") {
    RunConfig c = base_config(8, 4);
    c.model.initial = InitialLaw{PointLaw{50.0}, 0.0};
    c.record_particles = true;
    const auto trace = run(c);
    CHECK(trace.infections.empty());
    for (double dl : trace.local_time_increments) {
        CHECK(dl == 0.0);
    }
}

TEST_CASE("single particle infection probability equals the mean of 1 - exp(-g l)") {
    // With n = 1 the front cannot move before the only infection, so the
    // tagged artificial run gives the local time the clock is compared against.
    const double g = 1.5;
    const int seeds = 10000;
    double hits = 0.0;
    double expected = 0.0;
    for (int s = 0; s < seeds; ++s) {
        RunConfig c = base_config(1, derive_seed(99, static_cast<std::uint64_t>(s)));
        c.model.coefficients.rate = ConstantRate{g};
        c.model.initial = InitialLaw{PointLaw{0.1}, 0.0};
        const auto real = run(c);
        hits += real.infections.empty() ? 0.0 : 1.0;

        RunConfig a = base_config(1, derive_seed(7, static_cast<std::uint64_t>(s)));
        a.model.coefficients.rate = ConstantRate{g};
        a.model.initial = InitialLaw{PointLaw{0.1}, 0.0};
        a.mode = ArtificialMode{0};
        a.record_particles = true;
        const auto art = run(a);
        double ell = 0.0;
        for (double dl : art.local_time_increments) {
            ell += dl;
        }
        expected += 1.0 - std::exp(-g * ell);
    }
    const double p = hits / seeds;
    const double q = expected / seeds;
    // Binomial standard error of the hit rate dominates.
    CHECK(std::abs(p - q) < 4.0 * std::sqrt(p * (1.0 - p) / seeds) + 1e-3);
}

TEST_CASE("tagged artificial runs agree with the true system before the tagged infection") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RunConfig c = base_config(12, derive_seed(31, seed));
        c.record_particles = true;
        const auto truth = run(c);
        for (std::size_t i = 0; i < c.n; ++i) {
            RunConfig a = c;
            a.mode = ArtificialMode{i};
            const auto art = run(a);
            const double tau_i = truth.tau_of(i);
            for (std::size_t k = 0; k < truth.times.size() && truth.times[k] < tau_i; ++k) {
                CHECK(art.front[k] == truth.front[k]);
                for (std::size_t j = 0; j < c.n; ++j) {
                    if (j == i) {
                        continue;
                    }
                    const double x = truth.position(k, j);
                    const double y = art.position(k, j);
                    CHECK(((std::isnan(x) && std::isnan(y)) || x == y));
                }
            }
            for (const auto& e : truth.infections) {
                if (e.tau < tau_i) {
                    CHECK(art.tau_of(e.particle) == e.tau);
                }
            }
            CHECK(std::isinf(art.tau_of(i)));
        }
    }
}

TEST_CASE("globally reflected runs share infection times with the true system") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RunConfig c = base_config(24, derive_seed(32, seed));
        const auto truth = run(c);
        RunConfig g = c;
        g.mode = GloballyReflectedMode{};
        const auto glob = run(g);
        REQUIRE(glob.infections.size() == truth.infections.size());
        for (std::size_t e = 0; e < truth.infections.size(); ++e) {
            CHECK(glob.infections[e].particle == truth.infections[e].particle);
            CHECK(glob.infections[e].tau == truth.infections[e].tau);
        }
        CHECK(glob.front == truth.front);
    }
}

TEST_CASE("results do not depend on the number of worker threads") {
    RunConfig c = base_config(200, 17);
    c.record_particles = true;
    const auto serial = run(c);
    for (std::size_t threads : {2u, 4u}) {
        ThreadPool pool(threads);
        const auto parallel = run(c, &pool);
        CHECK(parallel.front == serial.front);
        CHECK(parallel.infected == serial.infected);
        CHECK(parallel.compensator == serial.compensator);
        CHECK(parallel.local_time_increments == serial.local_time_increments);
        REQUIRE(parallel.positions.size() == serial.positions.size());
        for (std::size_t k = 0; k < serial.positions.size(); ++k) {
            const double x = serial.positions[k];
            const double y = parallel.positions[k];
            CHECK(((std::isnan(x) && std::isnan(y)) || x == y));
        }
    }
}

TEST_CASE("invalid run configurations raise ConfigError") {
    const RunConfig good = base_config(4, 1);
    CHECK_NOTHROW(validate_run_config(good));

    RunConfig c = good;
    c.n = 0;
    CHECK_THROWS_AS(validate_run_config(c), ConfigError);
    c = good;
    c.dt = 0.0;
    CHECK_THROWS_AS(validate_run_config(c), ConfigError);
    c = good;
    c.horizon = -1.0;
    CHECK_THROWS_AS(validate_run_config(c), ConfigError);
    c = good;
    c.model.alpha = -0.1;
    CHECK_THROWS_AS(validate_run_config(c), ConfigError);
    c = good;
    c.mode = ArtificialMode{4};
    CHECK_THROWS_AS(validate_run_config(c), ConfigError);
    c = good;
    c.model.coefficients.diffusion = ConstantDiffusion{0.0};
    CHECK_THROWS_AS(validate_run_config(c), ConfigError);
    c = good;
    c.mode = BarnesBarMode{1.0};
    c.model.coefficients.diffusion = ConstantDiffusion{2.0};
    CHECK_THROWS_AS(validate_run_config(c), ConfigError);
    c = good;
    c.mode = BarnesTildeMode{1.0, 1.0};
    CHECK_THROWS_AS(run(c), ConfigError);
    CHECK_THROWS_AS(run_barnes(good), ConfigError);
}

TEST_CASE("barrier with zero initial velocity and zero rate stays at rest") {
    RunConfig c = base_config(10, 2);
    c.model.coefficients.rate = ConstantRate{0.0};
    c.mode = BarnesBarMode{0.0};
    const auto trace = run_barnes(c);
    for (double y : trace.front) {
        CHECK(y == 0.0);
    }
}

TEST_CASE("barrier moves at constant speed when nothing is ever infected") {
    RunConfig c = base_config(10, 2);
    c.model.coefficients.rate = ConstantRate{0.0};
    c.model.initial = InitialLaw{PointLaw{100.0}, 0.0};
    c.mode = BarnesTildeMode{0.7, 1.0};
    const auto trace = run_barnes(c);
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        CHECK(std::abs(trace.front[k] - 0.7 * trace.times[k]) < 1e-12);
        CHECK(trace.contagion[k] == 0.7);
    }
}

TEST_CASE("invariant checks pass on real runs and catch a tampered trace") {
    RunConfig c = base_config(64, 8);
    c.record_particles = true;
    const auto trace = run(c);
    {
        InvariantReport report;
        check_trace_invariants(c, trace, 50, 1, report);
        for (const auto& check : report.checks) {
            CAPTURE(check.name);
            CAPTURE(check.detail);
            CHECK(check.passed);
        }
    }
    {
        auto bad = trace;
        bad.front[bad.front.size() / 2] -= 1e-3;
        InvariantReport report;
        check_trace_invariants(c, bad, 10, 1, report);
        REQUIRE(report.find("front_monotone") != nullptr);
        CHECK_FALSE(report.find("front_monotone")->passed);
    }
    {
        auto bad = trace;
        for (auto& v : bad.compensator) {
            v *= 2.0;
        }
        InvariantReport report;
        check_trace_invariants(c, bad, 10, 1, report);
        CHECK_FALSE(report.find("compensator")->passed);
        CHECK_FALSE(report.ok());
    }
}
