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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "epifront/analysis.hpp"
#include "epifront/rng.hpp"
#include "epifront/stats.hpp"

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

RunConfig silent_config(std::size_t n, std::uint64_t seed) {
    RunConfig c = base_config(n, seed);
    c.model.coefficients.rate = ConstantRate{0.0};
    return c;
}

}  // namespace

TEST_CASE("Kolmogorov survival function at one") {
    // Q(1) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2), summed by hand to double precision.
    double q = 0.0;
    for (int k = 1; k <= 20; ++k) {
        q += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k);
    }
    CHECK(stats::kolmogorov_q(1.0) == doctest::Approx(q).epsilon(1e-12));
    CHECK(stats::kolmogorov_q(1.0) == doctest::Approx(0.27).epsilon(1e-3));
}

TEST_CASE("least squares recovers an exact line") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> y;
    for (double v : x) {
        y.push_back(0.25 - 1.5 * v);
    }
    const auto fit = stats::linear_fit(x, y);
    CHECK(fit.defined);
    CHECK(fit.slope == doctest::Approx(-1.5).epsilon(1e-13));
    CHECK(fit.intercept == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(std::abs(fit.slope_se) < 1e-12);

    const std::vector<double> flat{2.0, 2.0, 2.0};
    CHECK_FALSE(stats::linear_fit(flat, flat).defined);
}

TEST_CASE("two-sample KS accepts a sample against itself and rejects a shift") {
    NoiseStream s(8, 0);
    std::vector<double> a(2000);
    std::vector<double> b(2000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = s.normal();
        b[i] = s.normal() + 0.5;
    }
    CHECK(stats::ks_two_sample(a, a).statistic == 0.0);
    CHECK(stats::ks_two_sample(a, b).p_value < 1e-6);
}

TEST_CASE("compute_V on a hand-built two-particle table") {
    SystemTrace trace;
    trace.n = 2;
    trace.dt = 0.5;
    trace.times = {0.0, 0.5, 1.0, 1.5};
    trace.contagion = {0.0, 0.1, 0.3, 0.2};
    trace.front = {0.0, 0.0, 0.0, 0.0};
    // Particle 1 is infected at t = 1.0 (end of step 1).
    trace.infections = {InfectionEvent{1, 1.0, 2}};
    trace.local_time_increments = {0.2, 0.1,   // step 0
                                   0.0, 0.4,   // step 1
                                   0.3, 0.7};  // step 2
    CoefficientSet coeffs;
    coeffs.rate = AffineRate{2.0, 10.0};

    const double l[3][2] = {{0.2, 0.1}, {0.0, 0.4}, {0.3, 0.7}};
    const double tau[2] = {INFINITY, 1.0};
    for (auto form : {CompensatorForm::Linear, CompensatorForm::Exponential}) {
        std::vector<double> expected(4, 0.0);
        for (int k = 1; k <= 3; ++k) {
            double sum = 0.0;
            for (int m = 0; m < k; ++m) {
                const double g = 2.0 + 10.0 * trace.contagion[static_cast<std::size_t>(m)];
                for (int i = 0; i < 2; ++i) {
                    if (trace.times[static_cast<std::size_t>(m)] < tau[i]) {
                        const double dh = g * l[m][i];
                        sum += form == CompensatorForm::Linear ? dh : 1.0 - std::exp(-dh);
                    }
                }
            }
            expected[static_cast<std::size_t>(k)] = sum / 2.0;
        }
        const auto v = compute_V(trace, coeffs, form);
        REQUIRE(v.size() == 4);
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(v[k] == doctest::Approx(expected[k]).epsilon(1e-14));
        }
    }
    const auto h = cumulative_hazard(trace, coeffs, 1);
    CHECK(h[3] == doctest::Approx(2.0 * 0.1 + 3.0 * 0.4 + 5.0 * 0.7).epsilon(1e-14));

    SystemTrace bare = trace;
    bare.local_time_increments.clear();
    CHECK_THROWS_AS(compute_V(bare, coeffs), std::invalid_argument);
}

TEST_CASE("the engine's compensator equals compute_V of its own trace") {
    RunConfig c = base_config(32, 5);
    c.record_particles = true;
    const auto trace = run(c);
    const auto v = compute_V(trace, c.model.coefficients);
    REQUIRE(v.size() == trace.compensator.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        CHECK(v[k] == doctest::Approx(trace.compensator[k]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("grid_index maps horizon times and rejects others") {
    const RunConfig c = base_config(4, 1);
    CHECK(grid_index(c, 0.0) == 0);
    CHECK(grid_index(c, 0.5) == 500);
    CHECK(grid_index(c, 1.0) == 1000);
    CHECK_THROWS_AS(grid_index(c, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(grid_index(c, -0.1), std::invalid_argument);
}

TEST_CASE("with zero infection rate every diagnostic is trivially null") {
    const RunConfig c = silent_config(16, 2);

    const std::vector<ProbePair> probes{{0.25, 0.5}, {0.5, 1.0}};
    const auto mart = martingale_test(c, 30, probes);
    CHECK(mart.consistent);
    for (const auto& p : mart.probes) {
        CHECK(p.mean_increment == 0.0);
    }

    const std::vector<std::size_t> sizes{8, 16};
    const auto decay = l2_decay(c, sizes, 10);
    CHECK(decay.degenerate);

    const std::vector<double> dts{2e-3, 1e-3};
    const auto ties = tie_stats(c, dts, 5);
    for (const auto& row : ties.rows) {
        CHECK(row.tie_steps == 0);
        CHECK(row.fraction == 0.0);
    }

    RunConfig small = silent_config(4, 2);
    const std::vector<double> times{0.5, 1.0};
    const auto law = tau_law_check(small, 0, 50, times);
    CHECK(law.consistent);
    CHECK(law.max_discrepancy == 0.0);

    const auto r = effective_R(c, 0.5, 20, 3);
    CHECK(r.value == 0.0);
}

TEST_CASE("a single particle can never produce a tie") {
    const RunConfig c = base_config(1, 4);
    const std::vector<double> dts{4e-3, 1e-3};
    const auto ties = tie_stats(c, dts, 20);
    for (const auto& row : ties.rows) {
        CHECK(row.tie_steps == 0);
    }
}

TEST_CASE("tie fraction shrinks as the step is refined") {
    const RunConfig c = base_config(128, 6);
    const std::vector<double> dts{4e-3, 2e-3, 1e-3};
    const auto ties = tie_stats(c, dts, 10);
    CHECK(ties.decreasing);
    CHECK(ties.rows.front().fraction > 0.0);
}

TEST_CASE("martingale standard error shrinks like one over root R") {
    const RunConfig c = base_config(64, 11);
    const std::vector<ProbePair> probes{{0.25, 1.0}};
    const auto small = martingale_test(c, 100, probes);
    const auto large = martingale_test(c, 200, probes);
    const double ratio = large.probes[0].standard_error / small.probes[0].standard_error;
    // 1/sqrt(2) ~ 0.707 in expectation; the band absorbs sampling noise in the SE itself.
    CHECK(ratio > 0.55);
    CHECK(ratio < 0.90);
}

TEST_CASE("decay bootstrap interval narrows when replications double") {
    const RunConfig c = base_config(32, 12);
    const std::vector<std::size_t> sizes{32, 64, 128};
    const auto a = l2_decay(c, sizes, 100);
    const auto b = l2_decay(c, sizes, 200);
    REQUIRE_FALSE(a.degenerate);
    REQUIRE_FALSE(b.degenerate);
    const double ratio = (b.ci_high - b.ci_low) / (a.ci_high - a.ci_low);
    CHECK(ratio > 0.4);
    CHECK(ratio < 1.0);
}

TEST_CASE("effective reproduction number is stable across seeds") {
    RunConfig a = base_config(64, 21);
    RunConfig b = base_config(64, 22);
    const auto ra = effective_R(a, 0.5, 1000, 1);
    const auto rb = effective_R(b, 0.5, 1000, 2);
    CHECK(ra.value > 0.0);
    CHECK(std::abs(ra.value - rb.value) < 0.1 * 0.5 * (ra.value + rb.value));
}

TEST_CASE("barrier variants converge as n grows") {
    RunConfig c = base_config(32, 41);
    c.mode = BarnesTildeMode{1.0, 1.0};
    const std::vector<std::size_t> sizes{32, 128, 512};
    const auto cmp = barnes_comparison(c, sizes, 20);
    CHECK(cmp.decreasing);
    CHECK(cmp.mean_sup_gap.back() < 0.5 * cmp.mean_sup_gap.front());
}

TEST_CASE("SIR with zero transmission keeps I fixed and decays C exponentially") {
    const double dbar = 15.0;
    const auto path = sir_integrate(0.0, dbar, 0.01, 0.02, 30.0, 0.01);
    for (const auto& s : path) {
        CHECK(s.infected == 0.01);
        const double expected = 0.02 * std::exp(-s.t / dbar);
        CHECK(std::abs(s.contagion - expected) <= 1e-9 * expected);
        CHECK(s.r0 == 0.0);
    }
}

TEST_CASE("SIR conservation, convergence and reproduction numbers") {
    const auto coarse = sir_integrate(0.3, 15.0, 0.01, 0.01, 100.0, 0.1);
    const auto fine = sir_integrate(0.3, 15.0, 0.01, 0.01, 100.0, 0.01);
    for (const auto& s : fine) {
        CHECK(s.susceptible + s.infected == 1.0);
        CHECK(s.r0 == doctest::Approx(0.3 * 15.0));
        CHECK(s.r_effective == doctest::Approx(0.3 * 15.0 * s.susceptible).epsilon(1e-14));
    }
    CHECK(std::abs(coarse.back().infected - fine.back().infected) < 1e-6);
    CHECK(std::abs(coarse.back().contagion - fine.back().contagion) < 1e-6);
    CHECK(fine.back().t == doctest::Approx(100.0));
    CHECK(fine.back().infected > 0.5);
}

TEST_CASE("SIR rejects invalid inputs") {
    CHECK_THROWS_AS(sir_integrate(-0.1, 15.0, 0.01, 0.01, 10.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(sir_integrate(0.3, 0.0, 0.01, 0.01, 10.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(sir_integrate(0.3, 15.0, 1.5, 0.01, 10.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(sir_integrate(0.3, 15.0, 0.01, 0.01, 10.0, 0.0), std::invalid_argument);
}
