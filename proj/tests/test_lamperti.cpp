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
#include <vector>

#include "epifront/epidemic.hpp"
#include "epifront/lamperti.hpp"
#include "epifront/rng.hpp"
#include "oracles.hpp"

using namespace epifront;

namespace {

CoefficientSet with_diffusion(Diffusion d, Drift b = ConstantDrift{0.0}) {
    CoefficientSet c;
    c.drift = b;
    c.diffusion = d;
    c.rate = AffineRate{5.0, 20.0};
    return c;
}

// Environment from a tagged artificial run of a small epidemic.
TransformContext moving_context(const CoefficientSet& coefficients) {
    RunConfig c;
    c.model.kernel = KernelSpec{TaperedUniformKernel{0.05}, 0.5};
    c.model.coefficients = coefficients;
    c.model.initial = InitialLaw{PointLaw{0.3}, 0.0};
    c.model.alpha = 0.5;
    c.n = 64;
    c.dt = 1e-3;
    c.seed = 5;
    c.mode = ArtificialMode{0};
    return TransformContext::from_trace(run(c), coefficients);
}

// bbar(t, y) from its definition, with Simpson for the integral and central
// differences for the sigma derivatives.
double level_drift_oracle(const TransformContext& ctx, double t, double y) {
    const auto& c = ctx.coefficients;
    const double a = ctx.boundary_at(t);
    const auto dsig_dt = [&](double x) {
        return oracle::derivative([&](double s) { return c.sigma(s, x + a); }, t, 1e-5);
    };
    const double integral = oracle::simpson(
        [&](double x) {
            const double s = c.sigma(t, x + a);
            return dsig_dt(x) / (s * s);
        },
        0.0, y, 1e-12);
    const double s = c.sigma(t, y + a);
    const double dsig_dx = oracle::derivative([&](double x) { return c.sigma(t, x); }, y + a, 1e-5);
    return -integral + c.drift_at(t, y + a) / s - 0.5 * dsig_dx;
}

}  // namespace

TEST_CASE("constant diffusion gives a linear change of variables") {
    const auto ctx = TransformContext::flat(with_diffusion(ConstantDiffusion{2.0}), 0.0, 1.0, 1e-3);
    CHECK(upsilon(ctx, 0.3, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(upsilon_inverse(ctx, 0.3, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(upsilon(ctx, 0.3, 0.0) == 0.0);
}

TEST_CASE("time-modulated diffusion divides by the current amplitude") {
    const auto ctx =
        TransformContext::flat(with_diffusion(TimeModulatedDiffusion{1.0, 0.5, 2.0}), 0.0, 2.0, 1e-3);
    const double t = 0.7;
    const double sigma = 1.0 + 0.5 * std::sin(2.0 * t);
    CHECK(upsilon(ctx, t, 1.3) == doctest::Approx(1.3 / sigma).epsilon(1e-14));
}

TEST_CASE("space-modulated upsilon matches Simpson quadrature") {
    const auto coeffs = with_diffusion(SpaceModulatedDiffusion{1.0, 0.4, 0.5, 0.3});
    const auto ctx = TransformContext::flat(coeffs, 0.2, 1.0, 1e-3);
    for (double y : {0.01, 0.3, 0.8, 2.0, 5.0}) {
        const double quad =
            oracle::simpson([&](double x) { return 1.0 / coeffs.sigma(0.4, x + 0.2); }, 0.0, y, 1e-14);
        CHECK(std::abs(upsilon(ctx, 0.4, y) - quad) < 1e-10);
    }
}

TEST_CASE("upsilon_inverse undoes upsilon") {
    const auto ctx = moving_context(with_diffusion(SpaceModulatedDiffusion{1.0, 0.4, 0.5, 0.3}));
    NoiseStream s(12, 0, StreamKind::Auxiliary);
    for (int i = 0; i < 1000; ++i) {
        const double t = ctx.horizon() * s.uniform();
        const double y = 4.0 * s.uniform();
        const double z = upsilon(ctx, t, y);
        CHECK(std::abs(upsilon_inverse(ctx, t, z) - y) < 1e-9);
    }
}

TEST_CASE("transformed drift for constant diffusion") {
    SUBCASE("constant drift") {
        const auto ctx = TransformContext::flat(with_diffusion(ConstantDiffusion{2.0}, ConstantDrift{0.6}), 0.0,
                                                1.0, 1e-3);
        CHECK(transformed_drift(ctx, 0.5, 0.7) == doctest::Approx(0.3).epsilon(1e-14));
    }
    SUBCASE("mean-reverting drift in the moving frame") {
        const double c = 1.5;
        const auto ctx = moving_context(with_diffusion(ConstantDiffusion{c}, MeanRevertingDrift{2.0, 1.0}));
        for (double t : {0.0, 0.33, 0.9}) {
            for (double z : {0.0, 0.4, 2.0}) {
                const double a = ctx.boundary_at(t);
                CHECK(transformed_drift(ctx, t, z) == doctest::Approx(2.0 * (1.0 - (c * z + a)) / c).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("level drift matches its defining formula") {
    const std::vector<CoefficientSet> sets{
        with_diffusion(TimeModulatedDiffusion{1.0, 0.5, 3.0}, MeanRevertingDrift{1.0, 0.5}),
        with_diffusion(SpaceModulatedDiffusion{1.0, 0.4, 0.5, 0.3}, ConstantDrift{0.2})};
    for (const auto& coeffs : sets) {
        const auto ctx = moving_context(coeffs);
        for (double t : {0.1, 0.45, 0.8}) {
            for (double y : {0.0, 0.2, 1.0, 2.5}) {
                CAPTURE(t);
                CAPTURE(y);
                CHECK(std::abs(level_drift(ctx, t, y) - level_drift_oracle(ctx, t, y)) < 1e-7);
            }
        }
    }
}

TEST_CASE("transformed drift respects the linear growth bound") {
    const auto ctx = moving_context(with_diffusion(TimeModulatedDiffusion{1.0, 0.5, 3.0}, MeanRevertingDrift{1.0, 0.5}));
    const double bound = growth_constant(ctx);
    CHECK(std::isfinite(bound));
    for (double t = 0.0; t <= 1.0; t += 0.05) {
        for (double z : {0.0, 0.1, 1.0, 5.0, 50.0}) {
            CHECK(std::abs(transformed_drift(ctx, t, z)) <= bound * (1.0 + z) + 1e-12);
        }
    }
}

TEST_CASE("zero infection rate never kills the transformed particle") {
    CoefficientSet coeffs = with_diffusion(ConstantDiffusion{1.0});
    coeffs.rate = ConstantRate{0.0};
    const auto ctx = TransformContext::flat(coeffs, 0.0, 1.0, 1e-3);
    NoiseStream noise(3, 0);
    const auto path = simulate_Z(ctx, 1.0, 1e-3, 0.0, noise, 1e-6);
    CHECK(std::isinf(path.killing_time));
    CHECK(path.hazard == 0.0);
    for (double z : path.positions) {
        CHECK(z >= 0.0);
    }
}

TEST_CASE("transformed Brownian motion has mean boundary local time sqrt(2 / pi)") {
    const auto ctx = TransformContext::flat(with_diffusion(ConstantDiffusion{1.0}), 0.0, 1.0, 1e-3);
    const int paths = 2000;
    double sum = 0.0;
    for (int p = 0; p < paths; ++p) {
        NoiseStream noise(derive_seed(44, static_cast<std::uint64_t>(p)), 0);
        const auto path = simulate_Z(ctx, 1.0, 1e-3, 0.0, noise);
        sum += path.local_time.back();
    }
    // The Euler regulator underestimates by about 0.58 sqrt(dt); allow for that and for noise.
    CHECK(std::abs(sum / paths - std::sqrt(2.0 / M_PI)) < 0.06);
}

TEST_CASE("with constant diffusion Z is the rescaled particle path by path") {
    const double c = 1.7;
    const auto coeffs = with_diffusion(ConstantDiffusion{c});
    SUBCASE("flat boundary") {
        const auto ctx = TransformContext::flat(coeffs, 0.1, 1.0, 1e-3);
        NoiseStream nx(9, 0);
        NoiseStream nz(9, 0);
        const auto x = simulate_frozen_particle(ctx, 1.0, 1e-3, 0.6, nx);
        const auto z = simulate_Z(ctx, 1.0, 1e-3, upsilon(ctx, 0.0, 0.5), nz);
        REQUIRE(x.positions.size() == z.positions.size());
        for (std::size_t k = 0; k < x.positions.size(); ++k) {
            CHECK(std::abs(z.positions[k] - (x.positions[k] - 0.1) / c) < 1e-12);
            CHECK(std::abs(z.local_time[k] - x.local_time[k] / c) < 1e-12);
        }
    }
    SUBCASE("moving boundary") {
        const auto ctx = moving_context(coeffs);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            CHECK(pathwise_lamperti_gap(ctx, 0.3, 1e-3, seed) < 1e-12);
        }
    }
}

TEST_CASE("local-time rescaling") {
    const std::vector<double> eps{0.05};
    SUBCASE("exact for constant diffusion") {
        const auto ctx = moving_context(with_diffusion(ConstantDiffusion{1.3}));
        const std::vector<double> dts{1e-3};
        const auto report = local_time_rescaling_check(ctx, 0.3, 100, dts, eps, 1);
        REQUIRE(report.rows.size() == 1);
        CHECK(report.rows[0].paths_with_contact > 0);
        CHECK(report.rows[0].mean_relative_error < 1e-10);
    }
    SUBCASE("error shrinks with the step for time-modulated diffusion") {
        const auto ctx = moving_context(with_diffusion(TimeModulatedDiffusion{1.0, 0.5, 2.0 * M_PI}));
        const std::vector<double> dts{1e-2, 1e-3, 1e-4};
        const auto report = local_time_rescaling_check(ctx, 0.3, 200, dts, eps, 2);
        CHECK(report.decreasing);
        CHECK(report.rows.back().mean_relative_error < 0.01);
    }
    SUBCASE("no contact means no error") {
        const auto ctx = moving_context(with_diffusion(ConstantDiffusion{1.0}));
        const std::vector<double> dts{1e-3};
        const auto report = local_time_rescaling_check(ctx, 100.0, 20, dts, eps, 3);
        CHECK(report.rows[0].paths_with_contact == 0);
        CHECK(report.rows[0].mean_relative_error == 0.0);
    }
}

TEST_CASE("particle and transformed laws agree at fixed times") {
    const auto ctx = moving_context(with_diffusion(TimeModulatedDiffusion{1.0, 0.5, 2.0 * M_PI}));
    const std::vector<double> times{0.5, 1.0};
    const auto report = lamperti_law_check(ctx, 0.3, 2000, 1e-3, times, 17);
    CHECK(report.consistent);
    for (const auto& probe : report.probes) {
        CHECK(probe.particle_survivors > 0);
        CHECK(probe.z_survivors > 0);
    }
}
