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

#pragma once

#include <string>
#include <variant>
#include <vector>

namespace epifront {

class NoiseStream;

// ---------------------------------------------------------------------------
// Infection-to-recovery kernel
// ---------------------------------------------------------------------------

struct UniformKernel {
    bool operator==(const UniformKernel&) const = default;
};

/// Weibull(shape, scale) density cut at dbar and renormalised by its CDF there.
struct TruncatedWeibullKernel {
    double shape = 2.0;
    double scale = 5.0;
    bool operator==(const TruncatedWeibullKernel&) const = default;
};

/// Uniform density with raised-cosine ramps of width `taper` at both ends.
struct TaperedUniformKernel {
    double taper = 0.05;
    bool operator==(const TaperedUniformKernel&) const = default;
};

using KernelFamily = std::variant<UniformKernel, TruncatedWeibullKernel, TaperedUniformKernel>;

struct KernelSpec {
    KernelFamily family = UniformKernel{};
    double dbar = 1.0;

    /// True when the density is absolutely continuous on the real line.
    bool smooth() const;

    bool operator==(const KernelSpec&) const = default;
};

/// rho(u); zero outside [0, dbar].
double kernel_density(const KernelSpec& kernel, double u);

/// P(u) = integral of rho over [0, min(u, dbar)]; 0 for u <= 0, exactly 1 for u >= dbar.
double kernel_cdf(const KernelSpec& kernel, double u);

// ---------------------------------------------------------------------------
// Drift, diffusion and infection-rate catalogs
// ---------------------------------------------------------------------------

struct ConstantDrift {
    double mu = 0.0;
    bool operator==(const ConstantDrift&) const = default;
};

/// b(t, x) = theta (m - x)
struct MeanRevertingDrift {
    double theta = 0.0;
    double m = 0.0;
    bool operator==(const MeanRevertingDrift&) const = default;
};

using Drift = std::variant<ConstantDrift, MeanRevertingDrift>;

struct ConstantDiffusion {
    double c = 1.0;
    bool operator==(const ConstantDiffusion&) const = default;
};

/// sigma(t, x) = c0 (1 + a sin(omega t))
struct TimeModulatedDiffusion {
    double c0 = 1.0;
    double amplitude = 0.0;
    double frequency = 0.0;
    bool operator==(const TimeModulatedDiffusion&) const = default;
};

/// sigma(t, x) = c0 (1 + a tanh((x - x0) / w))
struct SpaceModulatedDiffusion {
    double c0 = 1.0;
    double amplitude = 0.0;
    double center = 0.0;
    double width = 1.0;
    bool operator==(const SpaceModulatedDiffusion&) const = default;
};

using Diffusion = std::variant<ConstantDiffusion, TimeModulatedDiffusion, SpaceModulatedDiffusion>;

struct ConstantRate {
    double g = 0.0;
    bool operator==(const ConstantRate&) const = default;
};

/// gamma(t, c) = g0 + g1 c
struct AffineRate {
    double g0 = 0.0;
    double g1 = 0.0;
    bool operator==(const AffineRate&) const = default;
};

using Rate = std::variant<ConstantRate, AffineRate>;

/// Drift b, diffusion sigma and effective infection rate gamma, together with
/// the catalog-derived bounds the structural checks rely on.
struct CoefficientSet {
    Drift drift = ConstantDrift{};
    Diffusion diffusion = ConstantDiffusion{};
    Rate rate = ConstantRate{};

    double drift_at(double t, double x) const;
    double sigma(double t, double x) const;
    double dsigma_dt(double t, double x) const;
    double dsigma_dx(double t, double x) const;
    /// gamma(t, c). Negative affine values (only reachable through a negative
    /// argument, e.g. a barrier velocity) are clamped to zero.
    double rate_at(double t, double c) const;

    double sigma_min() const;
    double sigma_max() const;
    double drift_lipschitz() const;
    /// sup |d sigma / dx| and sup |d sigma / dt| over the catalog member.
    double dsigma_dx_bound() const;
    double dsigma_dt_bound() const;
    bool sigma_space_independent() const;
    bool sigma_time_independent() const;
    /// sup over t and x in [lo, hi] of |b(t, x)|.
    double drift_bound_on(double lo, double hi) const;
    bool rate_identically_zero() const;

    bool operator==(const CoefficientSet&) const = default;
};

// ---------------------------------------------------------------------------
// Initial law
// ---------------------------------------------------------------------------

struct PointLaw {
    double x0 = 1.0;
    bool operator==(const PointLaw&) const = default;
};

/// Gaussian(mean, stdev) conditioned on (a0, infinity).
struct TruncatedGaussianLaw {
    double mean = 1.0;
    double stdev = 1.0;
    bool operator==(const TruncatedGaussianLaw&) const = default;
};

using InitialFamily = std::variant<PointLaw, TruncatedGaussianLaw>;

struct InitialLaw {
    InitialFamily family = PointLaw{};
    double a0 = 0.0;

    bool operator==(const InitialLaw&) const = default;
};

/// One draw from the initial law; always strictly above a0.
double sample_initial(const InitialLaw& law, NoiseStream& stream);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class CheckStatus { Pass, Warn, Fail };

const char* to_string(CheckStatus status);

struct ValidationEntry {
    std::string condition;
    CheckStatus status = CheckStatus::Pass;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;
    bool lamperti_eligible = false;

    /// No entry failed (warnings allowed).
    bool ok() const;
    const ValidationEntry* find(const std::string& condition) const;
};

/// Checks the structural assumptions on the model inputs. Never throws;
/// every violated condition becomes a Fail entry. A Lamperti request with a
/// non-smooth kernel produces a Warn entry.
ValidationReport validate_config(const KernelSpec& kernel, const CoefficientSet& coefficients,
                                 const InitialLaw& initial, bool lamperti_requested = false);

}  // namespace epifront
