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

#include "epifront/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "epifront/rng.hpp"

namespace epifront {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double weibull_cdf(const TruncatedWeibullKernel& w, double u) {
    return -std::expm1(-std::pow(u / w.scale, w.shape));
}

double weibull_pdf(const TruncatedWeibullKernel& w, double u) {
    const double z = u / w.scale;
    return w.shape / w.scale * std::pow(z, w.shape - 1.0) * std::exp(-std::pow(z, w.shape));
}

// Integral of the raised-cosine ramp (1 - cos(pi s / eps)) / 2 over [0, u], u in [0, eps].
double ramp_integral(double eps, double u) {
    return 0.5 * u - eps / (2.0 * std::numbers::pi) * std::sin(std::numbers::pi * u / eps);
}

bool finite(double x) { return std::isfinite(x); }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

bool KernelSpec::smooth() const {
    return std::visit(overloaded{[](const UniformKernel&) { return false; },
                                 [](const TruncatedWeibullKernel& w) { return w.shape > 1.0; },
                                 [](const TaperedUniformKernel&) { return true; }},
                      family);
}

double kernel_density(const KernelSpec& kernel, double u) {
    if (!(u >= 0.0) || u > kernel.dbar) {
        return 0.0;
    }
    const double dbar = kernel.dbar;
    return std::visit(
        overloaded{[&](const UniformKernel&) { return 1.0 / dbar; },
                   [&](const TruncatedWeibullKernel& w) { return weibull_pdf(w, u) / weibull_cdf(w, dbar); },
                   [&](const TaperedUniformKernel& tap) {
                       const double eps = tap.taper;
                       const double mass = dbar - eps;
                       const double edge = std::min(u, dbar - u);
                       if (edge >= eps) {
                           return 1.0 / mass;
                       }
                       return 0.5 * (1.0 - std::cos(std::numbers::pi * edge / eps)) / mass;
                   }},
        kernel.family);
}

double kernel_cdf(const KernelSpec& kernel, double u) {
    if (!(u > 0.0)) {
        return 0.0;
    }
    const double dbar = kernel.dbar;
    if (u >= dbar) {
        return 1.0;
    }
    const double p = std::visit(
        overloaded{[&](const UniformKernel&) { return u / dbar; },
                   [&](const TruncatedWeibullKernel& w) { return weibull_cdf(w, u) / weibull_cdf(w, dbar); },
                   [&](const TaperedUniformKernel& tap) {
                       const double eps = tap.taper;
                       const double mass = dbar - eps;
                       if (u < eps) {
                           return ramp_integral(eps, u) / mass;
                       }
                       if (u <= dbar - eps) {
                           return (0.5 * eps + (u - eps)) / mass;
                       }
                       return 1.0 - ramp_integral(eps, dbar - u) / mass;
                   }},
        kernel.family);
    return std::clamp(p, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

double CoefficientSet::drift_at(double, double x) const {
    return std::visit(overloaded{[](const ConstantDrift& d) { return d.mu; },
                                 [&](const MeanRevertingDrift& d) { return d.theta * (d.m - x); }},
                      drift);
}

double CoefficientSet::sigma(double t, double x) const {
    return std::visit(
        overloaded{[](const ConstantDiffusion& d) { return d.c; },
                   [&](const TimeModulatedDiffusion& d) { return d.c0 * (1.0 + d.amplitude * std::sin(d.frequency * t)); },
                   [&](const SpaceModulatedDiffusion& d) {
                       return d.c0 * (1.0 + d.amplitude * std::tanh((x - d.center) / d.width));
                   }},
        diffusion);
}

double CoefficientSet::dsigma_dt(double t, double) const {
    return std::visit(overloaded{[&](const TimeModulatedDiffusion& d) {
                                     return d.c0 * d.amplitude * d.frequency * std::cos(d.frequency * t);
                                 },
                                 [](const auto&) { return 0.0; }},
                      diffusion);
}

double CoefficientSet::dsigma_dx(double, double x) const {
    return std::visit(overloaded{[&](const SpaceModulatedDiffusion& d) {
                                     const double sech = 1.0 / std::cosh((x - d.center) / d.width);
                                     return d.c0 * d.amplitude * sech * sech / d.width;
                                 },
                                 [](const auto&) { return 0.0; }},
                      diffusion);
}

double CoefficientSet::rate_at(double, double c) const {
    return std::visit(overloaded{[](const ConstantRate& r) { return r.g; },
                                 [&](const AffineRate& r) { return std::max(0.0, r.g0 + r.g1 * c); }},
                      rate);
}

double CoefficientSet::sigma_min() const {
    return std::visit(overloaded{[](const ConstantDiffusion& d) { return d.c; },
                                 [](const TimeModulatedDiffusion& d) { return d.c0 * (1.0 - d.amplitude); },
                                 [](const SpaceModulatedDiffusion& d) { return d.c0 * (1.0 - d.amplitude); }},
                      diffusion);
}

double CoefficientSet::sigma_max() const {
    return std::visit(overloaded{[](const ConstantDiffusion& d) { return d.c; },
                                 [](const TimeModulatedDiffusion& d) { return d.c0 * (1.0 + d.amplitude); },
                                 [](const SpaceModulatedDiffusion& d) { return d.c0 * (1.0 + d.amplitude); }},
                      diffusion);
}

double CoefficientSet::drift_lipschitz() const {
    return std::visit(overloaded{[](const ConstantDrift&) { return 0.0; },
                                 [](const MeanRevertingDrift& d) { return std::abs(d.theta); }},
                      drift);
}

double CoefficientSet::dsigma_dx_bound() const {
    return std::visit(overloaded{[](const SpaceModulatedDiffusion& d) { return d.c0 * d.amplitude / d.width; },
                                 [](const auto&) { return 0.0; }},
                      diffusion);
}

double CoefficientSet::dsigma_dt_bound() const {
    return std::visit(overloaded{[](const TimeModulatedDiffusion& d) {
                                     return d.c0 * d.amplitude * std::abs(d.frequency);
                                 },
                                 [](const auto&) { return 0.0; }},
                      diffusion);
}

bool CoefficientSet::sigma_space_independent() const {
    return !std::holds_alternative<SpaceModulatedDiffusion>(diffusion);
}

bool CoefficientSet::sigma_time_independent() const {
    return !std::holds_alternative<TimeModulatedDiffusion>(diffusion);
}

double CoefficientSet::drift_bound_on(double lo, double hi) const {
    return std::visit(overloaded{[](const ConstantDrift& d) { return std::abs(d.mu); },
                                 [&](const MeanRevertingDrift& d) {
                                     return std::abs(d.theta) * std::max(std::abs(d.m - lo), std::abs(d.m - hi));
                                 }},
                      drift);
}

bool CoefficientSet::rate_identically_zero() const {
    return std::visit(overloaded{[](const ConstantRate& r) { return r.g == 0.0; },
                                 [](const AffineRate& r) { return r.g0 == 0.0 && r.g1 == 0.0; }},
                      rate);
}

// ---------------------------------------------------------------------------

double sample_initial(const InitialLaw& law, NoiseStream& stream) {
    const double a0 = law.a0;
    return std::visit(
        overloaded{[](const PointLaw& p) { return p.x0; },
                   [&](const TruncatedGaussianLaw& g) {
                       // Inverse-CDF sampling on the upper tail beyond a0.
                       const double z0 = (a0 - g.mean) / g.stdev;
                       const double tail = 0.5 * std::erfc(z0 / std::numbers::sqrt2);
                       const double q = stream.uniform() * tail;
                       const double z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
                       const double x = g.mean + g.stdev * z;
                       return x > a0 ? x : std::nextafter(a0, std::numeric_limits<double>::infinity());
                   }},
        law.family);
}

// ---------------------------------------------------------------------------

const char* to_string(CheckStatus status) {
    switch (status) {
        case CheckStatus::Pass:
            return "pass";
        case CheckStatus::Warn:
            return "warn";
        case CheckStatus::Fail:
            return "fail";
    }
    return "fail";
}

bool ValidationReport::ok() const {
    return std::none_of(entries.begin(), entries.end(),
                        [](const ValidationEntry& e) { return e.status == CheckStatus::Fail; });
}

const ValidationEntry* ValidationReport::find(const std::string& condition) const {
    for (const auto& e : entries) {
        if (e.condition == condition) {
            return &e;
        }
    }
    return nullptr;
}

namespace {

ValidationEntry check(std::string condition, bool passed, std::string detail) {
    return {std::move(condition), passed ? CheckStatus::Pass : CheckStatus::Fail, std::move(detail)};
}

std::string kernel_parameter_problem(const KernelSpec& k) {
    if (!finite(k.dbar) || k.dbar <= 0.0) {
        return "dbar must be positive and finite (got " + fmt(k.dbar) + ")";
    }
    return std::visit(overloaded{[](const UniformKernel&) { return std::string{}; },
                                 [](const TruncatedWeibullKernel& w) {
                                     if (!finite(w.shape) || w.shape <= 0.0 || !finite(w.scale) || w.scale <= 0.0) {
                                         return std::string("weibull shape and scale must be positive");
                                     }
                                     return std::string{};
                                 },
                                 [&](const TaperedUniformKernel& t) {
                                     if (!finite(t.taper) || t.taper <= 0.0 || 2.0 * t.taper > k.dbar) {
                                         return std::string("taper must lie in (0, dbar/2]");
                                     }
                                     return std::string{};
                                 }},
                      k.family);
}

// Breakpoints where the density is not smooth, for piecewise quadrature.
std::vector<double> kernel_breakpoints(const KernelSpec& k) {
    std::vector<double> pts{0.0};
    if (const auto* t = std::get_if<TaperedUniformKernel>(&k.family)) {
        pts.push_back(t->taper);
        pts.push_back(k.dbar - t->taper);
    }
    pts.push_back(k.dbar);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

double integrate_density(const KernelSpec& k) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    const auto pts = kernel_breakpoints(k);
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        total += integrator.integrate([&](double u) { return kernel_density(k, u); }, pts[j], pts[j + 1]);
    }
    return total;
}

}  // namespace

ValidationReport validate_config(const KernelSpec& kernel, const CoefficientSet& coefficients,
                                 const InitialLaw& initial, bool lamperti_requested) {
    ValidationReport report;
    auto& out = report.entries;

    const std::string kernel_problem = kernel_parameter_problem(kernel);
    out.push_back(check("kernel_parameters", kernel_problem.empty(), kernel_problem));
    if (kernel_problem.empty()) {
        const double mass = integrate_density(kernel);
        out.push_back(check("kernel_normalization", std::abs(mass - 1.0) <= 1e-10,
                            "integral of density over support = " + fmt(mass)));
        const bool support_ok = kernel_density(kernel, -1e-9) == 0.0 &&
                                kernel_density(kernel, kernel.dbar * (1.0 + 1e-9) + 1e-12) == 0.0 &&
                                kernel_cdf(kernel, 0.0) == 0.0 && kernel_cdf(kernel, kernel.dbar) == 1.0;
        out.push_back(check("kernel_support", support_ok, "density vanishes off [0, dbar]; P(0)=0, P(dbar)=1"));
    }

    const bool drift_ok = std::visit(
        overloaded{[](const ConstantDrift& d) { return finite(d.mu); },
                   [](const MeanRevertingDrift& d) { return finite(d.theta) && d.theta >= 0.0 && finite(d.m); }},
        coefficients.drift);
    out.push_back(check("drift_lipschitz", drift_ok,
                        "Lipschitz constant L = " + fmt(coefficients.drift_lipschitz())));

    const bool diffusion_params_ok = std::visit(
        overloaded{[](const ConstantDiffusion& d) { return finite(d.c); },
                   [](const TimeModulatedDiffusion& d) {
                       return finite(d.c0) && d.amplitude >= 0.0 && d.amplitude < 1.0 && finite(d.frequency);
                   },
                   [](const SpaceModulatedDiffusion& d) {
                       return finite(d.c0) && d.amplitude >= 0.0 && d.amplitude < 1.0 && finite(d.center) &&
                              finite(d.width) && d.width > 0.0;
                   }},
        coefficients.diffusion);
    const double cmin = coefficients.sigma_min();
    const double cmax = coefficients.sigma_max();
    out.push_back(check("diffusion_nondegenerate", diffusion_params_ok && cmin > 0.0,
                        "sigma_min = " + fmt(cmin) + " must be > 0"));
    out.push_back(check("diffusion_bounded", diffusion_params_ok && finite(cmax),
                        "sigma_max = " + fmt(cmax)));

    const bool rate_ok = std::visit(
        overloaded{[](const ConstantRate& r) { return finite(r.g) && r.g >= 0.0; },
                   [](const AffineRate& r) { return finite(r.g0) && finite(r.g1) && r.g0 >= 0.0 && r.g1 >= 0.0; }},
        coefficients.rate);
    out.push_back(check("rate_continuous_nonnegative", rate_ok, "gamma(t, c) = g0 + g1 c with g0, g1 >= 0"));

    const bool initial_ok = std::visit(
        overloaded{[&](const PointLaw& p) { return finite(p.x0) && finite(initial.a0) && p.x0 > initial.a0; },
                   [&](const TruncatedGaussianLaw& g) {
                       return finite(g.mean) && finite(g.stdev) && g.stdev > 0.0 && finite(initial.a0);
                   }},
        initial.family);
    out.push_back(check("initial_support", initial_ok, "initial law supported strictly above a0"));
    // Gaussian tails always satisfy exp(delta x^2) integrability for small delta; recorded, never rejected.
    out.push_back(check("initial_subgaussian", true, "holds analytically for the catalog"));

    const bool smooth = kernel_problem.empty() && kernel.smooth();
    report.lamperti_eligible = smooth && diffusion_params_ok && cmin > 0.0;
    if (lamperti_requested) {
        out.push_back({"lamperti_kernel_smooth", smooth ? CheckStatus::Pass : CheckStatus::Warn,
                       smooth ? "kernel absolutely continuous"
                              : "kernel not absolutely continuous; change of frame not justified"});
    }
    return report;
}

}  // namespace epifront
