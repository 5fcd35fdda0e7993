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

#include "epifront/lamperti.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "epifront/sde.hpp"
#include "epifront/stats.hpp"

namespace epifront {

namespace {

double interpolate(const std::vector<double>& nodes, double dt, double t) {
    if (nodes.empty()) {
        return 0.0;
    }
    const double s = t / dt;
    if (!(s > 0.0)) {
        return nodes.front();
    }
    const double last = static_cast<double>(nodes.size() - 1);
    if (s >= last) {
        return nodes.back();
    }
    const double j = std::floor(s);
    const double frac = s - j;
    const auto k = static_cast<std::size_t>(j);
    // Snap to nodes so grid-aligned queries return stored values bit for bit.
    if (frac < 1e-9) {
        return nodes[k];
    }
    if (frac > 1.0 - 1e-9) {
        return nodes[k + 1];
    }
    return nodes[k] + frac * (nodes[k + 1] - nodes[k]);
}

template <class F>
double integrate(F&& f, double a, double b) {
    if (b <= a) {
        return 0.0;
    }
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
}

}  // namespace

double TransformContext::horizon() const {
    return boundary.empty() ? 0.0 : static_cast<double>(boundary.size() - 1) * dt;
}

double TransformContext::boundary_at(double t) const { return interpolate(boundary, dt, t); }

double TransformContext::contagion_at(double t) const { return interpolate(contagion, dt, t); }

TransformContext TransformContext::from_trace(const SystemTrace& trace, const CoefficientSet& coefficients) {
    TransformContext ctx;
    ctx.coefficients = coefficients;
    ctx.dt = trace.dt;
    ctx.boundary = trace.front;
    ctx.contagion = trace.contagion;
    return ctx;
}

TransformContext TransformContext::flat(const CoefficientSet& coefficients, double level, double horizon,
                                        double dt) {
    TransformContext ctx;
    ctx.coefficients = coefficients;
    ctx.dt = dt;
    const auto points = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;
    ctx.boundary.assign(points, level);
    ctx.contagion.assign(points, 0.0);
    return ctx;
}

// ---------------------------------------------------------------------------

double upsilon(const TransformContext& ctx, double t, double y) {
    if (!(y >= 0.0)) {
        throw std::invalid_argument("upsilon: level must be nonnegative");
    }
    const double a = ctx.boundary_at(t);
    const auto& c = ctx.coefficients;
    if (c.sigma_space_independent()) {
        return y / c.sigma(t, a);
    }
    return integrate([&](double x) { return 1.0 / c.sigma(t, x + a); }, 0.0, y);
}

double upsilon_inverse(const TransformContext& ctx, double t, double z) {
    if (!(z >= 0.0)) {
        throw std::invalid_argument("upsilon_inverse: level must be nonnegative");
    }
    const double a = ctx.boundary_at(t);
    const auto& c = ctx.coefficients;
    if (c.sigma_space_independent()) {
        return z * c.sigma(t, a);
    }
    if (z == 0.0) {
        return 0.0;
    }
    // Upsilon(y) lies in [y / sigma_max, y / sigma_min], which brackets the root.
    double lo = z * c.sigma_min();
    double hi = z * c.sigma_max();
    double y = z * c.sigma(t, a);
    const double tol = std::max(ctx.tolerance, 1e-15 * z);
    for (int iter = 0; iter < 200; ++iter) {
        const double residual = upsilon(ctx, t, y) - z;
        if (std::abs(residual) <= tol) {
            return y;
        }
        if (residual > 0.0) {
            hi = y;
        } else {
            lo = y;
        }
        double next = y - residual * c.sigma(t, y + a);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == y) {
            return y;
        }
        y = next;
    }
    throw std::runtime_error("upsilon_inverse: root finding did not converge");
}

double level_drift(const TransformContext& ctx, double t, double y) {
    const double a = ctx.boundary_at(t);
    const auto& c = ctx.coefficients;
    const double x = y + a;
    const double s = c.sigma(t, x);
    double time_term = 0.0;
    if (!c.sigma_time_independent()) {
        if (c.sigma_space_independent()) {
            time_term = y * c.dsigma_dt(t, x) / (s * s);
        } else {
            time_term = integrate(
                [&](double u) {
                    const double su = c.sigma(t, u + a);
                    return c.dsigma_dt(t, u + a) / (su * su);
                },
                0.0, y);
        }
    }
    return -time_term + c.drift_at(t, x) / s - 0.5 * c.dsigma_dx(t, x);
}

double transformed_drift(const TransformContext& ctx, double t, double z) {
    return level_drift(ctx, t, upsilon_inverse(ctx, t, z));
}

double frame_drift(const TransformContext& ctx, double t, double dt) {
    const double a = ctx.boundary_at(t);
    const double a_next = ctx.boundary_at(t + dt);
    return -(a_next - a) / (ctx.coefficients.sigma(t, a) * dt);
}

double growth_constant(const TransformContext& ctx) {
    const auto& c = ctx.coefficients;
    const double cmin = c.sigma_min();
    const double cmax = c.sigma_max();
    double lo = 0.0;
    double hi = 0.0;
    if (!ctx.boundary.empty()) {
        const auto [mn, mx] = std::minmax_element(ctx.boundary.begin(), ctx.boundary.end());
        lo = *mn;
        hi = *mx;
    }
    const double linear = (c.dsigma_dt_bound() / (cmin * cmin) + c.drift_lipschitz() / cmin) * cmax;
    const double constant = c.drift_bound_on(lo, hi) / cmin + 0.5 * c.dsigma_dx_bound();
    return std::max(linear, constant);
}

// ---------------------------------------------------------------------------

KilledPath simulate_Z(const TransformContext& ctx, double horizon, double dt, double z0, NoiseStream& noise,
                      double clock) {
    if (!(dt > 0.0) || !(horizon >= 0.0) || !std::isfinite(z0) || z0 < 0.0) {
        throw std::invalid_argument("simulate_Z: need dt > 0, horizon >= 0 and finite z0 >= 0");
    }
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    const auto& c = ctx.coefficients;
    const double root_dt = std::sqrt(dt);
    KilledPath path;
    path.dt = dt;
    path.times.reserve(steps + 1);
    path.positions.reserve(steps + 1);
    path.local_time.reserve(steps + 1);
    double z = z0;
    double l0 = 0.0;
    path.times.push_back(0.0);
    path.positions.push_back(z);
    path.local_time.push_back(0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double t_next = static_cast<double>(k + 1) * dt;
        const double a = ctx.boundary_at(t);
        const double a_next = ctx.boundary_at(t_next);
        const double frame_shift = -(a_next - a) / c.sigma(t, a);
        const double free = z + transformed_drift(ctx, t, z) * dt + frame_shift + root_dt * noise.normal();
        const double push = free < 0.0 ? -free : 0.0;
        z = free < 0.0 ? 0.0 : free;
        l0 += push;
        path.hazard += c.sigma(t_next, a_next) * c.rate_at(t, ctx.contagion_at(t)) * push;
        if (path.hazard >= clock && !std::isfinite(path.killing_time)) {
            path.killing_time = t_next;
        }
        path.times.push_back(t_next);
        path.positions.push_back(z);
        path.local_time.push_back(l0);
    }
    return path;
}

KilledPath simulate_frozen_particle(const TransformContext& ctx, double horizon, double dt, double x0,
                                    NoiseStream& noise, double clock) {
    if (!(dt > 0.0) || !(horizon >= 0.0)) {
        throw std::invalid_argument("simulate_frozen_particle: need dt > 0 and horizon >= 0");
    }
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    const auto& c = ctx.coefficients;
    KilledPath path;
    path.dt = dt;
    path.times.reserve(steps + 1);
    path.positions.reserve(steps + 1);
    path.local_time.reserve(steps + 1);
    double x = x0;
    double l = 0.0;
    path.times.push_back(0.0);
    path.positions.push_back(x);
    path.local_time.push_back(0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double t_next = static_cast<double>(k + 1) * dt;
        const StepResult r = reflected_euler_step(x, t, dt, ctx.boundary_at(t_next), c, noise.normal());
        x = r.position;
        l += r.local_time;
        path.hazard += c.rate_at(t, ctx.contagion_at(t)) * r.local_time;
        if (path.hazard >= clock && !std::isfinite(path.killing_time)) {
            path.killing_time = t_next;
        }
        path.times.push_back(t_next);
        path.positions.push_back(x);
        path.local_time.push_back(l);
    }
    return path;
}

// ---------------------------------------------------------------------------

double pathwise_lamperti_gap(const TransformContext& ctx, double x0, double dt, std::uint64_t seed) {
    const double horizon = ctx.horizon();
    NoiseStream noise_x(seed, 0, StreamKind::Brownian);
    NoiseStream noise_z(seed, 0, StreamKind::Brownian);
    const KilledPath xp = simulate_frozen_particle(ctx, horizon, dt, x0, noise_x);
    const KilledPath zp = simulate_Z(ctx, horizon, dt, upsilon(ctx, 0.0, x0 - ctx.boundary_at(0.0)), noise_z);
    double gap = 0.0;
    for (std::size_t k = 0; k < xp.times.size(); ++k) {
        const double t = xp.times[k];
        const double image = upsilon(ctx, t, std::max(0.0, xp.positions[k] - ctx.boundary_at(t)));
        gap = std::max(gap, std::abs(zp.positions[k] - image));
    }
    return gap;
}

RescalingReport local_time_rescaling_check(const TransformContext& ctx, double x0, std::size_t paths,
                                           std::span<const double> dts, std::span<const double> epsilons,
                                           std::uint64_t seed) {
    RescalingReport report;
    report.epsilons.assign(epsilons.begin(), epsilons.end());
    const auto& c = ctx.coefficients;
    const double horizon = ctx.horizon();

    for (double dt : dts) {
        const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
        const double root_dt = std::sqrt(dt);
        RescalingRow row;
        row.dt = dt;
        row.occupation_relative_error.assign(epsilons.size(), 0.0);
        std::vector<double> occupation_scale(epsilons.size(), 0.0);
        double err_sum = 0.0;
        double lhs_sum = 0.0;
        double rhs_sum = 0.0;

        std::vector<double> xs(steps + 1);
        std::vector<double> us(steps + 1);
        for (std::size_t p = 0; p < paths; ++p) {
            NoiseStream noise(derive_seed(seed, p), 0, StreamKind::Brownian);
            double x = x0;
            xs[0] = x;
            double residual = 0.0;  // U_N - U_0 - sum drift dt - sum dW, accumulated per step
            double weighted = 0.0;  // sum dl / sigma(t, A_t)
            us[0] = upsilon(ctx, 0.0, x - ctx.boundary_at(0.0));
            for (std::size_t k = 0; k < steps; ++k) {
                const double t = static_cast<double>(k) * dt;
                const double t_next = static_cast<double>(k + 1) * dt;
                const double a = ctx.boundary_at(t);
                const double a_next = ctx.boundary_at(t_next);
                const double xi = noise.normal();
                const StepResult r = reflected_euler_step(x, t, dt, a_next, c, xi);
                const double drift = level_drift(ctx, t, x - a) * dt - (a_next - a) / c.sigma(t, a);
                x = r.position;
                xs[k + 1] = x;
                us[k + 1] = upsilon(ctx, t_next, std::max(0.0, x - a_next));
                residual += us[k + 1] - us[k] - drift - root_dt * xi;
                weighted += r.local_time / c.sigma(t_next, a_next);
            }
            lhs_sum += residual;
            rhs_sum += weighted;
            if (weighted > 0.0) {
                ++row.paths_with_contact;
                err_sum += std::abs(residual - weighted);
            }
            for (std::size_t e = 0; e < epsilons.size(); ++e) {
                const double eps = epsilons[e];
                double lhs = 0.0;
                double rhs = 0.0;
                for (std::size_t k = 0; k < steps; ++k) {
                    const double t = static_cast<double>(k) * dt;
                    const double a = ctx.boundary_at(t);
                    if (us[k] < eps) {
                        lhs += dt;
                    }
                    if (xs[k] - a < eps) {
                        const double s = c.sigma(t, xs[k]);
                        rhs += s * s * dt / c.sigma(t, a);
                    }
                }
                row.occupation_relative_error[e] += std::abs(lhs - rhs);
                occupation_scale[e] += rhs;
            }
        }
        // Ratios of sums: paths that barely touch the boundary would otherwise
        // dominate through their near-zero denominators.
        if (rhs_sum > 0.0) {
            row.mean_relative_error = err_sum / rhs_sum;
        }
        if (paths > 0) {
            row.mean_transformed_local_time = lhs_sum / static_cast<double>(paths);
            row.mean_weighted_local_time = rhs_sum / static_cast<double>(paths);
        }
        for (std::size_t e = 0; e < epsilons.size(); ++e) {
            if (occupation_scale[e] > 0.0) {
                row.occupation_relative_error[e] /= occupation_scale[e];
            }
        }
        report.rows.push_back(std::move(row));
    }
    report.decreasing = report.rows.size() >= 2;
    for (std::size_t j = 1; j < report.rows.size(); ++j) {
        report.decreasing =
            report.decreasing && report.rows[j].mean_relative_error < report.rows[j - 1].mean_relative_error;
    }
    return report;
}

LawReport lamperti_law_check(const TransformContext& ctx, double x0, std::size_t paths, double dt,
                             std::span<const double> probe_times, std::uint64_t seed, double level) {
    const double horizon = ctx.horizon();
    std::vector<std::size_t> idx;
    for (double t : probe_times) {
        const double k = t / dt;
        if (t < 0.0 || t > horizon + 1e-12) {
            throw std::invalid_argument("lamperti_law_check: probe time outside the environment horizon");
        }
        idx.push_back(static_cast<std::size_t>(std::llround(k)));
    }
    const double a0 = ctx.boundary_at(0.0);
    const double z0 = upsilon(ctx, 0.0, x0 - a0);

    std::vector<std::vector<double>> from_particle(idx.size());
    std::vector<std::vector<double>> from_z(idx.size());
    for (std::size_t p = 0; p < paths; ++p) {
        const std::uint64_t sx = derive_seed(seed, 2 * p);
        const std::uint64_t sz = derive_seed(seed, 2 * p + 1);
        NoiseStream noise_x(sx, 0, StreamKind::Brownian);
        NoiseStream noise_z(sz, 0, StreamKind::Brownian);
        const double clock_x = NoiseStream(sx, 0, StreamKind::Clock).exponential();
        const double clock_z = NoiseStream(sz, 0, StreamKind::Clock).exponential();
        const KilledPath xp = simulate_frozen_particle(ctx, horizon, dt, x0, noise_x, clock_x);
        const KilledPath zp = simulate_Z(ctx, horizon, dt, z0, noise_z, clock_z);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const std::size_t k = idx[j];
            if (xp.alive_at(k)) {
                const double t = xp.times[k];
                from_particle[j].push_back(upsilon(ctx, t, std::max(0.0, xp.positions[k] - ctx.boundary_at(t))));
            }
            if (zp.alive_at(k)) {
                from_z[j].push_back(zp.positions[k]);
            }
        }
    }

    LawReport report;
    report.paths = paths;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        LawProbe probe;
        probe.t = probe_times[j];
        probe.particle_survivors = from_particle[j].size();
        probe.z_survivors = from_z[j].size();
        const auto ks = stats::ks_two_sample(from_particle[j], from_z[j]);
        probe.ks_statistic = ks.statistic;
        probe.p_value = ks.p_value;
        report.min_p_value = std::min(report.min_p_value, ks.p_value);
        report.consistent = report.consistent && ks.p_value > level;
        report.probes.push_back(probe);
    }
    return report;
}

}  // namespace epifront
