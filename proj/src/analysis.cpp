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

#include "epifront/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "epifront/parallel.hpp"
#include "epifront/sde.hpp"
#include "epifront/stats.hpp"

namespace epifront {

namespace {

// Runs `replications` independent copies of config (seed derived per copy) and
// maps each trace to a value stored in its replication slot.
template <class T>
std::vector<T> replicate(const RunConfig& config, std::size_t replications, ThreadPool* pool,
                         const std::function<T(const SystemTrace&)>& summarize) {
    std::vector<T> out(replications);
    for_each_index(pool, replications, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            RunConfig c = config;
            c.seed = derive_seed(config.seed, r);
            out[r] = summarize(run(c));
        }
    });
    return out;
}

std::vector<double> taus_by_particle(const SystemTrace& trace) {
    std::vector<double> taus(trace.n, std::numeric_limits<double>::infinity());
    for (const auto& e : trace.infections) {
        taus[e.particle] = e.tau;
    }
    return taus;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> compute_V(const SystemTrace& trace, const CoefficientSet& coefficients, CompensatorForm form) {
    if (!trace.has_particle_data()) {
        throw std::invalid_argument("compute_V: trace lacks per-particle local-time increments");
    }
    const std::size_t n = trace.n;
    const auto taus = taus_by_particle(trace);
    std::vector<double> v(trace.times.size(), 0.0);
    for (std::size_t k = 0; k < trace.steps(); ++k) {
        const double t = trace.times[k];
        const double rate = coefficients.rate_at(t, trace.contagion[k]);
        double increment = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(t < taus[i])) {
                continue;
            }
            const double dh = rate * trace.local_time_increment(k, i);
            increment += form == CompensatorForm::Exponential ? -std::expm1(-dh) : dh;
        }
        v[k + 1] = v[k] + increment / static_cast<double>(n);
    }
    return v;
}

std::vector<double> cumulative_hazard(const SystemTrace& trace, const CoefficientSet& coefficients,
                                      std::size_t particle) {
    if (!trace.has_particle_data()) {
        throw std::invalid_argument("cumulative_hazard: trace lacks per-particle local-time increments");
    }
    std::vector<double> h(trace.times.size(), 0.0);
    for (std::size_t k = 0; k < trace.steps(); ++k) {
        const double rate = coefficients.rate_at(trace.times[k], trace.contagion[k]);
        h[k + 1] = h[k] + rate * trace.local_time_increment(k, particle);
    }
    return h;
}

std::size_t grid_index(const RunConfig& config, double t) {
    const double k = t / config.dt;
    if (!(k >= -1e-9) || k > static_cast<double>(config.steps()) + 1e-9) {
        throw std::invalid_argument("grid_index: time outside the run horizon");
    }
    return static_cast<std::size_t>(std::llround(k));
}

// ---------------------------------------------------------------------------

MartingaleReport martingale_test(const RunConfig& config, std::size_t replications,
                                 std::span<const ProbePair> probes, const MartingaleOptions& options) {
    if (replications < 30) {
        throw std::invalid_argument("martingale_test: at least 30 replications required");
    }
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (const auto& p : probes) {
        if (!(p.s <= p.t)) {
            throw std::invalid_argument("martingale_test: probe pairs need s <= t");
        }
        idx.emplace_back(grid_index(config, p.s), grid_index(config, p.t));
    }
    const double scale = options.compensator_scale;
    // Per replication: (M_s, M_t) for each probe.
    using Sample = std::vector<std::pair<double, double>>;
    const auto samples = replicate<Sample>(config, replications, options.pool, [&](const SystemTrace& tr) {
        Sample s;
        for (const auto& [ks, kt] : idx) {
            const double ms = tr.infected[ks] - scale * tr.compensator[ks];
            const double mt = tr.infected[kt] - scale * tr.compensator[kt];
            s.emplace_back(ms, mt);
        }
        return s;
    });

    MartingaleReport report;
    report.replications = replications;
    for (std::size_t j = 0; j < probes.size(); ++j) {
        std::vector<double> level(replications);
        std::vector<double> increment(replications);
        for (std::size_t r = 0; r < replications; ++r) {
            level[r] = samples[r][j].first;
            increment[r] = samples[r][j].second - samples[r][j].first;
        }
        ProbeStatistics ps;
        ps.probe = probes[j];
        ps.mean_increment = stats::mean(increment);
        ps.standard_error = stats::standard_error(increment);
        const auto fit = stats::linear_fit(level, increment);
        ps.regression_slope = fit.slope;
        ps.regression_p_value = fit.p_value;
        ps.mean_ok = std::abs(ps.mean_increment) <= 3.0 * ps.standard_error;
        ps.slope_ok = !(fit.p_value < options.significance);
        report.consistent = report.consistent && ps.mean_ok && ps.slope_ok;
        report.probes.push_back(ps);
    }
    return report;
}

// ---------------------------------------------------------------------------

DecayFit l2_decay(const RunConfig& config, std::span<const std::size_t> sizes, std::size_t replications,
                  const DecayOptions& options) {
    if (sizes.size() < 2) {
        throw std::invalid_argument("l2_decay: need at least two population sizes");
    }
    for (std::size_t j = 1; j < sizes.size(); ++j) {
        if (sizes[j] <= sizes[j - 1]) {
            throw std::invalid_argument("l2_decay: sizes must be strictly increasing");
        }
    }
    if (replications < 2) {
        throw std::invalid_argument("l2_decay: need at least two replications");
    }
    DecayFit fit;
    fit.sizes.assign(sizes.begin(), sizes.end());
    fit.replications = replications;

    std::vector<std::vector<double>> sup_sq(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        RunConfig c = config;
        c.n = sizes[j];
        c.record_particles = false;
        c.seed = derive_seed(config.seed, sizes[j]);
        sup_sq[j] = replicate<double>(c, replications, options.pool, [](const SystemTrace& tr) {
            double m = 0.0;
            for (double x : tr.martingale) {
                m = std::max(m, x * x);
            }
            return m;
        });
        fit.estimates.push_back(stats::mean(sup_sq[j]));
        fit.standard_errors.push_back(stats::standard_error(sup_sq[j]));
    }

    fit.degenerate = std::any_of(fit.estimates.begin(), fit.estimates.end(), [](double e) { return !(e > 0.0); });
    if (fit.degenerate) {
        return fit;
    }

    std::vector<double> log_n;
    for (auto n : sizes) {
        log_n.push_back(std::log(static_cast<double>(n)));
    }
    const auto slope_of = [&](const std::vector<double>& est) {
        std::vector<double> log_e;
        for (double e : est) {
            log_e.push_back(std::log(e));
        }
        return stats::linear_fit(log_n, log_e).slope;
    };
    fit.slope = slope_of(fit.estimates);

    NoiseStream rng(options.bootstrap_seed, 0, StreamKind::Auxiliary);
    std::vector<double> slopes;
    slopes.reserve(options.bootstrap_resamples);
    std::vector<double> est(sizes.size());
    for (std::size_t b = 0; b < options.bootstrap_resamples; ++b) {
        bool usable = true;
        for (std::size_t j = 0; j < sizes.size(); ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < replications; ++r) {
                const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(replications));
                s += sup_sq[j][std::min(pick, replications - 1)];
            }
            est[j] = s / static_cast<double>(replications);
            usable = usable && est[j] > 0.0;
        }
        if (usable) {
            slopes.push_back(slope_of(est));
        }
    }
    if (!slopes.empty()) {
        std::sort(slopes.begin(), slopes.end());
        const auto at = [&](double q) {
            const double pos = q * static_cast<double>(slopes.size() - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const auto hi = std::min(lo + 1, slopes.size() - 1);
            return slopes[lo] + (pos - static_cast<double>(lo)) * (slopes[hi] - slopes[lo]);
        };
        fit.ci_low = at(0.025);
        fit.ci_high = at(0.975);
    }
    return fit;
}

// ---------------------------------------------------------------------------

TieTable tie_stats(const RunConfig& config, std::span<const double> dts, std::size_t replications,
                   ThreadPool* pool) {
    TieTable table;
    for (double dt : dts) {
        RunConfig c = config;
        c.dt = dt;
        c.record_particles = false;
        struct Counts {
            std::size_t steps = 0;
            std::size_t ties = 0;
            std::size_t infections = 0;
        };
        const auto counts = replicate<Counts>(c, replications, pool, [](const SystemTrace& tr) {
            Counts k;
            k.steps = tr.steps();
            k.infections = tr.infections.size();
            for (auto per_step : tr.infections_per_step()) {
                k.ties += per_step >= 2 ? 1 : 0;
            }
            return k;
        });
        TieRow row;
        row.dt = dt;
        for (const auto& k : counts) {
            row.steps += k.steps;
            row.tie_steps += k.ties;
            row.infections += k.infections;
        }
        row.fraction = row.steps > 0 ? static_cast<double>(row.tie_steps) / static_cast<double>(row.steps) : 0.0;
        table.rows.push_back(row);
    }
    table.decreasing = table.rows.size() >= 2;
    for (std::size_t j = 1; j < table.rows.size(); ++j) {
        table.decreasing = table.decreasing && table.rows[j].fraction < table.rows[j - 1].fraction;
    }
    return table;
}

// ---------------------------------------------------------------------------

TauLawReport tau_law_check(const RunConfig& config, std::size_t tagged, std::size_t replications,
                           std::span<const double> probe_times, ThreadPool* pool) {
    if (config.n > 8) {
        throw std::invalid_argument("tau_law_check: n must not exceed 8");
    }
    if (tagged >= config.n) {
        throw std::invalid_argument("tau_law_check: tagged index out of range");
    }
    std::vector<std::size_t> idx;
    for (double t : probe_times) {
        idx.push_back(grid_index(config, t));
    }
    struct Sample {
        std::vector<double> hit;
        std::vector<double> survival_complement;
    };
    std::vector<Sample> samples(replications);
    for_each_index(pool, replications, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            RunConfig truth = config;
            truth.seed = derive_seed(config.seed, r);
            truth.mode = TrueMode{};
            truth.record_particles = false;
            RunConfig artificial = truth;
            artificial.mode = ArtificialMode{tagged};
            artificial.record_particles = true;

            const double tau = run(truth).tau_of(tagged);
            const auto hazard = cumulative_hazard(run(artificial), config.model.coefficients, tagged);
            Sample& s = samples[r];
            for (std::size_t j = 0; j < idx.size(); ++j) {
                s.hit.push_back(tau <= probe_times[j] + 0.5 * config.dt ? 1.0 : 0.0);
                s.survival_complement.push_back(-std::expm1(-hazard[idx[j]]));
            }
        }
    });

    TauLawReport report;
    report.tagged = tagged;
    report.replications = replications;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        std::vector<double> hit(replications);
        std::vector<double> comp(replications);
        for (std::size_t r = 0; r < replications; ++r) {
            hit[r] = samples[r].hit[j];
            comp[r] = samples[r].survival_complement[j];
        }
        TauLawProbe p;
        p.t = probe_times[j];
        p.empirical_cdf = stats::mean(hit);
        p.empirical_se = stats::standard_error(hit);
        p.hazard_estimate = stats::mean(comp);
        p.hazard_se = stats::standard_error(comp);
        p.combined_se = std::hypot(p.empirical_se, p.hazard_se);
        p.discrepancy = std::abs(p.empirical_cdf - p.hazard_estimate);
        p.ok = p.discrepancy <= 3.0 * p.combined_se;
        report.max_discrepancy = std::max(report.max_discrepancy, p.discrepancy);
        report.consistent = report.consistent && p.ok;
        report.probes.push_back(p);
    }
    return report;
}

// ---------------------------------------------------------------------------

EffectiveR effective_R(const RunConfig& config, double t, std::size_t replications, std::uint64_t continuation_seed,
                       ThreadPool* pool) {
    if (is_barnes(config.mode)) {
        throw std::invalid_argument("effective_R: epidemic modes only");
    }
    if (replications < 1) {
        throw std::invalid_argument("effective_R: need at least one replication");
    }
    RunConfig base = config;
    base.record_particles = false;
    Engine engine(base);
    const std::size_t stop = grid_index(base, t);
    while (engine.step_index() < stop) {
        engine.step();
    }

    const double start = engine.time();
    const double front = engine.boundary();
    const auto& model = config.model;
    const double n = static_cast<double>(config.n);
    const double frozen_c = 1.0 / n;
    const double dt = config.dt;
    const auto horizon_steps = static_cast<std::size_t>(std::llround(model.kernel.dbar / dt));

    std::vector<std::size_t> susceptible;
    for (std::size_t i = 0; i < engine.particles().size(); ++i) {
        if (engine.particles()[i].status == Status::Susceptible) {
            susceptible.push_back(i);
        }
    }
    // Continuation boundary: one infection's own kernel contribution above A_t.
    std::vector<double> boundary(horizon_steps + 1);
    for (std::size_t m = 0; m <= horizon_steps; ++m) {
        boundary[m] = front + model.alpha / n * kernel_cdf(model.kernel, static_cast<double>(m) * dt);
    }

    std::vector<double> totals(replications, 0.0);
    for_each_index(pool, replications, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const std::uint64_t seed = derive_seed(continuation_seed, r);
            double total = 0.0;
            for (std::size_t i : susceptible) {
                NoiseStream noise(seed, i, StreamKind::Brownian);
                NoiseStream clock_stream(seed, i, StreamKind::Clock);
                const double clock = clock_stream.exponential();
                double x = engine.particles()[i].position;
                double hazard = 0.0;
                for (std::size_t m = 0; m < horizon_steps && hazard < clock; ++m) {
                    const double s = start + static_cast<double>(m) * dt;
                    const StepResult step =
                        reflected_euler_step(x, s, dt, boundary[m + 1], model.coefficients, noise.normal());
                    x = step.position;
                    const double dh = model.coefficients.rate_at(s, frozen_c) * step.local_time;
                    hazard += dh;
                    total += dh;
                }
            }
            totals[r] = total;
        }
    });

    EffectiveR out;
    out.value = stats::mean(totals);
    out.standard_error = stats::standard_error(totals);
    out.replications = replications;
    out.susceptible = susceptible.size();
    out.front = front;
    return out;
}

// ---------------------------------------------------------------------------

BarnesComparison barnes_comparison(const RunConfig& config, std::span<const std::size_t> sizes,
                                   std::size_t replications, double u, ThreadPool* pool) {
    double kappa = 1.0;
    if (const auto* m = std::get_if<BarnesTildeMode>(&config.mode)) {
        u = m->u;
        kappa = m->kappa;
    } else if (const auto* m = std::get_if<BarnesBarMode>(&config.mode)) {
        u = m->u;
    }
    BarnesComparison out;
    out.sizes.assign(sizes.begin(), sizes.end());
    out.replications = replications;
    for (std::size_t n : sizes) {
        std::vector<double> gaps(replications);
        for_each_index(pool, replications, [&](std::size_t begin, std::size_t end) {
            for (std::size_t r = begin; r < end; ++r) {
                RunConfig c = config;
                c.n = n;
                c.seed = derive_seed(derive_seed(config.seed, n), r);
                c.mode = BarnesTildeMode{u, kappa};
                const SystemTrace tilde = run_barnes(c);
                c.mode = BarnesBarMode{u};
                const SystemTrace bar = run_barnes(c);
                double gap = 0.0;
                for (std::size_t k = 0; k < tilde.front.size(); ++k) {
                    gap = std::max(gap, std::abs(tilde.front[k] - bar.front[k]));
                }
                gaps[r] = gap;
            }
        });
        out.mean_sup_gap.push_back(stats::mean(gaps));
        out.standard_errors.push_back(stats::standard_error(gaps));
    }
    out.decreasing = out.mean_sup_gap.size() >= 2;
    for (std::size_t j = 1; j < out.mean_sup_gap.size(); ++j) {
        out.decreasing = out.decreasing && out.mean_sup_gap[j] < out.mean_sup_gap[j - 1];
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<SirState> sir_integrate(double beta, double dbar, double i0, double c0, double horizon, double dt) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("sir_integrate: beta must be nonnegative");
    }
    if (!(dbar > 0.0) || !std::isfinite(dbar)) {
        throw std::invalid_argument("sir_integrate: dbar must be positive");
    }
    if (!(i0 >= 0.0 && i0 <= 1.0)) {
        throw std::invalid_argument("sir_integrate: I0 must lie in [0, 1]");
    }
    if (!(dt > 0.0) || !(horizon >= 0.0)) {
        throw std::invalid_argument("sir_integrate: need dt > 0 and T >= 0");
    }
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    const double r0 = beta * dbar;
    const auto state = [&](double t, double i, double c) {
        const double s = 1.0 - i;
        return SirState{t, i, c, s, r0, r0 * s};
    };
    const auto rhs = [&](double i, double c, double& di, double& dc) {
        di = beta * (1.0 - i) * c;
        dc = di - c / dbar;
    };

    std::vector<SirState> out;
    out.reserve(steps + 1);
    double i = i0;
    double c = c0;
    out.push_back(state(0.0, i, c));
    for (std::size_t k = 0; k < steps; ++k) {
        double k1i, k1c, k2i, k2c, k3i, k3c, k4i, k4c;
        rhs(i, c, k1i, k1c);
        rhs(i + 0.5 * dt * k1i, c + 0.5 * dt * k1c, k2i, k2c);
        rhs(i + 0.5 * dt * k2i, c + 0.5 * dt * k2c, k3i, k3c);
        rhs(i + dt * k3i, c + dt * k3c, k4i, k4c);
        i += dt / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
        c += dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        out.push_back(state(static_cast<double>(k + 1) * dt, i, c));
    }
    return out;
}

}  // namespace epifront
