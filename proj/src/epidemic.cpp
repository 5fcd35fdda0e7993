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

#include "epifront/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epifront/parallel.hpp"
#include "epifront/sde.hpp"

namespace epifront {

// ---------------------------------------------------------------------------
// FrontState

FrontState::FrontState(KernelSpec kernel, double a0, double alpha, std::size_t n)
    : kernel_(std::move(kernel)), a0_(a0), alpha_(alpha), n_(n) {}

void FrontState::add_infection(double tau) {
    if (!taus_.empty() && tau < taus_.back()) {
        throw std::invalid_argument("FrontState: infection times must be added in order");
    }
    taus_.push_back(tau);
}

void FrontState::retire(double t) {
    const double dbar = kernel_.dbar;
    while (settled_ < taus_.size() && t - taus_[settled_] >= dbar) {
        ++settled_;
    }
    while (expired_ < taus_.size() && t - taus_[expired_] >= 2.0 * dbar) {
        ++expired_;
    }
}

double FrontState::level(double t) const {
    double sum = static_cast<double>(settled_);
    for (std::size_t j = settled_; j < taus_.size() && taus_[j] <= t; ++j) {
        sum += kernel_cdf(kernel_, t - taus_[j]);
    }
    return a0_ + alpha_ * (sum / static_cast<double>(n_));
}

double FrontState::contagiousness(double t) const {
    const double dbar = kernel_.dbar;
    double sum = 0.0;
    for (std::size_t j = expired_; j < taus_.size() && taus_[j] <= t; ++j) {
        const double age = t - taus_[j];
        sum += kernel_cdf(kernel_, age) - kernel_cdf(kernel_, age - dbar);
    }
    return sum / static_cast<double>(n_);
}

double front_level(const FrontState& front, double t) {
    double sum = 0.0;
    for (double tau : front.infection_times()) {
        if (tau > t) {
            break;
        }
        sum += kernel_cdf(front.kernel(), t - tau);
    }
    return front.a0() + front.alpha() * (sum / static_cast<double>(front.population()));
}

double contagiousness(const FrontState& front, double t) {
    const double dbar = front.kernel().dbar;
    double sum = 0.0;
    for (double tau : front.infection_times()) {
        if (tau > t) {
            break;
        }
        sum += kernel_cdf(front.kernel(), t - tau) - kernel_cdf(front.kernel(), t - tau - dbar);
    }
    return sum / static_cast<double>(front.population());
}

// ---------------------------------------------------------------------------
// Configuration

bool is_barnes(const RunMode& mode) {
    return std::holds_alternative<BarnesTildeMode>(mode) || std::holds_alternative<BarnesBarMode>(mode);
}

std::size_t RunConfig::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

void validate_run_config(const RunConfig& config) {
    const auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (config.n < 1) {
        fail("run: n must be at least 1");
    }
    if (!std::isfinite(config.dt) || config.dt <= 0.0) {
        fail("run: dt must be positive");
    }
    if (!std::isfinite(config.horizon) || config.horizon <= 0.0) {
        fail("run: T must be positive");
    }
    if (config.steps() < 1) {
        fail("run: T/dt must be at least one step");
    }
    if (!std::isfinite(config.model.alpha) || config.model.alpha < 0.0) {
        fail("run: alpha must be nonnegative");
    }
    auto report = validate_config(config.model.kernel, config.model.coefficients, config.model.initial);
    if (!report.ok()) {
        std::ostringstream os;
        os << "model validation failed:";
        for (const auto& e : report.entries) {
            if (e.status == CheckStatus::Fail) {
                os << " [" << e.condition << ": " << e.detail << "]";
            }
        }
        throw ConfigError(os.str(), std::move(report));
    }
    if (const auto* a = std::get_if<ArtificialMode>(&config.mode); a != nullptr && a->tagged >= config.n) {
        fail("run: tagged particle index must be below n");
    }
    if (is_barnes(config.mode)) {
        const auto& c = config.model.coefficients;
        const auto* drift = std::get_if<ConstantDrift>(&c.drift);
        const auto* diffusion = std::get_if<ConstantDiffusion>(&c.diffusion);
        if (drift == nullptr || drift->mu != 0.0 || diffusion == nullptr || diffusion->c != 1.0) {
            fail("barnes: particles must be Brownian (zero drift, unit diffusion)");
        }
        const double u = std::visit(
            [](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, BarnesTildeMode> || std::is_same_v<M, BarnesBarMode>) {
                    return m.u;
                } else {
                    return 0.0;
                }
            },
            config.mode);
        if (!std::isfinite(u)) {
            fail("barnes: u must be finite");
        }
        if (const auto* tilde = std::get_if<BarnesTildeMode>(&config.mode); tilde && !std::isfinite(tilde->kappa)) {
            fail("barnes: kappa must be finite");
        }
    }
}

// ---------------------------------------------------------------------------
// Trace helpers

double SystemTrace::tau_of(std::size_t particle) const {
    for (const auto& e : infections) {
        if (e.particle == particle) {
            return e.tau;
        }
    }
    return std::numeric_limits<double>::infinity();
}

std::vector<std::size_t> SystemTrace::infections_per_step() const {
    std::vector<std::size_t> counts(steps(), 0);
    for (const auto& e : infections) {
        ++counts[e.step - 1];
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(const RunConfig& config, ThreadPool* pool)
    : config_(config),
      pool_(pool),
      total_steps_(0),
      front_(config.model.kernel, config.model.a0(), config.model.alpha, std::max<std::size_t>(config.n, 1)),
      boundary_(config.model.a0()),
      contagion_(0.0) {
    validate_run_config(config_);
    total_steps_ = config_.steps();
    const std::size_t n = config_.n;

    particles_.resize(n);
    noise_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        NoiseStream init(config_.seed, i, StreamKind::Initial);
        NoiseStream clock(config_.seed, i, StreamKind::Clock);
        particles_[i].position = sample_initial(config_.model.initial, init);
        particles_[i].clock = clock.exponential();
        noise_.emplace_back(config_.seed, i, StreamKind::Brownian);
    }
    step_local_time_.assign(n, 0.0);
    step_compensator_.assign(n, 0.0);
    step_barrier_push_.assign(n, 0.0);
    pending_.assign(n, 0);

    if (const auto* tilde = std::get_if<BarnesTildeMode>(&config_.mode)) {
        contagion_ = tilde->u;
    } else if (const auto* bar = std::get_if<BarnesBarMode>(&config_.mode)) {
        contagion_ = bar->u;
    }

    trace_.n = n;
    trace_.dt = config_.dt;
    const std::size_t points = total_steps_ + 1;
    for (auto* series : {&trace_.times, &trace_.front, &trace_.infected, &trace_.contagion, &trace_.compensator,
                         &trace_.martingale}) {
        series->reserve(points);
    }
    trace_.initial_positions.reserve(n);
    trace_.clocks.reserve(n);
    for (const auto& p : particles_) {
        trace_.initial_positions.push_back(p.position);
        trace_.clocks.push_back(p.clock);
    }
    if (config_.record_particles) {
        trace_.positions.reserve(points * n);
        trace_.local_time_increments.reserve(total_steps_ * n);
    }
    record_grid_point();
}

double Engine::time() const { return static_cast<double>(step_) * config_.dt; }

void Engine::record_grid_point() {
    const double i_prop = static_cast<double>(infected_count_) / static_cast<double>(config_.n);
    trace_.times.push_back(time());
    trace_.front.push_back(boundary_);
    trace_.infected.push_back(i_prop);
    trace_.contagion.push_back(contagion_);
    trace_.compensator.push_back(compensator_);
    trace_.martingale.push_back(i_prop - compensator_);
    if (config_.record_particles) {
        record_particles_at_grid();
    }
}

void Engine::record_particles_at_grid() {
    // Infected particles leave the system except in the globally reflected and barrier modes.
    const bool removes = !is_barnes(config_.mode) && !std::holds_alternative<GloballyReflectedMode>(config_.mode);
    for (const auto& p : particles_) {
        const bool gone = removes && p.status == Status::Infected;
        trace_.positions.push_back(gone ? std::numeric_limits<double>::quiet_NaN() : p.position);
    }
}

void Engine::step() {
    if (finished()) {
        return;
    }
    const std::size_t n = config_.n;
    const double dt = config_.dt;
    const double t = time();
    const double t_next = static_cast<double>(step_ + 1) * dt;
    const CoefficientSet& coeffs = config_.model.coefficients;
    const double rate = coeffs.rate_at(t, contagion_);

    const bool barnes = is_barnes(config_.mode);
    const bool keep_moving = barnes || std::holds_alternative<GloballyReflectedMode>(config_.mode);
    const auto* artificial = std::get_if<ArtificialMode>(&config_.mode);
    const std::size_t tagged = artificial != nullptr ? artificial->tagged : n;

    // Front for the step: epidemic modes use A(t_{k+1}) from infections known at t_k;
    // barrier modes integrate the velocity explicitly.
    const double boundary_next = barnes ? boundary_ + contagion_ * dt : front_.level(t_next);

    for_each_index(pool_, n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            ParticleState& p = particles_[i];
            step_local_time_[i] = 0.0;
            step_compensator_[i] = 0.0;
            step_barrier_push_[i] = 0.0;
            pending_[i] = 0;
            const bool susceptible = p.status == Status::Susceptible;
            if (!susceptible && !keep_moving) {
                continue;
            }
            const StepResult r = reflected_euler_step(p.position, t, dt, boundary_next, coeffs, noise_[i].normal());
            const double dh = rate * r.local_time;
            p.position = r.position;
            p.local_time += r.local_time;
            p.hazard += dh;
            step_local_time_[i] = r.local_time;
            if (susceptible) {
                step_compensator_[i] = -std::expm1(-dh);
                // Same grid compensator as V: the velocity loses the conditional
                // infection probability of the step, not the raw hazard.
                step_barrier_push_[i] = step_compensator_[i];
                pending_[i] = (i != tagged && p.hazard >= p.clock) ? 1 : 0;
            }
        }
    });

    // Sequential barrier: index-ordered reductions and infection bookkeeping.
    double compensator_increment = 0.0;
    double push = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        compensator_increment += step_compensator_[i];
        push += step_barrier_push_[i];
    }
    compensator_ += compensator_increment / static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        if (pending_[i] == 0) {
            continue;
        }
        ParticleState& p = particles_[i];
        p.status = Status::Infected;
        p.tau = t_next;
        ++infected_count_;
        trace_.infections.push_back({i, t_next, step_ + 1});
        if (!barnes) {
            front_.add_infection(t_next);
        }
    }
    if (config_.record_particles) {
        trace_.local_time_increments.insert(trace_.local_time_increments.end(), step_local_time_.begin(),
                                            step_local_time_.end());
    }

    ++step_;
    if (barnes) {
        boundary_ = boundary_next;
        if (const auto* tilde = std::get_if<BarnesTildeMode>(&config_.mode)) {
            contagion_ = contagion_ - tilde->kappa * (push / static_cast<double>(n));
        } else {
            const auto& bar = std::get<BarnesBarMode>(config_.mode);
            contagion_ = bar.u - static_cast<double>(infected_count_) / static_cast<double>(n);
        }
    } else {
        front_.retire(t_next);
        boundary_ = front_.level(t_next);
        contagion_ = front_.contagiousness(t_next);
    }
    record_grid_point();
}

void Engine::run_to_end() {
    while (!finished()) {
        step();
    }
}

void step_system(Engine& engine) { engine.step(); }

SystemTrace run(const RunConfig& config, ThreadPool* pool) {
    if (is_barnes(config.mode)) {
        throw ConfigError("run: barrier modes are handled by run_barnes");
    }
    Engine engine(config, pool);
    engine.run_to_end();
    return engine.take_trace();
}

SystemTrace run_barnes(const RunConfig& config, ThreadPool* pool) {
    if (!is_barnes(config.mode)) {
        throw ConfigError("run_barnes: mode must be barnes_tilde or barnes_bar");
    }
    Engine engine(config, pool);
    engine.run_to_end();
    return engine.take_trace();
}

}  // namespace epifront
