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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "epifront/coefficients.hpp"
#include "epifront/rng.hpp"

namespace epifront {

class ThreadPool;

/// Raised when a run configuration fails validation.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what, ValidationReport report = {})
        : std::invalid_argument(what), report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// Model inputs shared by every run mode. The front starts at initial.a0.
struct ModelSpec {
    KernelSpec kernel;
    CoefficientSet coefficients;
    InitialLaw initial;
    double alpha = 0.0;

    double a0() const { return initial.a0; }
    bool operator==(const ModelSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Advancing front and contagiousness
// ---------------------------------------------------------------------------

/// Infection history driving the front
///   A(t) = a0 + (alpha/n) sum_{tau_j <= t} P(t - tau_j)
/// and the contagiousness
///   C(t) = (1/n) sum_{tau_j <= t} [P(t - tau_j) - P(t - tau_j - dbar)].
///
/// Infections must be added in nondecreasing time order. Entries whose
/// contribution has become constant are skipped once `retire(t)` is called;
/// the skipped terms are summed first as exact integers, so the result is
/// bit-identical to the full ordered sum.
class FrontState {
public:
    FrontState(KernelSpec kernel, double a0, double alpha, std::size_t n);

    void add_infection(double tau);
    /// Marks entries settled at time t. Later queries must use times >= t.
    void retire(double t);

    double level(double t) const;
    double contagiousness(double t) const;

    const std::vector<double>& infection_times() const { return taus_; }
    const KernelSpec& kernel() const { return kernel_; }
    double a0() const { return a0_; }
    double alpha() const { return alpha_; }
    std::size_t population() const { return n_; }

private:
    KernelSpec kernel_;
    double a0_;
    double alpha_;
    std::size_t n_;
    std::vector<double> taus_;
    std::size_t settled_ = 0;  // entries with t - tau >= dbar
    std::size_t expired_ = 0;  // entries with t - tau >= 2 dbar
};

/// Closed-form front level from a sorted infection list.
double front_level(const FrontState& front, double t);
/// Closed-form current contagiousness from a sorted infection list.
double contagiousness(const FrontState& front, double t);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct TrueMode {
    bool operator==(const TrueMode&) const = default;
};
/// Particles keep reflecting after their clock fires; infection times still drive the front.
struct GloballyReflectedMode {
    bool operator==(const GloballyReflectedMode&) const = default;
};
/// The tagged particle reflects forever, is never infected and never feeds the front.
struct ArtificialMode {
    std::size_t tagged = 0;
    bool operator==(const ArtificialMode&) const = default;
};
/// Newtonian barrier with velocity u - (kappa/n) sum int 1{s < tau} gamma(s, U_s) dl.
struct BarnesTildeMode {
    double u = 0.0;
    double kappa = 1.0;
    bool operator==(const BarnesTildeMode&) const = default;
};
/// Newtonian barrier with velocity u - (1/n) #{tau <= t}.
struct BarnesBarMode {
    double u = 0.0;
    bool operator==(const BarnesBarMode&) const = default;
};

using RunMode = std::variant<TrueMode, GloballyReflectedMode, ArtificialMode, BarnesTildeMode, BarnesBarMode>;

bool is_barnes(const RunMode& mode);

struct RunConfig {
    ModelSpec model;
    std::size_t n = 1;
    double horizon = 1.0;
    double dt = 1e-3;
    RunMode mode = TrueMode{};
    std::uint64_t seed = 0;
    /// Keep per-particle positions and local-time increments in the trace.
    bool record_particles = false;

    std::size_t steps() const;
    bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError if the configuration is not runnable.
void validate_run_config(const RunConfig& config);

// ---------------------------------------------------------------------------
// State and trace
// ---------------------------------------------------------------------------

enum class Status { Susceptible, Infected };

struct ParticleState {
    Status status = Status::Susceptible;
    double position = 0.0;
    double tau = std::numeric_limits<double>::infinity();
    double local_time = 0.0;
    double hazard = 0.0;
    double clock = 0.0;
};

struct InfectionEvent {
    std::size_t particle = 0;
    double tau = 0.0;
    /// Grid index of tau.
    std::size_t step = 0;
};

/// Grid record of one run. For epidemic modes `front` is A and `contagion`
/// is C; for barrier modes they hold the barrier position Y and velocity U.
struct SystemTrace {
    std::size_t n = 0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> front;
    std::vector<double> infected;
    std::vector<double> contagion;
    std::vector<double> compensator;
    std::vector<double> martingale;
    std::vector<InfectionEvent> infections;
    std::vector<double> initial_positions;
    std::vector<double> clocks;

    /// Row-major [grid index][particle], present when record_particles was set.
    /// Positions are NaN once a particle has been removed.
    std::vector<double> positions;
    /// Row-major [step][particle]; step k covers [t_k, t_{k+1}].
    std::vector<double> local_time_increments;

    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
    bool has_particle_data() const { return !local_time_increments.empty(); }
    double position(std::size_t grid, std::size_t particle) const { return positions[grid * n + particle]; }
    double local_time_increment(std::size_t step, std::size_t particle) const {
        return local_time_increments[step * n + particle];
    }
    /// Infection time of particle i, or +inf.
    double tau_of(std::size_t particle) const;
    /// Number of infections applied at each step (size steps()).
    std::vector<std::size_t> infections_per_step() const;
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

/// Time-stepping engine for the particle system and its barrier variants.
///
/// One step from t_k to t_{k+1}:
///   1. contagion c = C(t_k) (or U_k) and rate g = gamma(t_k, c);
///   2. boundary for the step is A(t_{k+1}) from infections known at t_k (or Y_k + U_k dt);
///   3. every moving particle takes a reflected Euler step and accrues dH = g dl;
///   4. particles with H >= clock are infected at t_{k+1}, applied in index order.
/// Step 3 may run on a thread pool; steps 1, 2 and 4 are sequential, so the
/// result does not depend on the worker count.
class Engine {
public:
    explicit Engine(const RunConfig& config, ThreadPool* pool = nullptr);

    void step();
    void run_to_end();

    bool finished() const { return step_ >= total_steps_; }
    std::size_t step_index() const { return step_; }
    double time() const;
    double boundary() const { return boundary_; }
    double contagion() const { return contagion_; }

    const RunConfig& config() const { return config_; }
    const std::vector<ParticleState>& particles() const { return particles_; }
    const FrontState& front_state() const { return front_; }

    const SystemTrace& trace() const { return trace_; }
    SystemTrace take_trace() { return std::move(trace_); }

private:
    void record_grid_point();
    void record_particles_at_grid();

    RunConfig config_;
    ThreadPool* pool_;
    std::size_t total_steps_;
    std::size_t step_ = 0;
    FrontState front_;
    std::vector<ParticleState> particles_;
    std::vector<NoiseStream> noise_;
    std::vector<double> step_local_time_;
    std::vector<double> step_compensator_;
    std::vector<double> step_barrier_push_;
    std::vector<unsigned char> pending_;
    std::size_t infected_count_ = 0;
    double boundary_;
    double contagion_;
    double compensator_ = 0.0;
    SystemTrace trace_;
};

/// Advances the engine by one grid step.
void step_system(Engine& engine);

/// Full run of an epidemic mode (True, GloballyReflected, ArtificialMinusI).
SystemTrace run(const RunConfig& config, ThreadPool* pool = nullptr);

/// Full run of a barrier mode. Requires zero drift and unit diffusion.
SystemTrace run_barnes(const RunConfig& config, ThreadPool* pool = nullptr);

}  // namespace epifront
