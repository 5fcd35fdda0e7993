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
#include <span>
#include <vector>

#include "epifront/epidemic.hpp"

namespace epifront {

class ThreadPool;

// ---------------------------------------------------------------------------
// Local-time average and hazards
// ---------------------------------------------------------------------------

/// How one step of hazard dH = gamma dl enters the compensator of I.
///   Linear:      dV = dH                 (the continuous-time integrand)
///   Exponential: dV = 1 - exp(-dH)       (the exact compensator of the grid
///                                        infection rule H >= clock)
/// Both agree to O(dH^2) per step. The engine's trace uses Exponential.
enum class CompensatorForm { Exponential, Linear };

/// V_{t_k} = (1/n) sum_i sum_{m<k} 1{t_m < tau_i} f(gamma(t_m, C_m) dl_{i,m}).
/// Requires per-particle data in the trace; throws std::invalid_argument otherwise.
std::vector<double> compute_V(const SystemTrace& trace, const CoefficientSet& coefficients,
                              CompensatorForm form = CompensatorForm::Exponential);

/// Cumulative hazard H_{t_k} = sum_{m<k} gamma(t_m, C_m) dl_{i,m} of one particle.
std::vector<double> cumulative_hazard(const SystemTrace& trace, const CoefficientSet& coefficients,
                                      std::size_t particle);

/// Grid index of time t; throws if t is off the run's horizon.
std::size_t grid_index(const RunConfig& config, double t);

// ---------------------------------------------------------------------------
// Martingale test
// ---------------------------------------------------------------------------

struct ProbePair {
    double s = 0.0;
    double t = 0.0;
};

struct ProbeStatistics {
    ProbePair probe;
    double mean_increment = 0.0;
    double standard_error = 0.0;
    double regression_slope = 0.0;
    double regression_p_value = 1.0;
    bool mean_ok = true;
    bool slope_ok = true;
};

struct MartingaleReport {
    std::vector<ProbeStatistics> probes;
    std::size_t replications = 0;
    bool consistent = true;
};

struct MartingaleOptions {
    /// Multiplies V before forming M = I - V; 1 leaves it untouched (2 is the negative control).
    double compensator_scale = 1.0;
    double significance = 0.01;
    ThreadPool* pool = nullptr;
};

/// Replicates the run with seeds derived from config.seed and tests, per probe
/// pair, |mean(M_t - M_s)| <= 3 SE and an insignificant slope of M_t - M_s on M_s.
MartingaleReport martingale_test(const RunConfig& config, std::size_t replications,
                                 std::span<const ProbePair> probes, const MartingaleOptions& options = {});

// ---------------------------------------------------------------------------
// L2 decay
// ---------------------------------------------------------------------------

struct DecayFit {
    std::vector<std::size_t> sizes;
    /// Monte Carlo estimate of E[sup_{s<=T} |M_s|^2] per size.
    std::vector<double> estimates;
    std::vector<double> standard_errors;
    double slope = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t replications = 0;
    /// True when some estimate is zero and no log-log fit exists.
    bool degenerate = false;
};

struct DecayOptions {
    std::size_t bootstrap_resamples = 1000;
    std::uint64_t bootstrap_seed = 0x5eed;
    ThreadPool* pool = nullptr;
};

/// Log-log least-squares slope of E[sup|M^n|^2] against n with a percentile bootstrap CI (95%).
DecayFit l2_decay(const RunConfig& config, std::span<const std::size_t> sizes, std::size_t replications,
                  const DecayOptions& options = {});

// ---------------------------------------------------------------------------
// Ties
// ---------------------------------------------------------------------------

struct TieRow {
    double dt = 0.0;
    std::size_t steps = 0;
    std::size_t tie_steps = 0;
    std::size_t infections = 0;
    double fraction = 0.0;
};

struct TieTable {
    std::vector<TieRow> rows;
    /// Fractions strictly decrease along the dt ladder (as given, coarse to fine).
    bool decreasing = false;
};

/// Fraction of grid steps carrying two or more infections, per step size.
TieTable tie_stats(const RunConfig& config, std::span<const double> dts, std::size_t replications,
                   ThreadPool* pool = nullptr);

// ---------------------------------------------------------------------------
// Conditional infection law
// ---------------------------------------------------------------------------

struct TauLawProbe {
    double t = 0.0;
    double empirical_cdf = 0.0;
    double empirical_se = 0.0;
    double hazard_estimate = 0.0;
    double hazard_se = 0.0;
    double combined_se = 0.0;
    double discrepancy = 0.0;
    bool ok = true;
};

struct TauLawReport {
    std::size_t tagged = 0;
    std::size_t replications = 0;
    std::vector<TauLawProbe> probes;
    double max_discrepancy = 0.0;
    bool consistent = true;
};

/// Compares P(tau_i <= t) from True runs with mean(1 - exp(-int gamma(s, C^{(-i)}) dl^{(-i)}))
/// along coupled ArtificialMinusI runs sharing every seed. Requires n <= 8.
TauLawReport tau_law_check(const RunConfig& config, std::size_t tagged, std::size_t replications,
                           std::span<const double> probe_times, ThreadPool* pool = nullptr);

// ---------------------------------------------------------------------------
// Effective reproduction number
// ---------------------------------------------------------------------------

struct EffectiveR {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t replications = 0;
    std::size_t susceptible = 0;
    double front = 0.0;
};

/// Runs config to time t, then continues the susceptible particles over
/// [t, t + dbar] with contagiousness frozen at 1/n and the front advanced only
/// by one infection's own contribution, A_t + (alpha/n) P(s - t). Returns the
/// mean of sum_i gamma(s, 1/n) dl_i accumulated until each particle's own
/// (fresh) clock fires.
EffectiveR effective_R(const RunConfig& config, double t, std::size_t replications,
                       std::uint64_t continuation_seed, ThreadPool* pool = nullptr);

// ---------------------------------------------------------------------------
// Barrier variants
// ---------------------------------------------------------------------------

struct BarnesComparison {
    std::vector<std::size_t> sizes;
    /// Mean over replications of sup_t |Y^Tilde - Y^Bar| under common noise, per size.
    std::vector<double> mean_sup_gap;
    std::vector<double> standard_errors;
    std::size_t replications = 0;
    /// Means strictly decrease along `sizes`.
    bool decreasing = false;
};

/// Runs BarnesTilde{u, kappa} and BarnesBar{u} with a shared seed for each
/// replication and size. u and kappa come from config.mode when it is a
/// barrier mode; otherwise `u` is used with kappa 1.
BarnesComparison barnes_comparison(const RunConfig& config, std::span<const std::size_t> sizes,
                                   std::size_t replications, double u = 1.0, ThreadPool* pool = nullptr);

// ---------------------------------------------------------------------------
// Deterministic SIR baseline
// ---------------------------------------------------------------------------

struct SirState {
    double t = 0.0;
    double infected = 0.0;
    double contagion = 0.0;
    double susceptible = 1.0;
    double r0 = 0.0;
    double r_effective = 0.0;
};

/// RK4 for dI/dt = beta S C, dC/dt = dI/dt - C/dbar with S = 1 - I.
/// Throws std::invalid_argument on beta < 0, dbar <= 0, I0 outside [0,1], dt <= 0.
std::vector<SirState> sir_integrate(double beta, double dbar, double i0, double c0, double horizon, double dt);

}  // namespace epifront
