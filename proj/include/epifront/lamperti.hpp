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
#include <span>
#include <vector>

#include "epifront/coefficients.hpp"
#include "epifront/epidemic.hpp"
#include "epifront/rng.hpp"

namespace epifront {

/// Frozen environment for one tagged particle: the coefficients plus the
/// boundary and contagion paths of an artificial (-i) run, sampled on a
/// uniform grid and linearly interpolated between nodes.
struct TransformContext {
    CoefficientSet coefficients;
    double dt = 1e-3;
    std::vector<double> boundary;
    std::vector<double> contagion;
    /// Absolute tolerance for quadrature and root finding.
    double tolerance = 1e-13;

    double horizon() const;
    double boundary_at(double t) const;
    double contagion_at(double t) const;

    /// Environment taken from a run (ArtificialMinusI or GloballyReflected).
    static TransformContext from_trace(const SystemTrace& trace, const CoefficientSet& coefficients);
    /// Flat boundary at `level` with zero contagion.
    static TransformContext flat(const CoefficientSet& coefficients, double level, double horizon, double dt);
};

/// Upsilon(t, y) = int_0^y dx / sigma(t, x + A_t). Closed form when sigma does
/// not depend on the level, adaptive Gauss-Kronrod otherwise.
double upsilon(const TransformContext& ctx, double t, double y);

/// Inverse of y -> Upsilon(t, y) on [0, inf). Throws std::runtime_error if the
/// safeguarded Newton iteration fails to converge.
double upsilon_inverse(const TransformContext& ctx, double t, double z);

/// bbar(t, y) = -int_0^y d_t sigma / sigma^2 + b / sigma - (1/2) d_x sigma,
/// with every coefficient evaluated at level y + A_t.
double level_drift(const TransformContext& ctx, double t, double y);

/// btilde(t, z) = bbar(t, Upsilon^{-1}(t, z)).
double transformed_drift(const TransformContext& ctx, double t, double z);

/// Drift contributed by the moving frame over [t, t + dt]:
/// -(A_{t+dt} - A_t) / (sigma(t, A_t) dt). Exact for the projected scheme
/// when sigma is constant; zero for a flat boundary.
double frame_drift(const TransformContext& ctx, double t, double dt);

/// Constant C such that |btilde(t, z)| <= C (1 + z), from the catalog bounds
/// and the range of the boundary path.
double growth_constant(const TransformContext& ctx);

/// Reflected path with boundary local time and an elastic killing time.
struct KilledPath {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> positions;
    /// Cumulative regulator local time at each grid point.
    std::vector<double> local_time;
    double hazard = 0.0;
    double killing_time = std::numeric_limits<double>::infinity();

    bool alive_at(std::size_t grid) const { return times[grid] < killing_time; }
};

/// Reflected-at-zero Euler scheme for dZ = (btilde + frame) dt + dW + dl0,
/// killed once sum sigma(t, A_t) gamma(t, C_t) dl0 >= clock. The noise stream
/// is consumed one normal per step.
KilledPath simulate_Z(const TransformContext& ctx, double horizon, double dt, double z0, NoiseStream& noise,
                      double clock = std::numeric_limits<double>::infinity());

/// The tagged particle itself in the frozen environment: reflected Euler
/// against A, killed once sum gamma(t, C_t) dl >= clock.
KilledPath simulate_frozen_particle(const TransformContext& ctx, double horizon, double dt, double x0,
                                    NoiseStream& noise, double clock = std::numeric_limits<double>::infinity());

/// Drives the frozen particle X and Z = Upsilon(0, x0 - A_0) with the same
/// noise stream and returns max_k |Z_k - Upsilon(t_k, X_k - A_k)| over the
/// grid (no killing). Zero up to rounding when sigma is constant.
double pathwise_lamperti_gap(const TransformContext& ctx, double x0, double dt, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct RescalingRow {
    double dt = 0.0;
    std::size_t paths_with_contact = 0;
    /// sum_paths |l0(Upsilon) - int dl / sigma(., A)| / sum_paths int dl / sigma(., A).
    double mean_relative_error = 0.0;
    double mean_transformed_local_time = 0.0;
    double mean_weighted_local_time = 0.0;
    /// Same ratio using occupation-density estimates, one entry per eps.
    std::vector<double> occupation_relative_error;
};

struct RescalingReport {
    std::vector<double> epsilons;
    std::vector<RescalingRow> rows;
    /// Regulator-based error strictly decreases along the dt ladder.
    bool decreasing = false;
};

/// Simulates reflected X against the frozen boundary and compares the
/// regulator local time at zero of Upsilon(t, X_t - A_t) (the residual of its
/// semimartingale decomposition) with int d_x Upsilon(s, 0) dl_s(X).
RescalingReport local_time_rescaling_check(const TransformContext& ctx, double x0, std::size_t paths,
                                           std::span<const double> dts, std::span<const double> epsilons,
                                           std::uint64_t seed);

struct LawProbe {
    double t = 0.0;
    std::size_t particle_survivors = 0;
    std::size_t z_survivors = 0;
    double ks_statistic = 0.0;
    double p_value = 1.0;
};

struct LawReport {
    std::vector<LawProbe> probes;
    std::size_t paths = 0;
    double min_p_value = 1.0;
    bool consistent = true;
};

/// Two-sample KS comparison, at each probe time, of Upsilon(t, X_t - A_t) over
/// surviving tagged-particle paths against Z_t over surviving Z paths. Both
/// families use fresh, independent noise and clocks.
LawReport lamperti_law_check(const TransformContext& ctx, double x0, std::size_t paths, double dt,
                             std::span<const double> probe_times, std::uint64_t seed, double level = 0.01);

}  // namespace epifront
