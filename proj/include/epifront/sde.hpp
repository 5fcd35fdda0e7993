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

#include <span>

#include "epifront/coefficients.hpp"

namespace epifront {

/// Outcome of one projected Euler step against a lower boundary.
struct StepResult {
    double position = 0.0;
    /// Skorokhod regulator increment: the push needed to stay on or above the boundary.
    double local_time = 0.0;
    /// Unconstrained Euler update before projection.
    double free_position = 0.0;
};

/// One reflected Euler-Maruyama step:
///   x* = x + b(t,x) dt + sigma(t,x) sqrt(dt) xi,
///   x' = max(x*, boundary_next),  dl = x' - x*.
/// Throws std::invalid_argument on non-finite input or dt <= 0.
StepResult reflected_euler_step(double x, double t, double dt, double boundary_next,
                                const CoefficientSet& coefficients, double xi);

/// Occupation-density local time estimate
///   (1/eps) sum_k 1{boundary_k <= path_k < boundary_k + eps} sigma(t_k, path_k)^2 dt
/// over the grid t_k = k dt, k = 0 .. size-2 (left-point rule).
/// Throws std::invalid_argument if eps <= 0 or the two samples differ in length.
double occupation_local_time(std::span<const double> path, std::span<const double> boundary, double dt,
                             double eps, const CoefficientSet& coefficients);

}  // namespace epifront
