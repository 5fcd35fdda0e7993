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

#include "epifront/sde.hpp"

#include <cmath>
#include <stdexcept>

namespace epifront {

StepResult reflected_euler_step(double x, double t, double dt, double boundary_next,
                                const CoefficientSet& coefficients, double xi) {
    if (!std::isfinite(x) || !std::isfinite(t) || !std::isfinite(dt) || !std::isfinite(boundary_next) ||
        !std::isfinite(xi)) {
        throw std::invalid_argument("reflected_euler_step: non-finite input");
    }
    if (dt <= 0.0) {
        throw std::invalid_argument("reflected_euler_step: dt must be positive");
    }
    StepResult r;
    r.free_position = x + coefficients.drift_at(t, x) * dt + coefficients.sigma(t, x) * std::sqrt(dt) * xi;
    if (r.free_position < boundary_next) {
        r.position = boundary_next;
        r.local_time = boundary_next - r.free_position;
    } else {
        r.position = r.free_position;
        r.local_time = 0.0;
    }
    return r;
}

double occupation_local_time(std::span<const double> path, std::span<const double> boundary, double dt,
                             double eps, const CoefficientSet& coefficients) {
    if (!(eps > 0.0)) {
        throw std::invalid_argument("occupation_local_time: eps must be positive");
    }
    if (path.size() != boundary.size()) {
        throw std::invalid_argument("occupation_local_time: path and boundary grids differ");
    }
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double x = path[k];
        if (boundary[k] <= x && x < boundary[k] + eps) {
            const double s = coefficients.sigma(static_cast<double>(k) * dt, x);
            total += s * s * dt;
        }
    }
    return total / eps;
}

}  // namespace epifront
