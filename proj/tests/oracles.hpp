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

// Independent numerical references used by the tests. Nothing here calls into
// the library's own quadrature, root finding or closed forms.

#include <cmath>
#include <functional>

namespace oracle {

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                      int depth = 50) {
    if (b <= a) {
        return 0.0;
    }
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Adaptive Simpson over [a, b] split at the given interior break points,
/// for integrands with kinks.
inline double simpson_pieces(const std::function<double(double)>& f, std::initializer_list<double> cuts,
                             double tol = 1e-13) {
    double total = 0.0;
    const double* prev = nullptr;
    for (const double& c : cuts) {
        if (prev != nullptr && c > *prev) {
            total += simpson(f, *prev, c, tol);
        }
        prev = &c;
    }
    return total;
}

/// Central finite difference of f at x with step h.
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Weibull(k, lambda) density, straight from the textbook formula.
inline double weibull_pdf(double k, double lambda, double u) {
    if (u < 0.0) {
        return 0.0;
    }
    const double z = u / lambda;
    return k / lambda * std::pow(z, k - 1.0) * std::exp(-std::pow(z, k));
}

inline double weibull_cdf(double k, double lambda, double u) {
    return u <= 0.0 ? 0.0 : 1.0 - std::exp(-std::pow(u / lambda, k));
}

}  // namespace oracle
