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

namespace epifront::stats {

double mean(std::span<const double> xs);
/// Unbiased sample variance; 0 for fewer than two samples.
double variance(std::span<const double> xs);
/// Standard error of the mean.
double standard_error(std::span<const double> xs);

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    /// Two-sided p-value of H0: slope = 0 (Student t, n - 2 dof). 1 when undefined.
    double p_value = 1.0;
    /// False when x has no spread.
    bool defined = false;
};

/// Ordinary least squares y = a + b x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample KS test against the standard normal distribution.
KsResult ks_normal(std::vector<double> sample);
/// Two-sample KS test.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double normal_cdf(double x);

/// Pearson correlation.
double correlation(std::span<const double> x, std::span<const double> y);

}  // namespace epifront::stats
