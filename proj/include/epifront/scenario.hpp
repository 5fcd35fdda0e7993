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

#include <stdexcept>
#include <string>
#include <string_view>

#include "epifront/epidemic.hpp"

namespace epifront {

/// Malformed scenario text: syntax errors, unknown sections or keys, bad values.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A run configuration plus where and how to write its outputs.
///
/// The text form is a small fixed-schema subset of TOML:
///
///   [kernel]     family = "uniform" | "truncated_weibull" | "tapered_uniform"
///                dbar, shape, scale (weibull), taper (tapered_uniform)
///   [drift]      family = "constant" (mu) | "mean_reverting" (theta, m)
///   [diffusion]  family = "constant" (c) | "time_modulated" (c0, amplitude, frequency)
///                       | "space_modulated" (c0, amplitude, center, width)
///   [rate]       family = "constant" (g) | "affine" (g0, g1)
///   [initial]    family = "point" (x0) | "truncated_gaussian" (mean, stdev)
///   [run]        n, T, dt, seed, a0, alpha,
///                mode = "true" | "globally_reflected" | "artificial" (tagged)
///                     | "barnes_tilde" (u, kappa) | "barnes_bar" (u)
///   [output]     directory = "...", format = "csv" | "json"     (optional)
///
/// Every section except [output] is required, as is each `family` and `mode`.
/// Parameters left out take their catalog defaults. Keys that do not belong
/// to the chosen family are rejected.
struct Scenario {
    RunConfig config;
    bool has_output = false;
    std::string output_directory = ".";
    std::string output_format = "csv";

    bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Canonical text form; numbers use the shortest round-trip decimal so that
/// parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// The reference scenario: tapered-uniform kernel (dbar 0.5, taper 0.05),
/// alpha 0.5, a0 0, sigma 1, zero drift, gamma(t, c) = 5 + 20 c, start at 0.3,
/// T 1, dt 1e-3, n 128.
Scenario default_scenario();

/// Renders a double with 17 significant digits.
std::string format_double(double value);

}  // namespace epifront
