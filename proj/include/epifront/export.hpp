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

#include <cstdint>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "epifront/analysis.hpp"
#include "epifront/epidemic.hpp"

namespace epifront {

/// Columns t, A, I, C, V, M; one row per grid time, 17 significant digits.
void write_trace_csv(std::ostream& out, const SystemTrace& trace);

/// Columns particle, tau; one row per infection in order of occurrence.
void write_infections_csv(std::ostream& out, const SystemTrace& trace);

/// Columns t, S, I, C, R0, R0_S with R0 = beta dbar and R0_S = beta dbar S_t.
void write_sir_csv(std::ostream& out, const std::vector<SirState>& series);

/// The trace columns and the infection list as one JSON document.
nlohmann::json trace_json(const SystemTrace& trace);

/// Final I, max |M|, wall-clock runtime and seed of one run.
nlohmann::json summary_json(const SystemTrace& trace, std::uint64_t seed, double runtime_seconds);

}  // namespace epifront
