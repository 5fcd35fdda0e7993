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
#include <string>
#include <vector>

#include "epifront/epidemic.hpp"

namespace epifront {

class ThreadPool;

struct InvariantCheck {
    std::string name;
    bool passed = true;
    std::size_t violations = 0;
    std::string detail;
};

struct InvariantReport {
    std::vector<InvariantCheck> checks;

    bool ok() const;
    const InvariantCheck* find(const std::string& name) const;
};

/// Structural checks on one recorded trace (record_particles must be set):
///   front_monotone         A nondecreasing, A(0) = a0, A <= a0 + alpha I <= a0 + alpha
///   susceptible_above      every not-yet-infected position >= A at every grid time
///   complementarity        dl >= 0 and dl > 0 only when the particle ends the step on A
///   infection_jumps        I jumps by exactly (#infections in the step)/n
///   compensator            V(0) = 0, M(0) = 0, V nondecreasing, M = I - V
///   contagion_quadrature   closed-form C equals the defining convolution integral
///                          (adaptive quadrature of the kernel density) within 1e-6
///                          at `probes` uniformly drawn times
/// Results are appended to `report`, one entry per check name.
void check_trace_invariants(const RunConfig& config, const SystemTrace& trace, std::size_t probes,
                            std::uint64_t probe_seed, InvariantReport& report);

/// Coupling checks over the given seeds:
///   coupling_artificial    for every i, the paths of j != i in True and
///                          ArtificialMinusI{i} agree exactly before tau_i, and so
///                          do the infections that happen before tau_i
///   coupling_global        GloballyReflected has the same infection times as True
///                          and each path agrees with its True path before its own tau
void check_coupling(const RunConfig& config, std::span<const std::uint64_t> seeds, InvariantReport& report,
                    ThreadPool* pool = nullptr);

/// Full suite: trace checks on `trace_seeds` runs of `config`, then the
/// coupling checks on a copy of `config` shrunk to `coupling_n` particles.
InvariantReport invariant_suite(const RunConfig& config, std::size_t trace_seeds, std::size_t coupling_n,
                                std::size_t coupling_seeds, ThreadPool* pool = nullptr);

}  // namespace epifront
