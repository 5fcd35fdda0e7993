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
#include <ostream>
#include <string>

#include <json.hpp>

#include "epifront/scenario.hpp"

namespace epifront {

class ThreadPool;

namespace cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTestFailure = 1;
inline constexpr int kExitConfigError = 2;

struct SuiteOptions {
    /// Doubles the compensator before forming M (negative control for "martingale").
    bool corrupt_v = false;
    /// Overrides the suite's replication or path count when nonzero.
    std::size_t replications = 0;
};

struct SuiteOutcome {
    bool passed = false;
    nlohmann::json report;
};

/// Names accepted by run_suite, in display order.
const char* const* suite_names();

/// Runs one validation suite at its acceptance-scale parameters on the model
/// of `scenario`. Throws std::invalid_argument for an unknown suite name and
/// ConfigError when the scenario does not suit the suite.
SuiteOutcome run_suite(const std::string& name, const Scenario& scenario, const SuiteOptions& options,
                       ThreadPool* pool);

/// Entry point of the command-line tool. Returns the process exit code.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cli
}  // namespace epifront
