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

#include "epifront/export.hpp"

#include <algorithm>
#include <cmath>

#include "epifront/scenario.hpp"

namespace epifront {

namespace {

/// Writes a value followed by a separator, using the scenario number format.
void cell(std::ostream& out, double value, char sep) { out << format_double(value) << sep; }

}  // namespace

void write_trace_csv(std::ostream& out, const SystemTrace& trace) {
    out << "t,A,I,C,V,M\n";
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        cell(out, trace.times[k], ',');
        cell(out, trace.front[k], ',');
        cell(out, trace.infected[k], ',');
        cell(out, trace.contagion[k], ',');
        cell(out, trace.compensator[k], ',');
        cell(out, trace.martingale[k], '\n');
    }
}

void write_infections_csv(std::ostream& out, const SystemTrace& trace) {
    out << "particle,tau\n";
    for (const auto& ev : trace.infections) {
        out << ev.particle << ',';
        cell(out, ev.tau, '\n');
    }
}

void write_sir_csv(std::ostream& out, const std::vector<SirState>& series) {
    out << "t,S,I,C,R0,R0_S\n";
    for (const auto& s : series) {
        cell(out, s.t, ',');
        cell(out, s.susceptible, ',');
        cell(out, s.infected, ',');
        cell(out, s.contagion, ',');
        cell(out, s.r0, ',');
        cell(out, s.r_effective, '\n');
    }
}

nlohmann::json trace_json(const SystemTrace& trace) {
    nlohmann::json j;
    j["t"] = trace.times;
    j["A"] = trace.front;
    j["I"] = trace.infected;
    j["C"] = trace.contagion;
    j["V"] = trace.compensator;
    j["M"] = trace.martingale;
    auto& infections = j["infections"] = nlohmann::json::array();
    for (const auto& ev : trace.infections) {
        infections.push_back({{"particle", ev.particle}, {"tau", ev.tau}});
    }
    return j;
}

nlohmann::json summary_json(const SystemTrace& trace, std::uint64_t seed, double runtime_seconds) {
    double max_m = 0.0;
    for (double m : trace.martingale) {
        max_m = std::max(max_m, std::abs(m));
    }
    nlohmann::json j;
    j["final_I"] = trace.infected.empty() ? 0.0 : trace.infected.back();
    j["max_abs_M"] = max_m;
    j["infections"] = trace.infections.size();
    j["n"] = trace.n;
    j["steps"] = trace.steps();
    j["runtime_seconds"] = runtime_seconds;
    j["seed"] = seed;
    return j;
}

}  // namespace epifront
