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

#include "epifront/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>

#include "epifront/analysis.hpp"
#include "epifront/export.hpp"
#include "epifront/invariants.hpp"
#include "epifront/lamperti.hpp"
#include "epifront/parallel.hpp"

namespace epifront::cli {

using nlohmann::json;

namespace {

constexpr const char* kSuites[] = {"invariants", "martingale", "decay", "tau-law", "lamperti", "ties", "barnes", nullptr};

std::size_t pick(std::size_t override_value, std::size_t fallback) {
    return override_value != 0 ? override_value : fallback;
}

json to_json(const ValidationReport& report) {
    json entries = json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"condition", e.condition}, {"status", to_string(e.status)}, {"detail", e.detail}});
    }
    return {{"ok", report.ok()}, {"lamperti_eligible", report.lamperti_eligible}, {"entries", entries}};
}

json to_json(const InvariantReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back(
            {{"name", c.name}, {"passed", c.passed}, {"violations", c.violations}, {"detail", c.detail}});
    }
    return {{"passed", report.ok()}, {"checks", checks}};
}

json to_json(const MartingaleReport& report) {
    json probes = json::array();
    for (const auto& p : report.probes) {
        probes.push_back({{"s", p.probe.s},
                          {"t", p.probe.t},
                          {"mean_increment", p.mean_increment},
                          {"standard_error", p.standard_error},
                          {"regression_slope", p.regression_slope},
                          {"regression_p_value", p.regression_p_value},
                          {"mean_ok", p.mean_ok},
                          {"slope_ok", p.slope_ok}});
    }
    return {{"replications", report.replications}, {"consistent", report.consistent}, {"probes", probes}};
}

json to_json(const DecayFit& fit) {
    return {{"sizes", fit.sizes},
            {"estimates", fit.estimates},
            {"standard_errors", fit.standard_errors},
            {"slope", fit.slope},
            {"ci_low", fit.ci_low},
            {"ci_high", fit.ci_high},
            {"replications", fit.replications},
            {"degenerate", fit.degenerate}};
}

json to_json(const TieTable& table) {
    json rows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"dt", r.dt},
                        {"steps", r.steps},
                        {"tie_steps", r.tie_steps},
                        {"infections", r.infections},
                        {"fraction", r.fraction}});
    }
    return {{"decreasing", table.decreasing}, {"rows", rows}};
}

json to_json(const TauLawReport& report) {
    json probes = json::array();
    for (const auto& p : report.probes) {
        probes.push_back({{"t", p.t},
                          {"empirical_cdf", p.empirical_cdf},
                          {"empirical_se", p.empirical_se},
                          {"hazard_estimate", p.hazard_estimate},
                          {"hazard_se", p.hazard_se},
                          {"combined_se", p.combined_se},
                          {"discrepancy", p.discrepancy},
                          {"ok", p.ok}});
    }
    return {{"tagged", report.tagged},
            {"replications", report.replications},
            {"max_discrepancy", report.max_discrepancy},
            {"consistent", report.consistent},
            {"probes", probes}};
}

json to_json(const BarnesComparison& cmp) {
    return {{"sizes", cmp.sizes},
            {"mean_sup_gap", cmp.mean_sup_gap},
            {"standard_errors", cmp.standard_errors},
            {"replications", cmp.replications},
            {"decreasing", cmp.decreasing}};
}

json to_json(const RescalingReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"dt", r.dt},
                        {"paths_with_contact", r.paths_with_contact},
                        {"mean_relative_error", r.mean_relative_error},
                        {"mean_transformed_local_time", r.mean_transformed_local_time},
                        {"mean_weighted_local_time", r.mean_weighted_local_time},
                        {"occupation_relative_error", r.occupation_relative_error}});
    }
    return {{"epsilons", report.epsilons}, {"decreasing", report.decreasing}, {"rows", rows}};
}

json to_json(const LawReport& report) {
    json probes = json::array();
    for (const auto& p : report.probes) {
        probes.push_back({{"t", p.t},
                          {"particle_survivors", p.particle_survivors},
                          {"z_survivors", p.z_survivors},
                          {"ks_statistic", p.ks_statistic},
                          {"p_value", p.p_value}});
    }
    return {{"paths", report.paths},
            {"min_p_value", report.min_p_value},
            {"consistent", report.consistent},
            {"probes", probes}};
}

/// Frozen environment from an ArtificialMinusI{0} run, plus the tagged start.
struct Environment {
    TransformContext ctx;
    double x0 = 0.0;
};

Environment artificial_environment(RunConfig config, ThreadPool* pool) {
    config.mode = ArtificialMode{0};
    config.record_particles = false;
    const SystemTrace trace = run(config, pool);
    return {TransformContext::from_trace(trace, config.model.coefficients), trace.initial_positions.at(0)};
}

struct LampertiSettings {
    std::size_t law_paths = 10000;
    std::size_t rescaling_paths = 1000;
    std::size_t pathwise_seeds = 100;
};

/// Pathwise gap, law check and local-time rescaling on one environment.
json lamperti_block(const RunConfig& config, const LampertiSettings& settings, ThreadPool* pool, bool& passed) {
    const Environment env = artificial_environment(config, pool);
    const double horizon = env.ctx.horizon();
    const double dt = config.dt;

    double gap = 0.0;
    for (std::size_t s = 0; s < settings.pathwise_seeds; ++s) {
        gap = std::max(gap, pathwise_lamperti_gap(env.ctx, env.x0, dt, derive_seed(config.seed ^ 0x1a, s)));
    }
    const bool constant_sigma =
        config.model.coefficients.sigma_space_independent() && config.model.coefficients.sigma_time_independent();

    const std::vector<double> probes{0.25 * horizon, 0.5 * horizon, horizon};
    const LawReport law =
        lamperti_law_check(env.ctx, env.x0, settings.law_paths, dt, probes, derive_seed(config.seed, 0x1b));

    const std::vector<double> dts{2.0 * dt, dt, 0.5 * dt};
    const std::vector<double> eps{0.05, 0.02, 0.01};
    const RescalingReport rescaling =
        local_time_rescaling_check(env.ctx, env.x0, settings.rescaling_paths, dts, eps, derive_seed(config.seed, 0x1c));

    const bool pathwise_ok = !constant_sigma || gap <= 1e-12;
    // With constant sigma the identity holds step by step, so the errors sit at
    // rounding level and need not decrease.
    bool rescaling_exact = true;
    for (const auto& row : rescaling.rows) {
        rescaling_exact = rescaling_exact && row.mean_relative_error <= 1e-12;
    }
    const bool rescaling_ok = rescaling.decreasing || rescaling_exact;
    passed = pathwise_ok && law.consistent && rescaling_ok;
    return {{"tagged_start", env.x0},
            {"growth_constant", growth_constant(env.ctx)},
            {"pathwise", {{"max_gap", gap}, {"constant_sigma", constant_sigma}, {"ok", pathwise_ok}}},
            {"law", to_json(law)},
            {"rescaling", to_json(rescaling)},
            {"rescaling_ok", rescaling_ok},
            {"passed", passed}};
}

RunConfig epidemic_config(const Scenario& scenario) {
    RunConfig c = scenario.config;
    if (is_barnes(c.mode)) {
        c.mode = TrueMode{};
    }
    return c;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) {
            throw std::invalid_argument("bad list item '" + item + "'");
        }
        out.push_back(v);
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_list(text)) {
        if (!(v >= 1.0) || v != std::floor(v)) {
            throw std::invalid_argument("population sizes must be positive integers");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void emit(std::ostream& out, const json& report, const std::string& path) {
    out << report.dump(2) << '\n';
    if (!path.empty()) {
        std::ofstream file(path);
        if (!file) {
            throw std::runtime_error("cannot write report to '" + path + "'");
        }
        file << report.dump(2) << '\n';
    }
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    return file;
}

}  // namespace

const char* const* suite_names() { return kSuites; }

SuiteOutcome run_suite(const std::string& name, const Scenario& scenario, const SuiteOptions& options,
                       ThreadPool* pool) {
    RunConfig base = epidemic_config(scenario);
    const double horizon = base.horizon;
    SuiteOutcome outcome;
    json& report = outcome.report;
    report["suite"] = name;

    if (name == "invariants") {
        validate_run_config(base);
        const InvariantReport inv = invariant_suite(base, 5, 8, pick(options.replications, 20), pool);
        outcome.passed = inv.ok();
        report["result"] = to_json(inv);
    } else if (name == "martingale") {
        base.n = 128;
        validate_run_config(base);
        const std::vector<ProbePair> probes{
            {0.25 * horizon, 0.5 * horizon}, {0.25 * horizon, 0.75 * horizon}, {0.5 * horizon, horizon}};
        MartingaleOptions mo;
        mo.compensator_scale = options.corrupt_v ? 2.0 : 1.0;
        mo.pool = pool;
        const MartingaleReport mr = martingale_test(base, pick(options.replications, 200), probes, mo);
        outcome.passed = mr.consistent;
        report["compensator_scale"] = mo.compensator_scale;
        report["result"] = to_json(mr);
    } else if (name == "decay") {
        validate_run_config(base);
        const std::vector<std::size_t> sizes{64, 128, 256, 512};
        DecayOptions dopt;
        dopt.pool = pool;
        const DecayFit fit = l2_decay(base, sizes, pick(options.replications, 200), dopt);
        bool monotone = true;
        for (std::size_t j = 1; j < fit.estimates.size(); ++j) {
            monotone = monotone && fit.estimates[j] <= fit.estimates[j - 1];
        }
        const bool in_band = !fit.degenerate && fit.slope >= -1.3 && fit.slope <= -0.7;
        outcome.passed = in_band && monotone;
        report["result"] = to_json(fit);
        report["slope_in_band"] = in_band;
        report["estimates_nonincreasing"] = monotone;
    } else if (name == "tau-law") {
        base.n = 4;
        validate_run_config(base);
        const std::vector<double> probes{0.25 * horizon, 0.5 * horizon, horizon};
        const TauLawReport tr = tau_law_check(base, 0, pick(options.replications, 10000), probes, pool);
        outcome.passed = tr.consistent;
        report["result"] = to_json(tr);
    } else if (name == "lamperti") {
        LampertiSettings settings;
        settings.law_paths = pick(options.replications, settings.law_paths);

        RunConfig constant = base;
        if (!(constant.model.coefficients.sigma_space_independent() &&
              constant.model.coefficients.sigma_time_independent())) {
            constant.model.coefficients.diffusion = ConstantDiffusion{1.0};
        }
        validate_run_config(constant);
        bool constant_ok = false;
        LampertiSettings quick = settings;
        quick.law_paths = std::min<std::size_t>(settings.law_paths, 2000);
        report["constant_sigma"] = lamperti_block(constant, quick, pool, constant_ok);

        RunConfig modulated = base;
        modulated.model.coefficients.diffusion = TimeModulatedDiffusion{1.0, 0.5, 2.0 * 3.141592653589793};
        validate_run_config(modulated);
        bool modulated_ok = false;
        report["time_modulated_sigma"] = lamperti_block(modulated, settings, pool, modulated_ok);

        const bool pathwise_ok = report["constant_sigma"]["pathwise"]["ok"].get<bool>();
        outcome.passed = pathwise_ok && modulated_ok;
    } else if (name == "ties") {
        base.n = 128;
        validate_run_config(base);
        const std::vector<double> dts{4e-3, 2e-3, 1e-3};
        const TieTable table = tie_stats(base, dts, pick(options.replications, 20), pool);
        outcome.passed = table.decreasing;
        report["result"] = to_json(table);
    } else if (name == "barnes") {
        RunConfig barrier = scenario.config;
        const std::vector<std::size_t> sizes{32, 128, 512};
        if (!is_barnes(barrier.mode)) {
            barrier.mode = BarnesTildeMode{1.0, 1.0};
        }
        validate_run_config(barrier);
        const BarnesComparison cmp = barnes_comparison(barrier, sizes, pick(options.replications, 50), 1.0, pool);
        outcome.passed = cmp.decreasing;
        report["result"] = to_json(cmp);
    } else {
        throw std::invalid_argument("unknown suite '" + name + "'");
    }
    report["passed"] = outcome.passed;
    return outcome;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interacting particle simulation of an epidemic front"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string format;
    auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and export trace.csv, infections.csv, summary.json");
    run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    run_cmd->add_option("--seed", seed, "Override the scenario seed");
    run_cmd->add_option("--out", out_dir, "Output directory (overrides [output] directory)");
    run_cmd->add_option("--format", format, "csv or json (overrides [output] format)");

    std::string suite;
    std::string validate_scenario;
    std::string report_path;
    SuiteOptions suite_options;
    auto* validate_cmd = app.add_subcommand("validate", "Run a validation suite; exit 0 iff every flag passes");
    validate_cmd->add_option("suite", suite, "invariants | martingale | decay | tau-law | lamperti | ties | barnes")
        ->required();
    validate_cmd->add_option("--scenario", validate_scenario, "Scenario file (default: reference scenario)");
    validate_cmd->add_option("--seed", seed, "Override the scenario seed");
    validate_cmd->add_flag("--corrupt-v", suite_options.corrupt_v, "Double V in the martingale suite");
    validate_cmd->add_option("--replications", suite_options.replications, "Override the replication count");
    validate_cmd->add_option("--report", report_path, "Also write the JSON report to this file");

    double beta = 0.3;
    double dbar = 15.0;
    double i0 = 0.01;
    double c0 = 0.01;
    double sir_T = 100.0;
    double sir_dt = 0.01;
    std::string sir_out;
    auto* sir_cmd = app.add_subcommand("sir", "Integrate the deterministic SIR baseline and print CSV");
    sir_cmd->add_option("--beta", beta, "Contact-infection rate")->capture_default_str();
    sir_cmd->add_option("--dbar", dbar, "Infectious period")->capture_default_str();
    sir_cmd->add_option("--i0", i0, "Initial infected proportion")->capture_default_str();
    sir_cmd->add_option("--c0", c0, "Initial contagious proportion")->capture_default_str();
    sir_cmd->add_option("--T", sir_T, "Horizon")->capture_default_str();
    sir_cmd->add_option("--dt", sir_dt, "RK4 step")->capture_default_str();
    sir_cmd->add_option("--out", sir_out, "Write the CSV to this file instead of stdout");

    std::string sizes_text = "64,128,256,512";
    std::size_t replications = 200;
    auto* sweep_cmd = app.add_subcommand("sweep", "L2 decay of sup|I - V|^2 over population sizes");
    sweep_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    sweep_cmd->add_option("--sizes", sizes_text, "Comma-separated population sizes")->capture_default_str();
    sweep_cmd->add_option("--replications", replications, "Replications per size")->capture_default_str();
    sweep_cmd->add_option("--seed", seed, "Override the scenario seed");
    sweep_cmd->add_option("--report", report_path, "Also write the JSON report to this file");

    std::size_t paths = 10000;
    auto* lamperti_cmd = app.add_subcommand("lamperti-check", "Change-of-frame checks on a scenario, as JSON");
    lamperti_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    lamperti_cmd->add_option("--paths", paths, "Paths for the law comparison")->capture_default_str();
    lamperti_cmd->add_option("--seed", seed, "Override the scenario seed");
    lamperti_cmd->add_option("--report", report_path, "Also write the JSON report to this file");

    std::string barnes_sizes = "32,128,512";
    std::size_t barnes_reps = 50;
    double barnes_u = 1.0;
    auto* barnes_cmd = app.add_subcommand("barnes", "Compare the two barrier variants under common noise");
    barnes_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    barnes_cmd->add_option("--sizes", barnes_sizes, "Comma-separated population sizes")->capture_default_str();
    barnes_cmd->add_option("--replications", barnes_reps, "Replications per size")->capture_default_str();
    barnes_cmd->add_option("--u", barnes_u, "Initial barrier velocity when the scenario is not a barrier mode")
        ->capture_default_str();
    barnes_cmd->add_option("--seed", seed, "Override the scenario seed");
    barnes_cmd->add_option("--report", report_path, "Also write the JSON report to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    const std::size_t threads = threads_from_env();
    std::unique_ptr<ThreadPool> pool_owner;
    if (threads > 1) {
        pool_owner = std::make_unique<ThreadPool>(threads);
    }
    ThreadPool* pool = pool_owner.get();

    auto load = [&](const std::string& path) {
        Scenario s = path.empty() ? default_scenario() : load_scenario(path);
        if (seed) {
            s.config.seed = *seed;
        }
        return s;
    };

    try {
        if (*run_cmd) {
            Scenario s = load(scenario_path);
            validate_run_config(s.config);
            const std::filesystem::path dir = out_dir.empty() ? s.output_directory : out_dir;
            const std::string fmt = format.empty() ? s.output_format : format;
            if (fmt != "csv" && fmt != "json") {
                throw ScenarioError("format must be csv or json");
            }
            const auto start = std::chrono::steady_clock::now();
            const SystemTrace trace = is_barnes(s.config.mode) ? run_barnes(s.config, pool) : run(s.config, pool);
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::filesystem::create_directories(dir);
            if (fmt == "csv") {
                auto trace_file = open_output(dir / "trace.csv");
                write_trace_csv(trace_file, trace);
                auto inf_file = open_output(dir / "infections.csv");
                write_infections_csv(inf_file, trace);
            } else {
                auto trace_file = open_output(dir / "trace.json");
                trace_file << trace_json(trace).dump() << '\n';
            }
            const json summary = summary_json(trace, s.config.seed, seconds);
            auto summary_file = open_output(dir / "summary.json");
            summary_file << summary.dump(2) << '\n';
            out << summary.dump(2) << '\n';
            return kExitOk;
        }
        if (*validate_cmd) {
            bool known = false;
            for (const char* const* name = suite_names(); *name != nullptr; ++name) {
                known = known || suite == *name;
            }
            if (!known) {
                err << "unknown suite '" << suite << "'; expected one of:";
                for (const char* const* name = suite_names(); *name != nullptr; ++name) {
                    err << ' ' << *name;
                }
                err << '\n';
                return kExitConfigError;
            }
            const Scenario s = load(validate_scenario);
            const SuiteOutcome outcome = run_suite(suite, s, suite_options, pool);
            emit(out, outcome.report, report_path);
            return outcome.passed ? kExitOk : kExitTestFailure;
        }
        if (*sir_cmd) {
            const auto series = sir_integrate(beta, dbar, i0, c0, sir_T, sir_dt);
            if (sir_out.empty()) {
                write_sir_csv(out, series);
            } else {
                auto file = open_output(sir_out);
                write_sir_csv(file, series);
            }
            return kExitOk;
        }
        if (*sweep_cmd) {
            const Scenario s = load(scenario_path);
            const RunConfig config = epidemic_config(s);
            validate_run_config(config);
            const auto sizes = parse_sizes(sizes_text);
            DecayOptions options;
            options.pool = pool;
            emit(out, to_json(l2_decay(config, sizes, replications, options)), report_path);
            return kExitOk;
        }
        if (*lamperti_cmd) {
            const Scenario s = load(scenario_path);
            const RunConfig config = epidemic_config(s);
            validate_run_config(config);
            LampertiSettings settings;
            settings.law_paths = paths;
            bool passed = false;
            json report = lamperti_block(config, settings, pool, passed);
            report["validation"] = to_json(validate_config(config.model.kernel, config.model.coefficients,
                                                           config.model.initial, true));
            emit(out, report, report_path);
            return passed ? kExitOk : kExitTestFailure;
        }
        if (*barnes_cmd) {
            const Scenario s = load(scenario_path);
            RunConfig config = s.config;
            if (!is_barnes(config.mode)) {
                config.mode = BarnesTildeMode{barnes_u, 1.0};
            }
            validate_run_config(config);
            const auto sizes = parse_sizes(barnes_sizes);
            emit(out, to_json(barnes_comparison(config, sizes, barnes_reps, barnes_u, pool)), report_path);
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "configuration rejected: " << e.what() << '\n' << to_json(e.report()).dump(2) << '\n';
        return kExitConfigError;
    } catch (const ScenarioError& e) {
        err << "scenario error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitTestFailure;
    }
    return kExitOk;
}

}  // namespace epifront::cli
