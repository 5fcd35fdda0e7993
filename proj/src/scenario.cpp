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

#include "epifront/scenario.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>
#include <variant>
#include <vector>

namespace epifront {

namespace {

struct Value {
    std::string text;
    bool quoted = false;
    int line = 0;
};

using Section = std::map<std::string, Value>;

[[noreturn]] void fail(int line, const std::string& message) {
    if (line > 0) {
        throw ScenarioError("line " + std::to_string(line) + ": " + message);
    }
    throw ScenarioError(message);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool valid_name(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    for (char ch : s) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                        ch == '_' || ch == '-';
        if (!ok) {
            return false;
        }
    }
    return true;
}

/// Drops a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            in_string = !in_string;
        } else if (line[i] == '#' && !in_string) {
            return line.substr(0, i);
        }
    }
    return line;
}

std::map<std::string, Section> tokenize(std::string_view text) {
    std::map<std::string, Section> sections;
    Section* current = nullptr;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const auto raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                fail(line_no, "unterminated section header");
            }
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (!valid_name(name)) {
                fail(line_no, "invalid section name '" + name + "'");
            }
            if (sections.count(name) != 0) {
                fail(line_no, "duplicate section [" + name + "]");
            }
            current = &sections[name];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(line_no, "expected 'key = value'");
        }
        if (current == nullptr) {
            fail(line_no, "key outside of any section");
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto rhs = trim(line.substr(eq + 1));
        if (!valid_name(key)) {
            fail(line_no, "invalid key '" + key + "'");
        }
        if (current->count(key) != 0) {
            fail(line_no, "duplicate key '" + key + "'");
        }
        Value v;
        v.line = line_no;
        if (!rhs.empty() && rhs.front() == '"') {
            if (rhs.size() < 2 || rhs.back() != '"' || rhs.substr(1, rhs.size() - 2).find('"') != std::string_view::npos) {
                fail(line_no, "malformed string value for '" + key + "'");
            }
            v.text = std::string(rhs.substr(1, rhs.size() - 2));
            v.quoted = true;
        } else {
            if (rhs.empty()) {
                fail(line_no, "missing value for '" + key + "'");
            }
            v.text = std::string(rhs);
        }
        (*current)[key] = v;
    }
    return sections;
}

/// Typed access to one section; tracks which keys were consumed so that
/// leftovers can be reported as unknown.
class Reader {
public:
    Reader(std::string name, Section section) : name_(std::move(name)), section_(std::move(section)) {}

    std::string word(const std::string& key) {
        const Value* v = take(key);
        if (v == nullptr) {
            fail(0, "[" + name_ + "] missing required key '" + key + "'");
        }
        if (!v->quoted) {
            fail(v->line, "[" + name_ + "] '" + key + "' must be a quoted string");
        }
        return v->text;
    }

    std::string word_or(const std::string& key, const std::string& fallback) {
        return has(key) ? word(key) : fallback;
    }

    double number(const std::string& key, double fallback) {
        const Value* v = take(key);
        if (v == nullptr) {
            return fallback;
        }
        if (v->quoted) {
            fail(v->line, "[" + name_ + "] '" + key + "' must be a number");
        }
        errno = 0;
        char* end = nullptr;
        const double x = std::strtod(v->text.c_str(), &end);
        if (end != v->text.c_str() + v->text.size() || errno == ERANGE || !std::isfinite(x)) {
            fail(v->line, "[" + name_ + "] '" + key + "' is not a finite decimal number: " + v->text);
        }
        return x;
    }

    std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
        const Value* v = take(key);
        if (v == nullptr) {
            return fallback;
        }
        std::uint64_t x = 0;
        const char* first = v->text.data();
        const char* last = first + v->text.size();
        const auto [ptr, ec] = std::from_chars(first, last, x);
        if (v->quoted || ec != std::errc{} || ptr != last) {
            fail(v->line, "[" + name_ + "] '" + key + "' must be a nonnegative integer: " + v->text);
        }
        return x;
    }

    bool has(const std::string& key) const { return section_.count(key) != 0; }

    /// Rejects any key that was not consumed.
    void finish() const {
        for (const auto& [key, value] : section_) {
            if (used_.count(key) == 0) {
                fail(value.line, "[" + name_ + "] unknown key '" + key + "'");
            }
        }
    }

private:
    const Value* take(const std::string& key) {
        const auto it = section_.find(key);
        if (it == section_.end()) {
            return nullptr;
        }
        used_.insert(key);
        return &it->second;
    }

    std::string name_;
    Section section_;
    std::set<std::string> used_;
};

[[noreturn]] void unknown_family(const std::string& section, const std::string& family) {
    fail(0, "[" + section + "] unknown family \"" + family + "\"");
}

KernelSpec read_kernel(Reader& r) {
    KernelSpec result;
    const std::string family = r.word("family");
    result.dbar = r.number("dbar", result.dbar);
    if (family == "uniform") {
        result.family = UniformKernel{};
    } else if (family == "truncated_weibull") {
        TruncatedWeibullKernel k;
        k.shape = r.number("shape", k.shape);
        k.scale = r.number("scale", k.scale);
        result.family = k;
    } else if (family == "tapered_uniform") {
        TaperedUniformKernel k;
        k.taper = r.number("taper", k.taper);
        result.family = k;
    } else {
        unknown_family("kernel", family);
    }
    return result;
}

Drift read_drift(Reader& r) {
    const std::string family = r.word("family");
    if (family == "constant") {
        ConstantDrift d;
        d.mu = r.number("mu", d.mu);
        return d;
    }
    if (family == "mean_reverting") {
        MeanRevertingDrift d;
        d.theta = r.number("theta", d.theta);
        d.m = r.number("m", d.m);
        return d;
    }
    unknown_family("drift", family);
}

Diffusion read_diffusion(Reader& r) {
    const std::string family = r.word("family");
    if (family == "constant") {
        ConstantDiffusion d;
        d.c = r.number("c", d.c);
        return d;
    }
    if (family == "time_modulated") {
        TimeModulatedDiffusion d;
        d.c0 = r.number("c0", d.c0);
        d.amplitude = r.number("amplitude", d.amplitude);
        d.frequency = r.number("frequency", d.frequency);
        return d;
    }
    if (family == "space_modulated") {
        SpaceModulatedDiffusion d;
        d.c0 = r.number("c0", d.c0);
        d.amplitude = r.number("amplitude", d.amplitude);
        d.center = r.number("center", d.center);
        d.width = r.number("width", d.width);
        return d;
    }
    unknown_family("diffusion", family);
}

Rate read_rate(Reader& r) {
    const std::string family = r.word("family");
    if (family == "constant") {
        ConstantRate g;
        g.g = r.number("g", g.g);
        return g;
    }
    if (family == "affine") {
        AffineRate g;
        g.g0 = r.number("g0", g.g0);
        g.g1 = r.number("g1", g.g1);
        return g;
    }
    unknown_family("rate", family);
}

InitialFamily read_initial(Reader& r) {
    const std::string family = r.word("family");
    if (family == "point") {
        PointLaw p;
        p.x0 = r.number("x0", p.x0);
        return p;
    }
    if (family == "truncated_gaussian") {
        TruncatedGaussianLaw g;
        g.mean = r.number("mean", g.mean);
        g.stdev = r.number("stdev", g.stdev);
        return g;
    }
    unknown_family("initial", family);
}

void read_run(Reader& r, Scenario& s) {
    RunConfig& c = s.config;
    c.n = static_cast<std::size_t>(r.integer("n", c.n));
    c.horizon = r.number("T", c.horizon);
    c.dt = r.number("dt", c.dt);
    c.seed = r.integer("seed", c.seed);
    c.model.initial.a0 = r.number("a0", c.model.initial.a0);
    c.model.alpha = r.number("alpha", c.model.alpha);
    const std::string mode = r.word("mode");
    if (mode == "true") {
        c.mode = TrueMode{};
    } else if (mode == "globally_reflected") {
        c.mode = GloballyReflectedMode{};
    } else if (mode == "artificial") {
        ArtificialMode m;
        m.tagged = static_cast<std::size_t>(r.integer("tagged", m.tagged));
        c.mode = m;
    } else if (mode == "barnes_tilde") {
        BarnesTildeMode m;
        m.u = r.number("u", m.u);
        m.kappa = r.number("kappa", m.kappa);
        c.mode = m;
    } else if (mode == "barnes_bar") {
        BarnesBarMode m;
        m.u = r.number("u", m.u);
        c.mode = m;
    } else {
        fail(0, "[run] unknown mode \"" + mode + "\"");
    }
}

void read_output(Reader& r, Scenario& s) {
    s.has_output = true;
    s.output_directory = r.word_or("directory", s.output_directory);
    s.output_format = r.word_or("format", s.output_format);
    if (s.output_format != "csv" && s.output_format != "json") {
        fail(0, "[output] format must be \"csv\" or \"json\"");
    }
}

// ---------------------------------------------------------------------------

/// Shortest decimal that reads back to the same double.
std::string shortest(double value) {
    char buf[40];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    std::string s(buf, ec == std::errc{} ? ptr : buf);
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

class Writer {
public:
    void section(const std::string& name) {
        if (!out_.str().empty()) {
            out_ << '\n';
        }
        out_ << '[' << name << "]\n";
    }
    void word(const std::string& key, const std::string& value) { out_ << key << " = \"" << value << "\"\n"; }
    void number(const std::string& key, double value) { out_ << key << " = " << shortest(value) << '\n'; }
    void integer(const std::string& key, std::uint64_t value) { out_ << key << " = " << value << '\n'; }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    std::string s(buf);
    // Keep a decimal point on integral values so they read back as decimals.
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

Scenario parse_scenario(std::string_view text) {
    auto sections = tokenize(text);
    for (const auto& [name, section] : sections) {
        static const std::set<std::string> known{"kernel", "drift", "diffusion", "rate", "initial", "run", "output"};
        if (known.count(name) == 0) {
            fail(0, "unknown section [" + name + "]");
        }
    }
    for (const char* required : {"kernel", "drift", "diffusion", "rate", "initial", "run"}) {
        if (sections.count(required) == 0) {
            fail(0, std::string("missing required section [") + required + "]");
        }
    }

    Scenario s;
    ModelSpec& model = s.config.model;

    Reader kernel("kernel", sections["kernel"]);
    model.kernel = read_kernel(kernel);
    kernel.finish();

    Reader drift("drift", sections["drift"]);
    model.coefficients.drift = read_drift(drift);
    drift.finish();

    Reader diffusion("diffusion", sections["diffusion"]);
    model.coefficients.diffusion = read_diffusion(diffusion);
    diffusion.finish();

    Reader rate("rate", sections["rate"]);
    model.coefficients.rate = read_rate(rate);
    rate.finish();

    Reader initial("initial", sections["initial"]);
    model.initial.family = read_initial(initial);
    initial.finish();

    Reader run("run", sections["run"]);
    read_run(run, s);
    run.finish();

    if (sections.count("output") != 0) {
        Reader output("output", sections["output"]);
        read_output(output, s);
        output.finish();
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    const ModelSpec& model = s.config.model;
    Writer w;

    w.section("kernel");
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, UniformKernel>) {
                w.word("family", "uniform");
                w.number("dbar", model.kernel.dbar);
            } else if constexpr (std::is_same_v<K, TruncatedWeibullKernel>) {
                w.word("family", "truncated_weibull");
                w.number("dbar", model.kernel.dbar);
                w.number("shape", k.shape);
                w.number("scale", k.scale);
            } else {
                w.word("family", "tapered_uniform");
                w.number("dbar", model.kernel.dbar);
                w.number("taper", k.taper);
            }
        },
        model.kernel.family);

    w.section("drift");
    std::visit(
        [&](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, ConstantDrift>) {
                w.word("family", "constant");
                w.number("mu", d.mu);
            } else {
                w.word("family", "mean_reverting");
                w.number("theta", d.theta);
                w.number("m", d.m);
            }
        },
        model.coefficients.drift);

    w.section("diffusion");
    std::visit(
        [&](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, ConstantDiffusion>) {
                w.word("family", "constant");
                w.number("c", d.c);
            } else if constexpr (std::is_same_v<D, TimeModulatedDiffusion>) {
                w.word("family", "time_modulated");
                w.number("c0", d.c0);
                w.number("amplitude", d.amplitude);
                w.number("frequency", d.frequency);
            } else {
                w.word("family", "space_modulated");
                w.number("c0", d.c0);
                w.number("amplitude", d.amplitude);
                w.number("center", d.center);
                w.number("width", d.width);
            }
        },
        model.coefficients.diffusion);

    w.section("rate");
    std::visit(
        [&](const auto& g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, ConstantRate>) {
                w.word("family", "constant");
                w.number("g", g.g);
            } else {
                w.word("family", "affine");
                w.number("g0", g.g0);
                w.number("g1", g.g1);
            }
        },
        model.coefficients.rate);

    w.section("initial");
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, PointLaw>) {
                w.word("family", "point");
                w.number("x0", p.x0);
            } else {
                w.word("family", "truncated_gaussian");
                w.number("mean", p.mean);
                w.number("stdev", p.stdev);
            }
        },
        model.initial.family);

    const RunConfig& c = s.config;
    w.section("run");
    w.integer("n", c.n);
    w.number("T", c.horizon);
    w.number("dt", c.dt);
    w.integer("seed", c.seed);
    w.number("a0", model.initial.a0);
    w.number("alpha", model.alpha);
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, TrueMode>) {
                w.word("mode", "true");
            } else if constexpr (std::is_same_v<M, GloballyReflectedMode>) {
                w.word("mode", "globally_reflected");
            } else if constexpr (std::is_same_v<M, ArtificialMode>) {
                w.word("mode", "artificial");
                w.integer("tagged", m.tagged);
            } else if constexpr (std::is_same_v<M, BarnesTildeMode>) {
                w.word("mode", "barnes_tilde");
                w.number("u", m.u);
                w.number("kappa", m.kappa);
            } else {
                w.word("mode", "barnes_bar");
                w.number("u", m.u);
            }
        },
        c.mode);

    if (s.has_output) {
        w.section("output");
        w.word("directory", s.output_directory);
        w.word("format", s.output_format);
    }
    return w.str();
}

Scenario default_scenario() {
    Scenario s;
    ModelSpec& model = s.config.model;
    model.kernel = KernelSpec{TaperedUniformKernel{0.05}, 0.5};
    model.coefficients.drift = ConstantDrift{0.0};
    model.coefficients.diffusion = ConstantDiffusion{1.0};
    model.coefficients.rate = AffineRate{5.0, 20.0};
    model.initial = InitialLaw{PointLaw{0.3}, 0.0};
    model.alpha = 0.5;
    s.config.n = 128;
    s.config.horizon = 1.0;
    s.config.dt = 1e-3;
    s.config.mode = TrueMode{};
    s.config.seed = 1;
    return s;
}

}  // namespace epifront
