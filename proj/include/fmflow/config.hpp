#pragma once

// Scenario configuration: named presets for the figure runs, a sectioned
// key=value config-file format, and --set overrides. Unknown sections or
// keys are hard errors so a preset cannot silently drift.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fmflow/dynamics.hpp"
#include "fmflow/errors.hpp"
#include "fmflow/trajectory.hpp"

namespace fmflow::config {

struct ScenarioConfig {
    ModelParams params;
    std::optional<RawParams> raw;  // present when the model block was given raw
    State state0;
    double c0 = 0.0;
    bool closure_is_c0 = true;  // false: eta_prime0 below is the given closure
    double eta_prime0 = 0.0;
    IntegratorConfig integ;
    double sample_dtau = 0.05;
    double indicator_base = 1000.0;
    bool emit_svg = true;
    std::string preset;
    std::vector<std::string> overrides;

    InitialSpec initial_spec() const {
        return closure_is_c0 ? InitialSpec::from_c0(state0, c0)
                             : InitialSpec::from_eta_prime0(state0, eta_prime0);
    }
};

// All-optional staging area; build() resolves defaults and cross-field rules.
struct ConfigBuilder {
    std::optional<double> alpha1, alpha2, beta;
    std::optional<Variant> variant;
    std::optional<double> sigma2, h, f, horizon;
    std::optional<long> agents;

    std::optional<double> eta, upsilon, rho, c0, eta_prime0;
    std::optional<double> rel_tol, abs_tol, max_step, rho_epsilon, t_end;
    std::optional<double> dtau, base;
    std::optional<bool> svg;

    std::string preset;
    std::vector<std::string> overrides;

    void set(const std::string& section, const std::string& key, const std::string& value);
    ScenarioConfig build() const;
};

namespace detail {

inline double parse_number(const std::string& section, const std::string& key,
                           const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": '" + value +
                          "' is not a number");
    }
}

inline long parse_integer(const std::string& section, const std::string& key,
                          const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": '" + value +
                          "' is not an integer");
    }
}

inline bool parse_bool(const std::string& section, const std::string& key,
                       const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("[" + section + "] " + key + ": '" + value +
                      "' is not a boolean (true/false)");
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

inline void ConfigBuilder::set(const std::string& section, const std::string& key,
                               const std::string& value) {
    using detail::parse_bool;
    using detail::parse_integer;
    using detail::parse_number;

    if (section == "model") {
        if (key == "alpha1") alpha1 = parse_number(section, key, value);
        else if (key == "alpha2") alpha2 = parse_number(section, key, value);
        else if (key == "beta") beta = parse_number(section, key, value);
        else if (key == "sigma2") sigma2 = parse_number(section, key, value);
        else if (key == "h") h = parse_number(section, key, value);
        else if (key == "agents") agents = parse_integer(section, key, value);
        else if (key == "f") f = parse_number(section, key, value);
        else if (key == "horizon") horizon = parse_number(section, key, value);
        else if (key == "variant") {
            if (value == "correct") variant = Variant::Correct;
            else if (value == "erratum") variant = Variant::IlinskiErratum;
            else
                throw ConfigError("[model] variant: '" + value +
                                  "' must be 'correct' or 'erratum'");
        } else
            throw ConfigError("[model] unknown key '" + key + "'");
    } else if (section == "initial") {
        if (key == "eta") eta = parse_number(section, key, value);
        else if (key == "upsilon") upsilon = parse_number(section, key, value);
        else if (key == "rho") rho = parse_number(section, key, value);
        else if (key == "c0") {
            c0 = parse_number(section, key, value);
            eta_prime0.reset();  // choosing a closure variable deselects the other
        } else if (key == "eta_prime0") {
            eta_prime0 = parse_number(section, key, value);
            c0.reset();
        } else
            throw ConfigError("[initial] unknown key '" + key + "'");
    } else if (section == "integrator") {
        if (key == "rel_tol") rel_tol = parse_number(section, key, value);
        else if (key == "abs_tol") abs_tol = parse_number(section, key, value);
        else if (key == "max_step") max_step = parse_number(section, key, value);
        else if (key == "rho_epsilon") rho_epsilon = parse_number(section, key, value);
        else if (key == "t_end") t_end = parse_number(section, key, value);
        else
            throw ConfigError("[integrator] unknown key '" + key + "'");
    } else if (section == "sampling") {
        if (key == "dtau") dtau = parse_number(section, key, value);
        else if (key == "base") base = parse_number(section, key, value);
        else
            throw ConfigError("[sampling] unknown key '" + key + "'");
    } else if (section == "output") {
        if (key == "svg") svg = parse_bool(section, key, value);
        else
            throw ConfigError("[output] unknown key '" + key + "'");
    } else {
        throw ConfigError("unknown section '" + section + "'");
    }
}

inline ScenarioConfig ConfigBuilder::build() const {
    ScenarioConfig cfg;
    cfg.preset = preset;
    cfg.overrides = overrides;

    const bool any_raw = sigma2 || h || agents || f;
    const bool any_derived = alpha1 || alpha2;
    if (any_raw && any_derived)
        throw ConfigError(
            "[model] give either (alpha1, alpha2) or (sigma2, h, agents, f), not both");
    if (any_raw) {
        if (!(sigma2 && h && agents && f))
            throw ConfigError("[model] raw form needs all of sigma2, h, agents, f");
        RawParams raw;
        raw.sigma2 = *sigma2;
        raw.h = *h;
        raw.agents = *agents;
        raw.f = *f;
        raw.beta = beta.value_or(1.0);
        raw.horizon = horizon.value_or(1.0);
        cfg.raw = raw;
        cfg.params = raw.derive(variant.value_or(Variant::Correct));
    } else {
        if (horizon)
            throw ConfigError("[model] horizon requires the raw parameter form");
        cfg.params.alpha1 = alpha1.value_or(1.5);
        cfg.params.alpha2 = alpha2.value_or(10.0);
        cfg.params.beta = beta.value_or(1.0);
        cfg.params.variant = variant.value_or(Variant::Correct);
    }
    cfg.params.validate();

    cfg.state0 = State{eta.value_or(0.0), upsilon.value_or(0.0), rho.value_or(0.5)};
    if (!(cfg.state0.rho > 0.0 && cfg.state0.rho < 1.0))
        throw ConfigError("[initial] rho must lie strictly inside (0,1)");
    if (c0 && eta_prime0)
        throw ConfigError("[initial] set exactly one of c0 and eta_prime0");
    if (eta_prime0) {
        cfg.closure_is_c0 = false;
        cfg.eta_prime0 = *eta_prime0;
    } else {
        cfg.closure_is_c0 = true;
        cfg.c0 = c0.value_or(0.0);
    }

    cfg.integ.rel_tol = rel_tol.value_or(1e-10);
    cfg.integ.abs_tol = abs_tol.value_or(1e-12);
    cfg.integ.max_step = max_step.value_or(0.1);
    cfg.integ.rho_epsilon = rho_epsilon.value_or(1e-12);
    // default span: h*T when the raw form supplies a horizon, else 50 tau units
    cfg.integ.t_end = t_end.value_or(cfg.raw ? cfg.raw->h * cfg.raw->horizon : 50.0);
    cfg.integ.validate();

    cfg.sample_dtau = dtau.value_or(0.05);
    if (!(cfg.sample_dtau > 0.0)) throw ConfigError("[sampling] dtau must be > 0");
    cfg.indicator_base = base.value_or(1000.0);
    if (!(cfg.indicator_base > 0.0)) throw ConfigError("[sampling] base must be > 0");
    cfg.emit_svg = svg.value_or(true);
    return cfg;
}

// --- config file ------------------------------------------------------------

inline ConfigBuilder parse_config(std::istream& in) {
    ConfigBuilder b;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
        b.set(section, detail::trim(line.substr(0, eq)),
              detail::trim(line.substr(eq + 1)));
    }
    return b;
}

inline ConfigBuilder load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(f);
}

// "section.key=value" as used by --set and sweep axes.
inline void apply_override(ConfigBuilder& b, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "': expected section.key=value");
    const std::string path = detail::trim(assignment.substr(0, eq));
    const std::string value = detail::trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos)
        throw ConfigError("override '" + assignment + "': key must be section.key");
    b.set(path.substr(0, dot), path.substr(dot + 1), value);
    b.overrides.push_back(path + "=" + value);
}

// --- presets ----------------------------------------------------------------

inline std::vector<std::string> preset_names() {
    return {"fig-erratum",     "fig-correct",     "fig-alpha1-zero",
            "fig-c0-positive", "fig-c0-negative", "fig-volume"};
}

// The shared scenario: alpha1 = 1.5, alpha2 = 10, eta(0) = 0.2,
// upsilon(0) = 0, rho(0) = 0.5, C0 = 0, tau in [0, 50].
inline ConfigBuilder preset_builder(const std::string& name) {
    ConfigBuilder b;
    b.preset = name;
    b.alpha1 = 1.5;
    b.alpha2 = 10.0;
    b.beta = 1.0;
    b.variant = Variant::Correct;
    b.eta = 0.2;
    b.upsilon = 0.0;
    b.rho = 0.5;
    b.c0 = 0.0;
    b.t_end = 50.0;

    if (name == "fig-erratum") {
        b.variant = Variant::IlinskiErratum;
    } else if (name == "fig-correct" || name == "fig-volume") {
        // fig-volume plots V and R for the fig-correct run
    } else if (name == "fig-alpha1-zero") {
        b.alpha1 = 0.0;
    } else if (name == "fig-c0-positive") {
        b.c0 = 0.1;
    } else if (name == "fig-c0-negative") {
        b.c0 = -0.1;
    } else {
        std::string names;
        for (const auto& n : preset_names()) names += " " + n;
        throw ConfigError("unknown preset '" + name + "'; available:" + names);
    }
    return b;
}

}  // namespace fmflow::config
