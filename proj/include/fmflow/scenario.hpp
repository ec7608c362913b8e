#pragma once

// Scenario execution: integrate a configured run, emit the time-series CSV,
// the four-curve SVG figure, and a JSON analysis report; sweeps re-run a
// base scenario across one axis and collate a summary table.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmflow/config.hpp"
#include "fmflow/csv.hpp"
#include "fmflow/envelope.hpp"
#include "fmflow/indicators.hpp"
#include "fmflow/linear.hpp"
#include "fmflow/svg.hpp"
#include "fmflow/trajectory.hpp"

namespace fmflow::scenario {

struct RunResult {
    Termination termination = Termination::Completed;
    double termination_tau = 0.0;
    std::filesystem::path csv_path, svg_path, json_path;
    std::optional<EnvelopeFit> envelope;
    std::optional<LinearPrediction> prediction;
    Classification classification{Regime::NeutralOscillation, 0.0};
    double energy_drift_value = 0.0;
    double max_row_closure_residual = 0.0;
    int exit_code = 0;
};

namespace detail {

inline nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline nlohmann::json prediction_json(const LinearPrediction& p) {
    return {{"regime", to_string(p.regime)},
            {"omega", p.omega},
            {"nu", p.nu},
            {"amplitude", p.amplitude},
            {"phase", p.phase},
            {"rho_offset", p.rho_offset},
            {"eta_drift_rate", p.eta_drift_rate},
            {"upsilon_drift_rate", p.upsilon_drift_rate},
            {"damping", p.damping},
            {"tau_c", finite_or_null(p.tau_c)},
            {"real_exponent", p.real_exponent}};
}

}  // namespace detail

// Uniformly sampled table with the columns the figure runs emit. Every row's
// closure residual is checked against the 4-ulp bound before it is written.
inline csv::Table sample_table(const Trajectory& traj, double dtau, double beta,
                               double* max_residual_out = nullptr) {
    csv::Table t;
    t.header = {"tau", "eta",       "upsilon", "rho",    "rho_tilde", "eta_tilde",
                "S",   "V",         "R",       "energy", "closure_residual"};
    const double span = traj.t_end();
    const auto n = static_cast<std::size_t>(std::floor(span / dtau + 1e-9)) + 1;
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = static_cast<double>(k) * dtau;
        const State s = traj.state_at(tau);
        const Derivatives d = rhs(traj.params(), traj.c0(), s);
        const double resid = closure_identity_residual(traj.params(), traj.c0(), s, d);
        if (resid > closure_ulp_bound(traj.params(), traj.c0(), s, d))
            throw InvariantViolation("closure identity residual " +
                                     std::to_string(resid) + " above 4-ulp bound at tau " +
                                     std::to_string(tau));
        worst = std::max(worst, resid);
        t.rows.push_back({tau, s.eta, s.upsilon, s.rho, s.rho_tilde(), s.eta_tilde(),
                          s.exchange_rate(beta), std::abs(d.rho_prime),
                          d.eta_prime / beta, energy(traj.params(), traj.c0(), s),
                          resid});
    }
    if (max_residual_out) *max_residual_out = worst;
    return t;
}

// The figure curve set: rho-1/2 solid, upsilon+eta dashed, eta dot-dashed,
// upsilon dotted.
inline std::string figure_svg(const csv::Table& table, const std::string& title) {
    const auto tau = table.column_values("tau");
    const auto rho_tilde = table.column_values("rho_tilde");
    const auto eta_tilde = table.column_values("eta_tilde");
    const auto eta = table.column_values("eta");
    const auto upsilon = table.column_values("upsilon");
    return svg::render_line_chart(
        title, "tau", tau,
        {{"rho - 1/2", &rho_tilde, svg::LineStyle::Solid},
         {"upsilon + eta", &eta_tilde, svg::LineStyle::Dashed},
         {"eta", &eta, svg::LineStyle::DotDashed},
         {"upsilon", &upsilon, svg::LineStyle::Dotted}});
}

inline RunResult run_scenario(const config::ScenarioConfig& cfg,
                              const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    const Trajectory traj = integrate(cfg.params, cfg.initial_spec(), cfg.integ);

    RunResult res;
    res.termination = traj.termination();
    res.termination_tau = traj.termination_tau();
    res.exit_code = traj.termination() == Termination::Completed ? 0 : 3;

    const csv::Table table =
        sample_table(traj, cfg.sample_dtau, cfg.params.beta, &res.max_row_closure_residual);
    res.csv_path = out_dir / "run.csv";
    csv::write_file(table, res.csv_path.string());

    if (cfg.emit_svg) {
        res.svg_path = out_dir / "figure.svg";
        const std::string title = cfg.preset.empty() ? "scenario" : cfg.preset;
        svg::write_file(figure_svg(table, title), res.svg_path.string());
    }

    try {
        res.envelope = envelope_fit(traj);
    } catch (const FitError&) {
        // too little oscillation to fit; report carries null
    }
    try {
        res.prediction = linearize(cfg.params, cfg.initial_spec());
    } catch (const DegenerateError&) {
    }
    res.classification = classify(cfg.params, traj.c0());
    res.energy_drift_value = energy_drift(traj);

    nlohmann::json j;
    j["preset"] = cfg.preset;
    j["overrides"] = cfg.overrides;
    j["params"] = {{"alpha1", cfg.params.alpha1},
                   {"alpha2", cfg.params.alpha2},
                   {"beta", cfg.params.beta},
                   {"variant", to_string(cfg.params.variant)}};
    if (cfg.raw)
        j["raw_params"] = {{"sigma2", cfg.raw->sigma2}, {"h", cfg.raw->h},
                           {"agents", cfg.raw->agents}, {"f", cfg.raw->f},
                           {"beta", cfg.raw->beta},     {"horizon", cfg.raw->horizon}};
    j["initial"] = {{"eta", cfg.state0.eta},
                    {"upsilon", cfg.state0.upsilon},
                    {"rho", cfg.state0.rho}};
    j["closure"] = {{"c0", traj.c0()},
                    {"eta_prime0", traj.eta_prime0()},
                    {"given", cfg.closure_is_c0 ? "c0" : "eta_prime0"}};
    j["integrator"] = {{"rel_tol", cfg.integ.rel_tol},
                       {"abs_tol", cfg.integ.abs_tol},
                       {"max_step", cfg.integ.max_step},
                       {"rho_epsilon", cfg.integ.rho_epsilon},
                       {"t_end", cfg.integ.t_end}};
    j["sampling"] = {{"dtau", cfg.sample_dtau}, {"base", cfg.indicator_base}};
    j["termination"] = {{"status", to_string(res.termination)},
                        {"tau", res.termination_tau}};
    j["regime"] = to_string(res.classification.regime);
    j["tau_c"] = detail::finite_or_null(res.classification.tau_c);
    j["linear_prediction"] =
        res.prediction ? detail::prediction_json(*res.prediction) : nlohmann::json(nullptr);
    if (res.envelope)
        j["envelope_fit"] = {{"damping", res.envelope->damping},
                             {"omega", res.envelope->omega},
                             {"drift", res.envelope->drift},
                             {"extrema", res.envelope->extrema_count}};
    else
        j["envelope_fit"] = nullptr;
    j["diagnostics"] = {{"energy_drift", res.energy_drift_value},
                        {"closure_residual", closure_residual(traj)},
                        {"dense_residual", dense_residual(traj)},
                        {"max_row_closure_residual", res.max_row_closure_residual},
                        {"accepted_steps", traj.samples().size() - 1}};

    res.json_path = out_dir / "report.json";
    std::ofstream jf(res.json_path, std::ios::binary);
    if (!jf) throw ConfigError("cannot open '" + res.json_path.string() + "' for writing");
    jf << j.dump(2) << '\n';
    return res;
}

struct SweepItem {
    double value;
    RunResult result;
    bool failed = false;
    std::string failure;
};

struct SweepResult {
    std::vector<SweepItem> items;
    std::filesystem::path summary_path;
    int exit_code = 0;
};

// Re-runs `base` once per value of `axis` ("section.key"), each into its own
// subdirectory, then writes a deterministic summary table.
inline SweepResult sweep(const config::ConfigBuilder& base, const std::string& axis,
                         const std::vector<double>& values,
                         const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    SweepResult sw;

    for (double v : values) {
        config::ConfigBuilder b = base;
        config::apply_override(b, axis + "=" + csv::format_double(v));
        const config::ScenarioConfig cfg = b.build();
        const std::filesystem::path dir = out_dir / (axis + "=" + csv::format_double(v));
        SweepItem item;
        item.value = v;
        try {
            item.result = run_scenario(cfg, dir);
            item.failed = item.result.exit_code != 0;
            if (item.failed) item.failure = to_string(item.result.termination);
        } catch (const std::exception& e) {
            item.failed = true;
            item.failure = e.what();
        }
        sw.items.push_back(std::move(item));
        if (sw.items.back().failed) sw.exit_code = 3;
    }

    sw.summary_path = out_dir / "summary.csv";
    std::ofstream f(sw.summary_path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + sw.summary_path.string() + "'");
    f << "value,damping,omega,drift,regime,status\n";
    for (const auto& item : sw.items) {
        f << csv::format_double(item.value) << ',';
        if (item.result.envelope) {
            f << csv::format_double(item.result.envelope->damping) << ','
              << csv::format_double(item.result.envelope->omega) << ','
              << csv::format_double(item.result.envelope->drift);
        } else {
            f << "nan,nan,nan";
        }
        f << ',' << to_string(item.result.classification.regime) << ','
          << (item.failed ? item.failure : "ok") << '\n';
    }
    return sw;
}

}  // namespace fmflow::scenario
