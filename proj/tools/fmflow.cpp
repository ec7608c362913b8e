// Command-line front end: preset and config-file scenario runs, one-axis
// sweeps, lattice-layer checks, and indicator recomputation from a run CSV.
//
// Exit codes: 0 success, 2 configuration error, 3 integration failure
// (boundary reached or step failure), 4 internal invariant violation.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmflow/config.hpp"
#include "fmflow/indicators.hpp"
#include "fmflow/lattice.hpp"
#include "fmflow/scenario.hpp"

namespace {

std::vector<double> parse_list(const std::string& csv_list) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv_list.size()) {
        std::size_t next = csv_list.find(',', pos);
        if (next == std::string::npos) next = csv_list.size();
        const std::string item = csv_list.substr(pos, next - pos);
        if (!item.empty()) out.push_back(fmflow::config::detail::parse_number("list", "value", item));
        pos = next + 1;
    }
    return out;
}

struct RunOptions {
    std::string preset;
    std::string config_file;
    std::string out_dir = "out";
    std::vector<std::string> sets;
    std::string tol;
    double t_end = 0.0;
    double sample = 0.0;
    bool svg_on = false, svg_off = false;
};

fmflow::config::ConfigBuilder make_builder(const RunOptions& opt) {
    using namespace fmflow::config;
    if (opt.preset.empty() == opt.config_file.empty())
        throw fmflow::ConfigError("give exactly one of --preset and --config");
    ConfigBuilder b =
        opt.preset.empty() ? load_config_file(opt.config_file) : preset_builder(opt.preset);
    for (const auto& s : opt.sets) apply_override(b, s);
    if (!opt.tol.empty()) {
        const auto vals = parse_list(opt.tol);
        if (vals.empty() || vals.size() > 2)
            throw fmflow::ConfigError("--tol expects REL or REL,ABS");
        apply_override(b, "integrator.rel_tol=" + fmflow::csv::format_double(vals[0]));
        if (vals.size() == 2)
            apply_override(b, "integrator.abs_tol=" + fmflow::csv::format_double(vals[1]));
    }
    if (opt.t_end != 0.0)
        apply_override(b, "integrator.t_end=" + fmflow::csv::format_double(opt.t_end));
    if (opt.sample != 0.0)
        apply_override(b, "sampling.dtau=" + fmflow::csv::format_double(opt.sample));
    if (opt.svg_on) apply_override(b, "output.svg=true");
    if (opt.svg_off) apply_override(b, "output.svg=false");
    return b;
}

void add_run_options(CLI::App* cmd, RunOptions& opt) {
    cmd->add_option("--preset", opt.preset, "named scenario preset");
    cmd->add_option("--config", opt.config_file, "scenario config file");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--set", opt.sets, "override, section.key=value (repeatable)");
    cmd->add_option("--tol", opt.tol, "integrator tolerance REL[,ABS]");
    cmd->add_option("--t-end", opt.t_end, "integration span in tau units");
    cmd->add_option("--sample", opt.sample, "output sampling interval dtau");
    auto* svg_flag = cmd->add_flag("--svg", opt.svg_on, "emit the SVG figure");
    cmd->add_flag("--no-svg", opt.svg_off, "skip the SVG figure")->excludes(svg_flag);
}

int cmd_run(const RunOptions& opt) {
    const auto cfg = make_builder(opt).build();
    const auto res = fmflow::scenario::run_scenario(cfg, opt.out_dir);
    std::cout << "run: " << (cfg.preset.empty() ? opt.config_file : cfg.preset)
              << "  termination=" << fmflow::to_string(res.termination)
              << "  tau=" << res.termination_tau << '\n'
              << "  csv: " << res.csv_path.string() << '\n';
    if (!res.svg_path.empty()) std::cout << "  svg: " << res.svg_path.string() << '\n';
    std::cout << "  report: " << res.json_path.string() << '\n';
    if (res.envelope)
        std::cout << "  envelope: damping=" << res.envelope->damping
                  << " omega=" << res.envelope->omega << " drift=" << res.envelope->drift
                  << '\n';
    std::cout << "  regime: " << fmflow::to_string(res.classification.regime) << '\n';
    return res.exit_code;
}

int cmd_sweep(const RunOptions& opt, const std::string& axis, const std::string& values) {
    const auto base = make_builder(opt);
    const auto sw = fmflow::scenario::sweep(base, axis, parse_list(values), opt.out_dir);
    std::cout << "sweep over " << axis << ": " << sw.items.size() << " runs\n"
              << "  summary: " << sw.summary_path.string() << '\n';
    for (const auto& item : sw.items)
        std::cout << "  " << axis << "=" << item.value << "  "
                  << (item.failed ? item.failure : "ok") << '\n';
    return sw.exit_code;
}

struct LatticeOptions {
    std::vector<double> plaquette;
    std::vector<double> transition;
    std::vector<double> state{1.0, 0.0};
    bool normalize = false;
    std::vector<double> hamiltonian;
    std::string action_sine_dts;
    double sigma2 = 1.0;
    std::string weight_factors;
    double beta = 1.0;
    long det_draws = 0;
};

int cmd_lattice(const LatticeOptions& opt) {
    namespace lat = fmflow::lattice;
    bool did_something = false;

    if (opt.plaquette.size() == 2) {
        did_something = true;
        std::cout << "plaquette_return(" << opt.plaquette[0] << ", " << opt.plaquette[1]
                  << ") = " << lat::plaquette_return(opt.plaquette[0], opt.plaquette[1])
                  << '\n';
    }
    if (opt.transition.size() == 2) {
        did_something = true;
        const auto m = lat::transition_matrix(opt.transition[0], opt.transition[1]);
        const auto e = m.entries();
        std::cout << "P = [[" << e.a11 << ", " << e.a12 << "], [" << e.a21 << ", " << e.a22
                  << "]]\n"
                  << "det = " << m.determinant() << '\n';
        const auto applied =
            lat::apply(m, {opt.state[0], opt.state[1]}, opt.normalize);
        std::cout << "P @ (" << opt.state[0] << ", " << opt.state[1] << ") = ("
                  << applied.p1 << ", " << applied.p2 << ")"
                  << (opt.normalize ? " [normalized]" : "") << '\n';
    }
    if (opt.hamiltonian.size() == 3) {
        did_something = true;
        const auto hm = lat::hamiltonian_matrix(opt.hamiltonian[0], opt.hamiltonian[1],
                                                opt.hamiltonian[2]);
        std::cout << "H = [[" << hm.a11 << ", " << hm.a12 << "], [" << hm.a21 << ", "
                  << hm.a22 << "]]  (scales as 1/dt)\n";
    }
    if (!opt.action_sine_dts.empty()) {
        did_something = true;
        const auto dts = parse_list(opt.action_sine_dts);
        const double target = std::numbers::pi * std::numbers::pi;
        std::vector<double> errs;
        for (double dt : dts) {
            const double a1 = lat::discrete_action(lat::sine_log_rate_path(dt, opt.sigma2));
            errs.push_back(std::abs(a1 - target));
            std::cout << "dt=" << dt << "  A1=" << a1 << "  |A1 - pi^2|=" << errs.back()
                      << '\n';
        }
        if (dts.size() >= 2) {
            const double slope = std::log(errs.front() / errs.back()) /
                                 std::log(dts.front() / dts.back());
            std::cout << "log-log order slope = " << slope << '\n';
        }
    }
    if (!opt.weight_factors.empty()) {
        did_something = true;
        const lat::LatticePath path{parse_list(opt.weight_factors)};
        std::cout << "s(Q) = " << path.log_return()
                  << "  weight = " << lat::path_weight(path, opt.beta) << '\n';
    }
    if (opt.det_draws > 0) {
        did_something = true;
        std::mt19937_64 rng(20240915);
        std::uniform_real_distribution<double> log_s(-3.0, 3.0), b(-4.0, 4.0);
        long exact = 0;
        for (long i = 0; i < opt.det_draws; ++i)
            if (lat::transition_matrix(std::exp(log_s(rng)), b(rng)).determinant() == 0.0)
                ++exact;
        std::cout << exact << "/" << opt.det_draws << " determinants exactly zero\n";
        if (exact != opt.det_draws) throw fmflow::InvariantViolation("nonzero determinant");
    }
    if (!did_something)
        throw fmflow::ConfigError(
            "lattice: nothing to do; give one of --plaquette, --transition, "
            "--hamiltonian, --action-sine, --weight, --det-check");
    return 0;
}

int cmd_indicators(const std::string& csv_in, const std::string& csv_out, double base) {
    namespace ind = fmflow::indicators;
    const auto table = fmflow::csv::read_file(csv_in);

    ind::IndicatorSeries series;
    series.taus = table.column_values("tau");
    series.volume = table.column_values("V");
    series.ret = table.column_values("R");
    series.rate = table.column_values("S");
    series.base = base;
    if (series.size() < 2) throw fmflow::ConfigError("indicators: need >= 2 rows");
    const double dt = series.taus[1] - series.taus[0];
    for (std::size_t k = 1; k < series.size(); ++k) {
        const double step = series.taus[k] - series.taus[k - 1];
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw fmflow::ConfigError("indicators: tau grid is not uniform");
    }

    series = ind::recursive_pvi_nvi(std::move(series));
    const auto stylized = ind::stylized_continuous_pvi(series);

    fmflow::csv::Table out;
    out.header = {"tau", "V", "R", "PVI", "NVI", "PVI_stylized"};
    for (std::size_t k = 0; k < series.size(); ++k)
        out.rows.push_back({series.taus[k], series.volume[k], series.ret[k],
                            series.pvi[k], series.nvi[k], stylized[k]});
    fmflow::csv::write_file(out, csv_out);
    std::cout << "indicators: " << series.size() << " rows -> " << csv_out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fast-money-flow exchange-rate model: simulation and analysis"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "integrate one scenario and emit artifacts");
    add_run_options(run_cmd, run_opt);

    RunOptions sweep_opt;
    std::string sweep_axis, sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario across one axis");
    add_run_options(sweep_cmd, sweep_opt);
    sweep_cmd->add_option("--axis", sweep_axis, "section.key to vary")->required();
    sweep_cmd->add_option("--values", sweep_values,
                          "comma-separated values; omitted or empty runs an empty sweep");

    LatticeOptions lat_opt;
    auto* lat_cmd = app.add_subcommand("lattice", "discrete-layer checks");
    lat_cmd->add_option("--plaquette", lat_opt.plaquette, "S_n S_next")->expected(2);
    lat_cmd->add_option("--transition", lat_opt.transition, "S beta")->expected(2);
    lat_cmd->add_option("--state", lat_opt.state, "p1 p2 for --transition")->expected(2);
    lat_cmd->add_flag("--normalize", lat_opt.normalize, "normalize the applied state");
    lat_cmd->add_option("--hamiltonian", lat_opt.hamiltonian, "S beta dt")->expected(3);
    lat_cmd->add_option("--action-sine", lat_opt.action_sine_dts,
                        "comma-separated dt list for the sine-path action");
    lat_cmd->add_option("--sigma2", lat_opt.sigma2, "volatility for --action-sine");
    lat_cmd->add_option("--weight", lat_opt.weight_factors,
                        "comma-separated parallel-transport factors");
    lat_cmd->add_option("--beta", lat_opt.beta, "exponent for --weight");
    lat_cmd->add_option("--det-check", lat_opt.det_draws,
                        "random draws for the determinant-zero check");

    std::string ind_csv, ind_out = "indicators.csv";
    double ind_base = 1000.0;
    auto* ind_cmd =
        app.add_subcommand("indicators", "recompute PVI/NVI from an existing run CSV");
    ind_cmd->add_option("--csv", ind_csv, "input run CSV")->required();
    ind_cmd->add_option("--out", ind_out, "output CSV path");
    ind_cmd->add_option("--base", ind_base, "initial index level");

    try {
        app.parse(argc, argv);
        if (*run_cmd) return cmd_run(run_opt);
        if (*sweep_cmd) return cmd_sweep(sweep_opt, sweep_axis, sweep_values);
        if (*lat_cmd) return cmd_lattice(lat_opt);
        if (*ind_cmd) return cmd_indicators(ind_csv, ind_out, ind_base);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const fmflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const fmflow::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const fmflow::InvariantViolation& e) {
        std::cerr << "internal invariant violation: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
