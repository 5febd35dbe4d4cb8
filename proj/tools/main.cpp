// Command-line front end: simulate fringe patterns, validate parameter
// sets against the complete-positivity constraints, generate synthetic
// Poisson datasets, fit fringe scans, and report the Planck-scale bound.
//
// Exit codes: 0 success, 1 validation/physics failure, 2 usage,
// 3 numerical non-convergence.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atomfringe/constants.hpp"
#include "atomfringe/dynamics.hpp"
#include "atomfringe/errors.hpp"
#include "atomfringe/fitting.hpp"
#include "atomfringe/fringe.hpp"
#include "atomfringe/generator.hpp"
#include "atomfringe/io.hpp"

namespace {

using namespace atomfringe;

constexpr int exit_ok = 0;
constexpr int exit_physics = 1;
constexpr int exit_usage = 2;
constexpr int exit_nonconverged = 3;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

struct SimulateOptions {
    std::string params_file;
    std::string geometry_file;
    std::string output;
    std::string route = "auto";
    std::string scan = "x";
    int points = 200;
    double xmin_nm = 0.0;
    double xmax_nm = 0.0; // 0 = two fringe periods
    double theta_min = 0.0;
    double theta_max = 2.0 * std::numbers::pi;
    double time = -1.0; // theta scan needs it; x scan defaults to t0
    bool exact_t = false;
    bool allow_noncp = false;
    double cp_tol = 0.0;
    std::string orientation = "one";
    double n0_plus = 1.0;
    double n0_minus = 1.0;
    double contrast_plus = 1.0;
    double contrast_minus = 1.0;
};

double route_intensity(const std::string& route, const LindbladParams& p, double theta,
                       double t, Port port, Orientation orient) {
    if (route == "standard") return 0.5 * (1.0 + port_sign(port) * std::cos(theta));
    if (route == "simple") return intensity_simple(p.alpha, p.omega, theta, t, port);
    if (route == "perturbative") return intensity_perturbative(p, theta, t, port);
    if (orient == Orientation::Two) return intensity_evolve(p, theta, t, port, orient);
    return intensity_general(p, theta, t, port); // general | auto
}

int cmd_simulate(const SimulateOptions& opt) {
    const LindbladParams params = read_params_file(opt.params_file);
    const Orientation orient =
        opt.orientation == "two" ? Orientation::Two : Orientation::One;

    const CPCertificate cert = check_complete_positivity(params, opt.cp_tol);
    if (!cert.satisfied && !opt.allow_noncp) {
        std::cerr << "parameters violate complete positivity:";
        for (const auto& name : cert.violated_constraints) std::cerr << " " << name;
        std::cerr << "\n(use --allow-noncp to simulate anyway)\n";
        return exit_physics;
    }

    const double conservation =
        std::abs(opt.n0_plus * opt.contrast_plus - opt.n0_minus * opt.contrast_minus);
    if (conservation >
        1e-9 * 0.5 * (opt.n0_plus * opt.contrast_plus + opt.n0_minus * opt.contrast_minus)) {
        std::cerr << "particle conservation requires n0+ * C+ = n0- * C-\n";
        return exit_physics;
    }

    InstrumentGeometry geom;
    const bool theta_scan = opt.scan == "theta";
    if (!theta_scan || !opt.geometry_file.empty()) {
        if (opt.geometry_file.empty()) {
            std::cerr << "an x scan needs --geometry\n";
            return exit_usage;
        }
        geom = read_geometry_file(opt.geometry_file);
    }
    double t_fixed = opt.time;
    if (t_fixed < 0.0) {
        if (theta_scan) {
            std::cerr << "a theta scan needs --t\n";
            return exit_usage;
        }
        t_fixed = geom.t0;
    }

    std::ofstream out(opt.output);
    if (!out) {
        std::cerr << "cannot write " << opt.output << "\n";
        return exit_physics;
    }

    const std::string route = opt.route == "auto" ? "general" : opt.route;
    out << "# atomfringe simulate\n";
    out << "# route = " << route << "\n";
    out << "# orientation = " << (orient == Orientation::Two ? "two" : "one") << "\n";
    if (!cert.satisfied)
        out << "# WARNING: parameters violate complete positivity (--allow-noncp)\n";
    if (theta_scan)
        out << "# columns: theta_rad t_s I_plus I_minus N_plus N_minus\n";
    else
        out << "# columns: x_nm theta_rad t_s I_plus I_minus N_plus N_minus\n";

    double max_discrepancy = 0.0;
    for (int i = 0; i < opt.points; ++i) {
        const double frac = opt.points > 1 ? static_cast<double>(i) / (opt.points - 1) : 0.0;
        double theta = 0.0, t = t_fixed, x_nm = 0.0;
        if (theta_scan) {
            theta = opt.theta_min + frac * (opt.theta_max - opt.theta_min);
        } else {
            double xmax_nm = opt.xmax_nm;
            if (xmax_nm <= opt.xmin_nm)
                xmax_nm = opt.xmin_nm + 2.0 * (2.0 * std::numbers::pi / geom.kappa) * 1e9;
            x_nm = opt.xmin_nm + frac * (xmax_nm - opt.xmin_nm);
            theta = geom.theta0 + geom.kappa * (x_nm * 1e-9);
            if (opt.exact_t) t = flight_time(geom, x_nm * 1e-9).t;
        }

        const double i_plus = route_intensity(route, params, theta, t, Port::Plus, orient);
        const double i_minus = route_intensity(route, params, theta, t, Port::Minus, orient);

        const double check = intensity_evolve(params, theta, t, Port::Plus, orient);
        max_discrepancy = std::max(max_discrepancy, std::abs(check - i_plus));

        const double bracket = i_plus - i_minus;
        const double n_plus = opt.n0_plus * (1.0 + opt.contrast_plus * bracket);
        const double n_minus = opt.n0_minus * (1.0 - opt.contrast_minus * bracket);

        if (!theta_scan) out << fmt(x_nm) << "\t";
        out << fmt(theta) << "\t" << fmt(t) << "\t" << fmt(i_plus) << "\t" << fmt(i_minus)
            << "\t" << fmt(n_plus) << "\t" << fmt(n_minus) << "\n";
    }
    out << "# max_route_discrepancy_vs_evolve = " << fmt(max_discrepancy) << "\n";
    return exit_ok;
}

int cmd_validate(const std::string& params_file, double tol) {
    const LindbladParams params = read_params_file(params_file);
    const CPCertificate cert = check_complete_positivity(params, tol);

    std::printf("R = %s s^-1\nS = %s s^-1\nT = %s s^-1\n", fmt(cert.R).c_str(),
                fmt(cert.S).c_str(), fmt(cert.T).c_str());
    for (const auto& m : cert.margins)
        std::printf("%-36s margin = % .6e  %s\n", m.name.c_str(), m.margin,
                    m.satisfied ? "PASS" : "FAIL");
    std::printf("complete positivity: %s\n", cert.satisfied ? "PASS" : "FAIL");
    return cert.satisfied ? exit_ok : exit_physics;
}

struct SynthOptions {
    std::string params_file;
    std::string geometry_file;
    std::string output;
    double contrast = 1.0;
    double n0 = 1e4;
    int points = 50;
    double xmin_nm = 0.0;
    double xmax_nm = 0.0; // 0 = two fringe periods
    std::string port = "-";
    std::uint64_t seed = 1;
};

int cmd_synth(const SynthOptions& opt) {
    const LindbladParams params = read_params_file(opt.params_file);
    const InstrumentGeometry geom = read_geometry_file(opt.geometry_file);
    const Port port = opt.port == "+" ? Port::Plus : Port::Minus;

    const FringeParams fp = FringeParams::from_physics(
        opt.n0, opt.n0, opt.contrast, opt.contrast, params.alpha, params.omega, geom.t0);

    double xmax_nm = opt.xmax_nm;
    if (xmax_nm <= opt.xmin_nm)
        xmax_nm = opt.xmin_nm + 2.0 * (2.0 * std::numbers::pi / geom.kappa) * 1e9;
    std::vector<double> xs(opt.points);
    for (int i = 0; i < opt.points; ++i)
        xs[i] = (opt.xmin_nm + (xmax_nm - opt.xmin_nm) * i / std::max(1, opt.points - 1)) * 1e-9;

    const FringeDataset ds = synth_dataset(fp, geom, xs, opt.seed, port);
    write_dataset_file(opt.output, ds);
    return exit_ok;
}

struct FitOptions {
    std::string dataset_file;
    std::string geometry_file;
    std::string second_dataset;
    std::string second_geometry;
    std::string output;
    std::optional<double> theta0;
    bool theta0_free = false;
    std::optional<double> contrast;
    double contrast_err = 0.0;
    std::string visibility = "quantile";
};

int cmd_fit(const FitOptions& opt) {
    const InstrumentGeometry geom = read_geometry_file(opt.geometry_file);
    const FringeDataset ds = read_dataset_file(opt.dataset_file, geom);

    Theta0Mode mode;
    if (!opt.theta0_free) mode = opt.theta0 ? *opt.theta0 : geom.theta0;

    const FitResult fit = fit_fringe(ds, mode);
    if (!fit.converged) {
        std::cerr << "fit did not converge: " << fit.message << "\n";
        return exit_nonconverged;
    }

    const VisibilityMethod method = opt.visibility == "extrema"
                                        ? VisibilityMethod::Extrema
                                        : VisibilityMethod::Quantile;
    const double contrast = opt.contrast ? *opt.contrast : visibility_contrast(ds, method);
    const DissipativeEstimate single =
        extract_dissipative(fit, contrast, geom.t0, opt.contrast_err);

    std::optional<DissipativeEstimate> joint;
    if (!opt.second_dataset.empty()) {
        if (opt.second_geometry.empty()) {
            std::cerr << "--second-dataset needs --second-geometry (different t0)\n";
            return exit_usage;
        }
        const InstrumentGeometry geom2 = read_geometry_file(opt.second_geometry);
        const FringeDataset ds2 = read_dataset_file(opt.second_dataset, geom2);
        Theta0Mode mode2;
        if (!opt.theta0_free) mode2 = opt.theta0 ? *opt.theta0 : geom2.theta0;
        const FitResult fit2 = fit_fringe(ds2, mode2);
        if (!fit2.converged) {
            std::cerr << "second fit did not converge: " << fit2.message << "\n";
            return exit_nonconverged;
        }
        joint = two_time_separation(fit, geom.t0, fit2, geom2.t0);
    }

    std::cout << fit_report_text(fit, &single, joint ? &*joint : nullptr);
    if (!opt.output.empty()) {
        std::ofstream out(opt.output);
        if (!out) {
            std::cerr << "cannot write " << opt.output << "\n";
            return exit_physics;
        }
        out << fit_report_json(fit, &single, joint ? &*joint : nullptr);
    }
    return exit_ok;
}

int cmd_scale_bound(double atom_mass_gev, double planck_mass_gev) {
    const double bound_gev = dissipative_scale(atom_mass_gev, planck_mass_gev);
    const double bound_per_s = gev_to_angular_frequency(bound_gev);
    std::printf("atom mass            = %s GeV\n", fmt(atom_mass_gev).c_str());
    std::printf("planck mass          = %s GeV\n", fmt(planck_mass_gev).c_str());
    std::printf("dissipative scale    = %s GeV\n", fmt(bound_gev).c_str());
    std::printf("                     = %s s^-1\n", fmt(bound_per_s).c_str());
    std::printf("                     = %s kHz\n", fmt(bound_per_s / 1e3).c_str());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dissipative two-beam atom-interferometer fringe toolkit"};
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* simulate = app.add_subcommand(
        "simulate", "Write a fringe-intensity table for a parameter set");
    simulate->add_option("--params", sim.params_file, "parameter file")->required();
    simulate->add_option("--geometry", sim.geometry_file, "geometry file");
    simulate->add_option("-o,--output", sim.output, "output table")->required();
    simulate->add_option("--route", sim.route, "auto|general|simple|perturbative|standard")
        ->check(CLI::IsMember({"auto", "general", "simple", "perturbative", "standard"}));
    simulate->add_option("--scan", sim.scan, "x|theta")
        ->check(CLI::IsMember({"x", "theta"}));
    simulate->add_option("--points", sim.points, "grid points")->check(CLI::PositiveNumber);
    simulate->add_option("--xmin-nm", sim.xmin_nm, "scan start");
    simulate->add_option("--xmax-nm", sim.xmax_nm, "scan end (default: two periods)");
    simulate->add_option("--theta-min", sim.theta_min, "theta scan start (rad)");
    simulate->add_option("--theta-max", sim.theta_max, "theta scan end (rad)");
    simulate->add_option("--t", sim.time, "evolution time (s); default t0");
    simulate->add_flag("--exact-t", sim.exact_t, "use the x-dependent flight time");
    simulate->add_flag("--allow-noncp", sim.allow_noncp,
                       "simulate despite complete-positivity violations");
    simulate->add_option("--cp-tol", sim.cp_tol, "slack for the positivity check");
    simulate->add_option("--orientation", sim.orientation, "one|two")
        ->check(CLI::IsMember({"one", "two"}));
    simulate->add_option("--n0-plus", sim.n0_plus, "plus-port normalization");
    simulate->add_option("--n0-minus", sim.n0_minus, "minus-port normalization");
    simulate->add_option("--contrast-plus", sim.contrast_plus, "plus-port contrast");
    simulate->add_option("--contrast-minus", sim.contrast_minus, "minus-port contrast");

    std::string validate_params;
    double validate_tol = 0.0;
    auto* validate = app.add_subcommand(
        "validate", "Check a parameter set against the positivity constraints");
    validate->add_option("--params", validate_params, "parameter file")->required();
    validate->add_option("--tol", validate_tol, "constraint slack (default 0)");

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic Poisson dataset");
    synth_cmd->add_option("--params", synth.params_file, "parameter file")->required();
    synth_cmd->add_option("--geometry", synth.geometry_file, "geometry file")->required();
    synth_cmd->add_option("-o,--output", synth.output, "output dataset")->required();
    synth_cmd->add_option("--contrast", synth.contrast, "fringe contrast")
        ->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--n0", synth.n0, "counts normalization per point");
    synth_cmd->add_option("--points", synth.points, "number of scan points")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--xmin-nm", synth.xmin_nm, "scan start");
    synth_cmd->add_option("--xmax-nm", synth.xmax_nm, "scan end (default: two periods)");
    synth_cmd->add_option("--port", synth.port, "+|-")->check(CLI::IsMember({"+", "-"}));
    synth_cmd->add_option("--seed", synth.seed, "random seed");

    FitOptions fit;
    double fit_theta0 = 0.0;
    double fit_contrast = 0.0;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a fringe dataset and extract "
                                              "the dissipative parameters");
    fit_cmd->add_option("--dataset", fit.dataset_file, "dataset file")->required();
    fit_cmd->add_option("--geometry", fit.geometry_file, "geometry file")->required();
    auto* theta0_opt =
        fit_cmd->add_option("--theta0", fit_theta0, "fix theta0 (rad); default: geometry");
    fit_cmd->add_flag("--theta0-free", fit.theta0_free,
                      "fit with the theta0 = 0 convention");
    auto* contrast_opt = fit_cmd->add_option(
        "--contrast", fit_contrast, "contrast override (default: visibility estimate)");
    fit_cmd->add_option("--contrast-err", fit.contrast_err, "contrast uncertainty");
    fit_cmd->add_option("--visibility-method", fit.visibility, "quantile|extrema")
        ->check(CLI::IsMember({"quantile", "extrema"}));
    fit_cmd->add_option("--second-dataset", fit.second_dataset,
                        "dataset at a different flight time");
    fit_cmd->add_option("--second-geometry", fit.second_geometry,
                        "geometry of the second dataset");
    fit_cmd->add_option("-o,--output", fit.output, "JSON report file");

    double atom_mass = 0.0;
    double planck_mass = constants::planck_mass_gev;
    auto* scale = app.add_subcommand(
        "scale-bound", "Planck-scale estimate of the dissipative parameters");
    scale->add_option("--atom-mass-gev", atom_mass, "atom mass in GeV")->required();
    scale->add_option("--planck-mass-gev", planck_mass, "Planck mass in GeV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (validate->parsed()) return cmd_validate(validate_params, validate_tol);
        if (synth_cmd->parsed()) return cmd_synth(synth);
        if (fit_cmd->parsed()) {
            if (*theta0_opt) fit.theta0 = fit_theta0;
            if (*contrast_opt) fit.contrast = fit_contrast;
            return cmd_fit(fit);
        }
        if (scale->parsed()) return cmd_scale_bound(atom_mass, planck_mass);
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return exit_physics;
    } catch (const ValidationError& e) {
        std::cerr << e.what() << "\n";
        return exit_physics;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_physics;
    }
    return exit_usage;
}
