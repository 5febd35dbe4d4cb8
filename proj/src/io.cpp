#include "atomfringe/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "atomfringe/errors.hpp"

namespace atomfringe {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct KeyValueFile {
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::filesystem::path path;
    std::map<std::string, Entry> entries;

    double number(const std::string& key, int line) const {
        const auto it = entries.find(key);
        const std::string& text = it->second.value;
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(text, &used);
        } catch (const std::exception&) {
            throw ParseError(path, line, "expected a number for '" + key + "', got '" + text + "'");
        }
        if (used != text.size())
            throw ParseError(path, line, "trailing characters after number in '" + text + "'");
        return value;
    }

    double number_or(const std::string& key, double fallback) const {
        const auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        return number(key, it->second.line);
    }

    double required_number(const std::string& key) const {
        const auto it = entries.find(key);
        if (it == entries.end())
            throw ParseError(path, 0, "missing required key '" + key + "'");
        return number(key, it->second.line);
    }
};

KeyValueFile read_key_value(const std::filesystem::path& file,
                            const std::vector<std::string>& known_keys) {
    std::ifstream in(file);
    if (!in) throw ParseError(file, 0, "cannot open file");

    KeyValueFile kv;
    kv.path = file;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(file, line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError(file, line_no, "expected 'key = value'");
        if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end())
            throw ParseError(file, line_no, "unknown key '" + key + "'");
        if (kv.entries.count(key))
            throw ParseError(file, line_no, "duplicate key '" + key + "'");
        kv.entries[key] = {value, line_no};
    }
    return kv;
}

nlohmann::json estimate_json(const DissipativeEstimate& est) {
    auto finite_or_null = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    return {
        {"alpha_per_s", est.alpha},
        {"alpha_err_per_s", finite_or_null(est.alpha_err)},
        {"alpha_gev", est.alpha_gev()},
        {"alpha_err_gev", finite_or_null(est.alpha_err_gev())},
        {"omega_per_s", est.omega},
        {"omega_err_per_s", finite_or_null(est.omega_err)},
        {"omega_gev", est.omega_gev()},
        {"omega_err_gev", finite_or_null(est.omega_err_gev())},
        {"omega_branch", "2*omega*t0 reported in (-pi/2, pi/2]"},
        {"contrast_used", est.contrast_used},
        {"contrast_err", est.contrast_err},
        {"alpha_clamped", est.alpha_clamped},
        {"warnings", est.warnings},
    };
}

void append_estimate_text(std::ostringstream& os, const DissipativeEstimate& est) {
    os << "alpha          = " << est.alpha << " +- " << est.alpha_err << " s^-1  ("
       << est.alpha_gev() << " +- " << est.alpha_err_gev() << " GeV)\n";
    os << "omega          = " << est.omega << " +- " << est.omega_err << " s^-1  ("
       << est.omega_gev() << " +- " << est.omega_err_gev() << " GeV)\n";
    os << "omega branch   : 2*omega*t0 in (-pi/2, pi/2]\n";
    os << "contrast used  = " << est.contrast_used << " +- " << est.contrast_err << "\n";
    for (const auto& w : est.warnings) os << "warning        : " << w << "\n";
}

} // namespace

ParseError::ParseError(const std::filesystem::path& file, int line, const std::string& what)
    : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

LindbladParams read_params_file(const std::filesystem::path& file) {
    const KeyValueFile kv = read_key_value(
        file, {"a", "b", "c", "alpha", "beta", "gamma", "omega", "energy", "units"});

    const auto units_it = kv.entries.find("units");
    if (units_it == kv.entries.end())
        throw ParseError(file, 0, "missing required key 'units' (per_second | GeV)");
    const std::string& units = units_it->second.value;
    double to_per_second = 1.0;
    if (units == "GeV")
        to_per_second = gev_to_angular_frequency(1.0);
    else if (units != "per_second")
        throw ParseError(file, units_it->second.line,
                         "units must be 'per_second' or 'GeV', got '" + units + "'");

    LindbladParams p;
    p.a = to_per_second * kv.number_or("a", 0.0);
    p.b = to_per_second * kv.number_or("b", 0.0);
    p.c = to_per_second * kv.number_or("c", 0.0);
    p.alpha = to_per_second * kv.number_or("alpha", 0.0);
    p.beta = to_per_second * kv.number_or("beta", 0.0);
    p.gamma = to_per_second * kv.number_or("gamma", 0.0);
    p.omega = to_per_second * kv.number_or("omega", 0.0);
    p.energy = to_per_second * kv.number_or("energy", 0.0);
    return p;
}

void write_params_file(const std::filesystem::path& file, const LindbladParams& p) {
    std::ofstream out(file);
    if (!out) throw ValidationError("cannot write " + file.string());
    out.precision(17);
    out << "units = per_second\n"
        << "a = " << p.a << "\n"
        << "b = " << p.b << "\n"
        << "c = " << p.c << "\n"
        << "alpha = " << p.alpha << "\n"
        << "beta = " << p.beta << "\n"
        << "gamma = " << p.gamma << "\n"
        << "omega = " << p.omega << "\n"
        << "energy = " << p.energy << "\n";
}

InstrumentGeometry read_geometry_file(const std::filesystem::path& file) {
    const KeyValueFile kv = read_key_value(
        file, {"kappa_per_m", "t0_s", "bragg_angle_rad", "velocity_m_s", "theta0_rad",
               "x1_m", "x2_m", "x3_m"});

    InstrumentGeometry g;
    g.kappa = kv.required_number("kappa_per_m");
    g.t0 = kv.required_number("t0_s");
    g.bragg_angle = kv.required_number("bragg_angle_rad");
    g.velocity = kv.required_number("velocity_m_s");
    g.theta0 = kv.required_number("theta0_rad");
    g.x1 = kv.number_or("x1_m", 0.0);
    g.x2 = kv.number_or("x2_m", 0.0);
    g.x3 = kv.number_or("x3_m", 0.0);

    if (!(g.kappa > 0.0)) throw ParseError(file, 0, "kappa_per_m must be positive");
    if (!(g.t0 > 0.0)) throw ParseError(file, 0, "t0_s must be positive");
    if (!(g.velocity > 0.0)) throw ParseError(file, 0, "velocity_m_s must be positive");
    return g;
}

FringeDataset read_dataset_file(const std::filesystem::path& file,
                                const InstrumentGeometry& geometry) {
    std::ifstream in(file);
    if (!in) throw ParseError(file, 0, "cannot open file");

    FringeDataset ds;
    ds.geometry = geometry;

    std::string line;
    int line_no = 0;
    bool have_header = false;
    bool have_port = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;

        std::istringstream row(text);
        if (!have_header) {
            std::string c1, c2, c3;
            row >> c1 >> c2 >> c3;
            if (c1 != "x_nm" || c2 != "counts" || c3 != "port")
                throw ParseError(file, line_no, "expected header 'x_nm counts port'");
            have_header = true;
            continue;
        }

        double x_nm = 0.0;
        std::int64_t counts = 0;
        std::string port_text;
        if (!(row >> x_nm >> counts >> port_text))
            throw ParseError(file, line_no, "expected 'x_nm counts port'");
        if (counts < 0) throw ParseError(file, line_no, "counts must be non-negative");

        Port port;
        if (port_text == "+") port = Port::Plus;
        else if (port_text == "-") port = Port::Minus;
        else throw ParseError(file, line_no, "port must be '+' or '-'");

        if (!have_port) {
            ds.port = port;
            have_port = true;
        } else if (port != ds.port) {
            throw ParseError(file, line_no, "mixed ports in one dataset");
        }
        ds.samples.push_back({x_nm * 1e-9, counts});
    }
    if (!have_header) throw ParseError(file, 0, "missing header 'x_nm counts port'");
    return ds;
}

void write_dataset_file(const std::filesystem::path& file, const FringeDataset& ds) {
    std::ofstream out(file);
    if (!out) throw ValidationError("cannot write " + file.string());
    out.precision(17);
    out << "x_nm\tcounts\tport\n";
    const char* port = ds.port == Port::Plus ? "+" : "-";
    for (const auto& sample : ds.samples)
        out << sample.x * 1e9 << "\t" << sample.counts << "\t" << port << "\n";
}

std::string fit_report_json(const FitResult& fit, const DissipativeEstimate* single_time,
                            const DissipativeEstimate* two_time) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["fit"] = {
        {"n0_counts", fit.n0},
        {"n0_err_counts", std::sqrt(fit.covariance(0, 0))},
        {"p", fit.p},
        {"p_err", std::sqrt(fit.covariance(1, 1))},
        {"q", fit.q},
        {"q_err", std::sqrt(fit.covariance(2, 2))},
        {"theta0_rad", fit.theta0},
        {"theta0_fixed", fit.theta0_fixed},
        {"chi2", fit.chi2},
        {"dof", fit.dof},
        {"chi2_per_dof", fit.dof > 0 ? fit.chi2 / fit.dof : 0.0},
        {"converged", fit.converged},
        {"port", fit.port == Port::Plus ? "+" : "-"},
        {"covariance_order", {"n0", "p", "q"}},
        {"covariance",
         {{fit.covariance(0, 0), fit.covariance(0, 1), fit.covariance(0, 2)},
          {fit.covariance(1, 0), fit.covariance(1, 1), fit.covariance(1, 2)},
          {fit.covariance(2, 0), fit.covariance(2, 1), fit.covariance(2, 2)}}},
    };
    if (single_time) j["dissipative"] = estimate_json(*single_time);
    if (two_time) j["two_time"] = estimate_json(*two_time);
    return j.dump(2) + "\n";
}

std::string fit_report_text(const FitResult& fit, const DissipativeEstimate* single_time,
                            const DissipativeEstimate* two_time) {
    std::ostringstream os;
    os.precision(8);
    os << "port           = " << (fit.port == Port::Plus ? "+" : "-") << "\n";
    os << "n0             = " << fit.n0 << " +- " << std::sqrt(fit.covariance(0, 0))
       << " counts\n";
    os << "P              = " << fit.p << " +- " << std::sqrt(fit.covariance(1, 1)) << "\n";
    os << "Q              = " << fit.q << " +- " << std::sqrt(fit.covariance(2, 2)) << "\n";
    os << "theta0         = " << fit.theta0 << " rad ("
       << (fit.theta0_fixed ? "fixed" : "pinned to 0 by convention") << ")\n";
    os << "chi2 / dof     = " << fit.chi2 << " / " << fit.dof << " = "
       << (fit.dof > 0 ? fit.chi2 / fit.dof : 0.0) << "\n";
    os << "converged      = " << (fit.converged ? "yes" : "no") << "\n";
    if (single_time) {
        os << "--- dissipative parameters (visibility-contrast route) ---\n";
        append_estimate_text(os, *single_time);
        os << "note           : the contrast estimated from the same scan is itself\n"
           << "                 damped by exp(-2 alpha t0), which biases alpha toward 0;\n"
           << "                 prefer the two-flight-time route when available\n";
    }
    if (two_time) {
        os << "--- dissipative parameters (two flight times, contrast-free) ---\n";
        append_estimate_text(os, *two_time);
    }
    return os.str();
}

} // namespace atomfringe
