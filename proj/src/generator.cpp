#include "atomfringe/generator.hpp"

#include <cmath>
#include <sstream>

#include "atomfringe/errors.hpp"

namespace atomfringe {

Eigen::Matrix3d build_dissipator(const LindbladParams& p) {
    Eigen::Matrix3d d;
    d << p.a, p.b, p.c,
         p.b, p.alpha, p.beta,
         p.c, p.beta, p.gamma;
    return -2.0 * d;
}

Generator build_generator(const LindbladParams& p) {
    Generator g;
    g.h << p.a, p.b + p.omega, p.c,
           p.b - p.omega, p.alpha, p.beta,
           p.c, p.beta, p.gamma;
    return g;
}

CPCertificate check_complete_positivity(const LindbladParams& p, double tol) {
    CPCertificate cert;
    cert.R = 0.5 * (p.alpha + p.gamma - p.a);
    cert.S = 0.5 * (p.a + p.gamma - p.alpha);
    cert.T = 0.5 * (p.a + p.alpha - p.gamma);

    const double R = cert.R, S = cert.S, T = cert.T;
    const std::pair<std::string, double> checks[] = {
        {"a>=0", p.a},
        {"alpha>=0", p.alpha},
        {"gamma>=0", p.gamma},
        {"R>=0", R},
        {"S>=0", S},
        {"T>=0", T},
        {"RS>=b^2", R * S - p.b * p.b},
        {"RT>=c^2", R * T - p.c * p.c},
        {"ST>=beta^2", S * T - p.beta * p.beta},
        {"RST>=2bc*beta+R*beta^2+S*c^2+T*b^2",
         R * S * T - (2.0 * p.b * p.c * p.beta + R * p.beta * p.beta +
                      S * p.c * p.c + T * p.b * p.b)},
    };

    cert.satisfied = true;
    for (const auto& [name, margin] : checks) {
        const bool ok = margin >= -tol;
        cert.margins.push_back({name, margin, ok});
        if (!ok) {
            cert.satisfied = false;
            cert.violated_constraints.push_back(name);
        }
    }
    return cert;
}

double dissipative_scale(double atom_mass_gev, double planck_mass_gev) {
    if (!(atom_mass_gev > 0.0) || !(planck_mass_gev > 0.0)) {
        std::ostringstream os;
        os << "masses must be positive: atom=" << atom_mass_gev
           << " GeV, planck=" << planck_mass_gev << " GeV";
        throw ValidationError(os.str());
    }
    return atom_mass_gev * atom_mass_gev / planck_mass_gev;
}

double gev_to_angular_frequency(double x_gev) { return x_gev / constants::hbar_gev_s; }

double angular_frequency_to_gev(double x_per_s) { return x_per_s * constants::hbar_gev_s; }

LindbladParams sample_cp_params(std::mt19937_64& rng, double scale, double omega_scale) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);

    for (;;) {
        const double R = scale * unit(rng);
        const double S = scale * unit(rng);
        const double T = scale * unit(rng);

        LindbladParams p;
        p.a = S + T;
        p.alpha = R + T;
        p.gamma = R + S;
        p.b = sym(rng) * std::sqrt(R * S);
        p.c = sym(rng) * std::sqrt(R * T);
        p.beta = sym(rng) * std::sqrt(S * T);
        p.omega = sym(rng) * omega_scale;

        const double lhs = R * S * T;
        const double rhs = 2.0 * p.b * p.c * p.beta + R * p.beta * p.beta +
                           S * p.c * p.c + T * p.b * p.b;
        if (lhs >= rhs) return p;
    }
}

} // namespace atomfringe
