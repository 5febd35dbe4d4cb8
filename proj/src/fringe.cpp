#include "atomfringe/fringe.hpp"

#include <cmath>
#include <sstream>

#include "atomfringe/dynamics.hpp"
#include "atomfringe/errors.hpp"

namespace atomfringe {

FringeParams FringeParams::from_physics(double n0_plus, double n0_minus,
                                        double contrast_plus, double contrast_minus,
                                        double alpha, double omega, double t0,
                                        double conservation_tol) {
    for (double contrast : {contrast_plus, contrast_minus}) {
        if (contrast < 0.0 || contrast > 1.0) {
            std::ostringstream os;
            os << "contrast must lie in [0, 1], got " << contrast;
            throw ValidationError(os.str());
        }
    }
    if (alpha < 0.0) throw ValidationError("alpha must be non-negative");

    FringeParams fp;
    fp.n0_plus = n0_plus;
    fp.n0_minus = n0_minus;
    fp.contrast_plus = contrast_plus;
    fp.contrast_minus = contrast_minus;
    std::tie(fp.p_plus, fp.q_plus) = pq_from_physics(contrast_plus, alpha, omega, t0);
    std::tie(fp.p_minus, fp.q_minus) = pq_from_physics(contrast_minus, alpha, omega, t0);

    if (!conservation_check(fp, conservation_tol)) {
        std::ostringstream os;
        os << "particle conservation requires n0+ C+ = n0- C-; got "
           << n0_plus * contrast_plus << " vs " << n0_minus * contrast_minus;
        throw ValidationError(os.str());
    }
    return fp;
}

double grating_phase(const InstrumentGeometry& g) {
    return g.kappa * (g.x1 - 2.0 * g.x2 + g.x3);
}

FlightTime flight_time(const InstrumentGeometry& g, double x) {
    FlightTime ft;
    ft.correction = g.bragg_angle * x / g.velocity;
    ft.t = g.t0 + ft.correction;
    ft.ratio = ft.correction / g.t0;
    return ft;
}

std::pair<double, double> pq_from_physics(double contrast, double alpha, double omega,
                                          double t0) {
    const double amplitude = contrast * std::exp(-2.0 * alpha * t0);
    return {amplitude * std::cos(2.0 * omega * t0), amplitude * std::sin(2.0 * omega * t0)};
}

double fringe_counts(const FringeParams& fp, const InstrumentGeometry& g, double x,
                     Port port) {
    const double phase = g.theta0 + g.kappa * x;
    const double oscillation =
        fp.p(port) * std::cos(phase) + fp.q(port) * std::sin(phase);
    return fp.n0(port) * (1.0 + port_sign(port) * oscillation);
}

double fringe_counts_exact_t(double n0, double contrast, double alpha, double omega,
                             const InstrumentGeometry& g, double x, Port port) {
    const double t = flight_time(g, x).t;
    const double theta = g.theta0 + g.kappa * x;
    const double bracket = contrast * (2.0 * intensity_simple(alpha, omega, theta, t, port) - 1.0);
    return n0 * (1.0 + bracket);
}

bool conservation_check(const FringeParams& fp, double tol) {
    const double plus = fp.n0_plus * fp.contrast_plus;
    const double minus = fp.n0_minus * fp.contrast_minus;
    return std::abs(plus - minus) <= tol * 0.5 * (plus + minus);
}

} // namespace atomfringe
