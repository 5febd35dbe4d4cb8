#pragma once

#include <utility>

#include "atomfringe/state.hpp"

namespace atomfringe {

/// Geometry and calibration of a three-grating interferometer.
///
/// kappa is the grating wave vector, x1..x3 the transverse grating
/// positions, t0 the reference flight time, bragg_angle the first-order
/// Bragg diffraction angle, velocity the mean beam velocity and theta0 the
/// fixed instrument phase. The scan variable is the third-grating
/// displacement x, entering the phase as theta0 + kappa*x.
struct InstrumentGeometry {
    double kappa = 0.0;       // m^-1
    double x1 = 0.0;          // m
    double x2 = 0.0;          // m
    double x3 = 0.0;          // m
    double t0 = 0.0;          // s
    double bragg_angle = 0.0; // rad
    double velocity = 0.0;    // m/s
    double theta0 = 0.0;      // rad
};

/// Flight time at scan position x, with the relative size of the
/// x-dependent correction so callers can check the t ~= t0 approximation.
struct FlightTime {
    double t = 0.0;          // s
    double correction = 0.0; // s, the bragg_angle*x/velocity term
    double ratio = 0.0;      // correction / t0
};

/// Observable fringe parametrization per port: counts normalization N0,
/// contrast C, and the in-phase/quadrature amplitudes P, Q of the
/// oscillatory term.
///
/// Particle conservation requires n0_plus*contrast_plus ==
/// n0_minus*contrast_minus; `validated` factories enforce it.
struct FringeParams {
    double n0_plus = 0.0;
    double n0_minus = 0.0;
    double contrast_plus = 0.0;
    double contrast_minus = 0.0;
    double p_plus = 0.0;
    double p_minus = 0.0;
    double q_plus = 0.0;
    double q_minus = 0.0;

    /// Builds the parametrization from the physical quantities, both ports
    /// sharing (alpha, omega, t0). Throws ValidationError if the
    /// conservation constraint fails beyond `conservation_tol` or any
    /// contrast is outside [0, 1].
    static FringeParams from_physics(double n0_plus, double n0_minus,
                                     double contrast_plus, double contrast_minus,
                                     double alpha, double omega, double t0,
                                     double conservation_tol = 1e-9);

    double n0(Port port) const { return port == Port::Plus ? n0_plus : n0_minus; }
    double contrast(Port port) const {
        return port == Port::Plus ? contrast_plus : contrast_minus;
    }
    double p(Port port) const { return port == Port::Plus ? p_plus : p_minus; }
    double q(Port port) const { return port == Port::Plus ? q_plus : q_minus; }
};

/// Idealized three-grating phase kappa * (x1 - 2 x2 + x3).
double grating_phase(const InstrumentGeometry& g);

/// t0 + bragg_angle * x / velocity, with diagnostics.
FlightTime flight_time(const InstrumentGeometry& g, double x);

/// In-phase / quadrature amplitudes of a damped fringe:
/// P = C exp(-2 alpha t0) cos(2 omega t0), Q = C exp(-2 alpha t0)
/// sin(2 omega t0).
std::pair<double, double> pq_from_physics(double contrast, double alpha, double omega,
                                          double t0);

/// Expected counts at scan position x:
/// N0 { 1 +- [P cos(theta0 + kappa x) + Q sin(theta0 + kappa x)] }.
double fringe_counts(const FringeParams& fp, const InstrumentGeometry& g, double x,
                     Port port);

/// Expected counts with the exact x-dependent flight time instead of the
/// t ~= t0 approximation, for sensitivity studies.
double fringe_counts_exact_t(double n0, double contrast, double alpha, double omega,
                             const InstrumentGeometry& g, double x, Port port);

/// Whether |n0+ C+ - n0- C-| <= tol * (n0+ C+ + n0- C-)/2.
bool conservation_check(const FringeParams& fp, double tol);

} // namespace atomfringe
