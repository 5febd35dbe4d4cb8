#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atomfringe/constants.hpp"

namespace atomfringe {

/// The seven generator parameters plus the overall beam energy.
///
/// All rates and frequencies are angular frequencies in s^-1; omega is half
/// the energy splitting between the beams. `energy` is carried for
/// completeness only: it cancels out of the 3-vector dynamics and no
/// computation in this library reads it.
struct LindbladParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double omega = 0.0;
    double energy = 0.0;
};

/// One evaluated complete-positivity constraint: margin >= -tol passes.
struct ConstraintMargin {
    std::string name;
    double margin = 0.0;
    bool satisfied = false;
};

/// Result of the complete-positivity check.
///
/// R, S, T are the half-sum combinations R = (alpha+gamma-a)/2,
/// S = (a+gamma-alpha)/2, T = (a+alpha-gamma)/2. `margins` holds every
/// constraint with its raw margin so callers can apply their own
/// interpretation of "compatible with zero".
struct CPCertificate {
    double R = 0.0;
    double S = 0.0;
    double T = 0.0;
    bool satisfied = false;
    std::vector<std::string> violated_constraints;
    std::vector<ConstraintMargin> margins;
};

/// The 3x3 real matrix generating the Bloch-vector dynamics
/// d|rho>/dt = -2 H |rho>.
struct Generator {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
};

/// Dissipator matrix: -2 * [[a,b,c],[b,alpha,beta],[c,beta,gamma]] in s^-1.
Eigen::Matrix3d build_dissipator(const LindbladParams& p);

/// Full generator [[a,b+omega,c],[b-omega,alpha,beta],[c,beta,gamma]].
/// The beam energy does not appear.
Generator build_generator(const LindbladParams& p);

/// Evaluates the complete-positivity constraints: a, alpha, gamma >= 0;
/// R, S, T >= 0; RS >= b^2, RT >= c^2, ST >= beta^2; and
/// RST >= 2bc*beta + R*beta^2 + S*c^2 + T*b^2. A constraint passes when its
/// margin is >= -tol. A failing certificate is a normal return value.
CPCertificate check_complete_positivity(const LindbladParams& p, double tol = 0.0);

/// Rough upper bound on the dissipative parameters induced at the Planck
/// scale: atom_mass^2 / planck_mass, all in GeV. Throws ValidationError on
/// non-positive masses.
double dissipative_scale(double atom_mass_gev, double planck_mass_gev);

/// Energy-to-angular-frequency bridge: multiplies by 1/hbar. This is the
/// single point where GeV inputs enter the s^-1 dynamics.
double gev_to_angular_frequency(double x_gev);

/// Inverse bridge, for reports.
double angular_frequency_to_gev(double x_per_s);

/// Draws a parameter set satisfying the complete-positivity constraints.
///
/// Samples (R, S, T) uniformly in [0, scale] first (which fixes a, alpha,
/// gamma), then (b, c, beta) by rejection inside their feasible box, and
/// omega uniformly in [-omega_scale, omega_scale]. Deterministic for a
/// given engine state.
LindbladParams sample_cp_params(std::mt19937_64& rng, double scale, double omega_scale);

} // namespace atomfringe
