#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "atomfringe/generator.hpp"
#include "atomfringe/state.hpp"

namespace atomfringe {

/// Coefficients of the characteristic cubic lambda^3 + r lambda^2
/// + s lambda + w = 0 of the generator matrix.
struct CubicCoefficients {
    double r = 0.0; // -(a + alpha + gamma)
    double s = 0.0; // sum of principal 2x2 minors
    double w = 0.0; // -det H
};

/// Eigenvalues of the generator. Real coefficients guarantee either three
/// real roots or one real root plus a conjugate pair; the constructor paths
/// preserve that structure exactly. `degenerate` is set when the minimum
/// pairwise root separation falls below degeneracy_threshold relative to
/// the root scale, or when all three roots cluster within the resolution
/// limit of a triple root; in either case the spectral propagator is
/// unusable.
struct Spectrum {
    std::array<std::complex<double>, 3> lambda{};
    bool degenerate = false;
};

/// Relative pairwise-separation threshold below which a spectrum is
/// flagged degenerate.
inline constexpr double degeneracy_threshold = 1e-7;

/// The evolution map M(t) = exp(-2 H t) acting on Bloch 3-vectors.
struct Propagator {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    double t = 0.0;
};

/// Characteristic-cubic coefficients from the parameters directly:
/// r = -(a+alpha+gamma), s = a*alpha + a*gamma + alpha*gamma
/// - b^2 - c^2 - beta^2 + omega^2, w = -det H (cofactor expansion).
CubicCoefficients cubic_coefficients(const LindbladParams& p);

/// Roots of lambda^3 + r lambda^2 + s lambda + w = 0.
///
/// Uses the trigonometric method when all three roots are real and the
/// numerically stable one-real-root form otherwise (both on the depressed
/// cubic), followed by one Newton polish. Never fails; inspect
/// `degenerate` before spectral use.
Spectrum solve_cubic(const CubicCoefficients& coeffs);

/// Spectral (Lagrange interpolation) form of exp(-2 H t). Requires a
/// non-degenerate spectrum; throws DegenerateSpectrumError otherwise, in
/// which case callers should use propagator_series. The result is real up
/// to round-off; the imaginary residue is checked and truncated.
Propagator propagator_eigen(const LindbladParams& p, double t);

/// Scaling-and-squaring truncated-series form of exp(-2 H t). Handles
/// arbitrary (including degenerate) spectra.
Propagator propagator_series(const LindbladParams& p, double t);

/// Forward evolution of a Bloch state by time t >= 0 (negative t is
/// rejected: the semigroup composes forward only). Uses the spectral
/// propagator, falling back to the series form on degeneracy.
BlochState evolve(const BlochState& state0, const LindbladParams& p, double t);

/// Exit-beam intensity at time t by explicit evolution from the initial
/// state of the given orientation. Works for every parameter set.
double intensity_evolve(const LindbladParams& p, double theta, double t, Port port,
                        Orientation orientation = Orientation::One);

/// Exit-beam intensity from the eigenvalue sum
///
///   1/2 { 1 +- sum_k exp(-2 lambda_k t) / (3 lambda_k^2 + 2 r lambda_k + s)
///         * [ (lambda_k^2 - (alpha+gamma) lambda_k + alpha*gamma - beta^2) cos(theta)
///           + ((b-omega)(lambda_k - gamma) + beta*c) sin(theta) ] }
///
/// for the orientation-One initial state. The two bracket polynomials are
/// the (1,1) and (2,1) entries of the Lagrange numerator q_k(H), obtained
/// by dividing the characteristic cubic by (lambda - lambda_k). On a
/// degenerate spectrum the sum is ill-posed and the result is computed via
/// the series propagator instead.
double intensity_general(const LindbladParams& p, double theta, double t, Port port);

/// Closed-form intensity in the weak-coupling regime (gamma = 0, which
/// forces b = c = beta = 0 and a = alpha):
/// 1/2 { 1 +- exp(-2 alpha t) cos(theta - 2 omega t) }.
double intensity_simple(double alpha, double omega, double theta, double t, Port port);

/// Second-order (in the dissipative parameters) intensity, exact whenever
/// c = beta = 0:
///
///   1/2 { 1 +- exp(-(a+alpha) t)
///         * [ (cos 2Wt + (alpha-a)/(2W) sin 2Wt - 2 beta^2/W^2 sin^2 Wt) cos(theta)
///           + ((omega-b)/W sin 2Wt + 2 c*beta/W^2 sin^2 Wt) sin(theta) ] }
///
/// with W^2 = omega^2 - b^2 - c^2 - beta^2 - (alpha-a)^2/4. Requires
/// W^2 > 0 (parameters small against omega); throws ValidationError
/// otherwise.
double intensity_perturbative(const LindbladParams& p, double theta, double t, Port port);

} // namespace atomfringe
