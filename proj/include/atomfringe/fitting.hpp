#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atomfringe/fringe.hpp"
#include "atomfringe/state.hpp"

namespace atomfringe {

/// One recorded scan point: third-grating displacement and atom count.
struct FringeSample {
    double x = 0.0; // m
    std::int64_t counts = 0;
};

/// A single-port fringe scan. A fit needs at least 6 samples spanning at
/// least one fringe period 2*pi/kappa.
struct FringeDataset {
    std::vector<FringeSample> samples;
    Port port = Port::Minus;
    InstrumentGeometry geometry;
};

/// Fringe-model candidate for chi^2 evaluation:
/// N(x) = n0 { 1 +- [p cos(theta0 + kappa x) + q sin(theta0 + kappa x)] }.
struct FringeModel {
    double n0 = 0.0;
    double p = 0.0;
    double q = 0.0;
    double theta0 = 0.0;

    double eval(const InstrumentGeometry& g, double x, Port port) const;
};

/// Result of a fringe fit. The covariance is 3x3 over (n0, p, q); theta0
/// is never a free nonlinear parameter — in Free mode the (p, q, theta0)
/// degeneracy is pinned by convention at theta0 = 0, with the phase
/// absorbed into (p, q).
struct FitResult {
    double n0 = 0.0;
    double p = 0.0;
    double q = 0.0;
    double theta0 = 0.0;
    bool theta0_fixed = true; // false when pinned by the Free-mode convention
    double chi2 = 0.0;
    int dof = 0;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    bool converged = false;
    double gradient_norm = 0.0; // relative, at the reported minimum
    double step_norm = 0.0;     // relative, of the final refinement step
    Port port = Port::Minus;
    std::string message;
};

/// theta0 handling for fit_fringe: a calibrated value, or nullopt to fit
/// with the theta0 = 0 convention.
using Theta0Mode = std::optional<double>;

/// Dissipative-parameter estimate with first-order statistical errors.
/// GeV views are derived through the hbar bridge.
struct DissipativeEstimate {
    double alpha = 0.0;     // s^-1
    double omega = 0.0;     // s^-1
    double alpha_err = 0.0; // s^-1
    double omega_err = 0.0; // s^-1
    double contrast_used = 0.0;
    double contrast_err = 0.0;
    bool alpha_clamped = false; // amplitude exceeded the contrast
    std::vector<std::string> warnings;

    double alpha_gev() const;
    double omega_gev() const;
    double alpha_err_gev() const;
    double omega_err_gev() const;
};

/// Pearson chi^2 of the model against the dataset with Poisson weights
/// sigma_i^2 = max(counts_i, 1).
double chi2(const FringeModel& model, const FringeDataset& dataset);

/// Weighted least-squares fit of the fringe model.
///
/// With theta0 supplied the model is linear in (n0, n0*p, n0*q) and is
/// solved by the weighted normal equations; the result is transformed back
/// to (n0, p, q) with the covariance propagated through the Jacobian.
/// Without theta0 the same fit runs at theta0 = 0 (see FitResult).
/// Throws ValidationError on an underdetermined dataset; a non-converged
/// solve is reported through the `converged` flag, not an exception.
FitResult fit_fringe(const FringeDataset& dataset, Theta0Mode theta0 = std::nullopt);

/// How visibility_contrast picks its extrema.
enum class VisibilityMethod {
    Quantile, // mean of the top/bottom 10% of counts (damps Poisson outliers)
    Extrema,  // single max/min points
};

/// Visibility estimate (N_max - N_min) / (N_max + N_min). Only
/// approximately valid when alpha or omega are nonvanishing, since damping
/// suppresses the extrema; callers needing an unbiased contrast should use
/// two_time_separation instead.
double visibility_contrast(const FringeDataset& dataset,
                           VisibilityMethod method = VisibilityMethod::Quantile);

/// Dissipative parameters from a converged fit and an external contrast
/// estimate:
///   2 omega t0 = angle of (p, q), folded into the principal branch
///                (-pi/2, pi/2] (the fold-by-pi ambiguity is inherent);
///   exp(-2 alpha t0) = sqrt(p^2 + q^2) / contrast.
/// If the amplitude exceeds the contrast the implied alpha would be
/// negative; it is clamped to zero and flagged. Errors are propagated to
/// first order from the fit covariance and contrast_err.
DissipativeEstimate extract_dissipative(const FitResult& fit, double contrast, double t0,
                                        double contrast_err = 0.0);

/// Synthetic dataset: independent Poisson counts with mean
/// fringe_counts(x) at each of xs. Deterministic for a given seed. Throws
/// ValidationError if any expectation is negative.
FringeDataset synth_dataset(const FringeParams& fp, const InstrumentGeometry& g,
                            const std::vector<double>& xs, std::uint64_t seed,
                            Port port = Port::Minus);

/// Joint (alpha, omega, contrast) estimate from two fits at different
/// flight times, eliminating the external contrast input: the amplitude
/// ratio gives alpha, the phase difference gives omega, and either
/// amplitude then gives the contrast. Inconsistent inputs (implied
/// contrast outside (0, 1], or a negative implied alpha) are flagged, not
/// thrown.
DissipativeEstimate two_time_separation(const FitResult& fit_a, double t0_a,
                                        const FitResult& fit_b, double t0_b);

} // namespace atomfringe
