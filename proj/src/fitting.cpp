#include "atomfringe/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "atomfringe/errors.hpp"
#include "atomfringe/generator.hpp"
#include "atomfringe/random.hpp"

namespace atomfringe {

namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;

constexpr double inf = std::numeric_limits<double>::infinity();

double sample_weight(std::int64_t counts) {
    return 1.0 / static_cast<double>(std::max<std::int64_t>(counts, 1));
}

void require_fittable(const FringeDataset& ds) {
    if (ds.samples.size() < 6)
        throw ValidationError("fit needs at least 6 samples");
    if (!(ds.geometry.kappa > 0.0))
        throw ValidationError("fit needs a positive grating wave vector");
    auto [lo, hi] = std::minmax_element(
        ds.samples.begin(), ds.samples.end(),
        [](const FringeSample& a, const FringeSample& b) { return a.x < b.x; });
    const double period = 2.0 * std::numbers::pi / ds.geometry.kappa;
    if (hi->x - lo->x < period * (1.0 - 1e-9)) {
        std::ostringstream os;
        os << "samples span " << hi->x - lo->x << " m but one fringe period is "
           << period << " m; the fit is underdetermined";
        throw ValidationError(os.str());
    }
}

/// Folds an angle into the principal branch (-pi/2, pi/2] by multiples of
/// pi (the tan-based phase is only defined modulo pi).
double fold_principal(double phi) {
    const double pi = std::numbers::pi;
    while (phi > 0.5 * pi) phi -= pi;
    while (phi <= -0.5 * pi) phi += pi;
    return phi;
}

} // namespace

double FringeModel::eval(const InstrumentGeometry& g, double x, Port port) const {
    const double phase = theta0 + g.kappa * x;
    return n0 * (1.0 + port_sign(port) * (p * std::cos(phase) + q * std::sin(phase)));
}

double DissipativeEstimate::alpha_gev() const { return angular_frequency_to_gev(alpha); }
double DissipativeEstimate::omega_gev() const { return angular_frequency_to_gev(omega); }
double DissipativeEstimate::alpha_err_gev() const {
    return angular_frequency_to_gev(alpha_err);
}
double DissipativeEstimate::omega_err_gev() const {
    return angular_frequency_to_gev(omega_err);
}

double chi2(const FringeModel& model, const FringeDataset& dataset) {
    double sum = 0.0;
    for (const auto& sample : dataset.samples) {
        const double residual =
            static_cast<double>(sample.counts) - model.eval(dataset.geometry, sample.x, dataset.port);
        sum += residual * residual * sample_weight(sample.counts);
    }
    return sum;
}

FitResult fit_fringe(const FringeDataset& dataset, Theta0Mode theta0) {
    require_fittable(dataset);

    FitResult fit;
    fit.port = dataset.port;
    fit.theta0 = theta0.value_or(0.0);
    fit.theta0_fixed = theta0.has_value();
    fit.dof = static_cast<int>(dataset.samples.size()) - 3;

    const double sign = port_sign(dataset.port);
    const std::size_t n = dataset.samples.size();

    // model is linear in beta = (n0, n0*p, n0*q): N_i = X_i . beta
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd y(n), weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& sample = dataset.samples[i];
        const double phase = fit.theta0 + dataset.geometry.kappa * sample.x;
        design(i, 0) = 1.0;
        design(i, 1) = sign * std::cos(phase);
        design(i, 2) = sign * std::sin(phase);
        y(i) = static_cast<double>(sample.counts);
        weights(i) = sample_weight(sample.counts);
    }

    const Matrix3d normal = design.transpose() * weights.asDiagonal() * design;
    const Vector3d rhs = design.transpose() * (weights.asDiagonal() * y);

    Eigen::LDLT<Matrix3d> solver(normal);
    if (solver.info() != Eigen::Success || !normal.allFinite()) {
        fit.message = "normal equations are singular";
        return fit;
    }
    Vector3d beta = solver.solve(rhs);

    // one refinement pass; for a well-posed linear problem the step is
    // negligible and certifies the solve
    const Vector3d residual_grad = rhs - normal * beta;
    const Vector3d step = solver.solve(residual_grad);
    beta += step;

    const double beta_scale = std::max(beta.norm(), 1e-300);
    fit.gradient_norm = (rhs - normal * beta).norm() / std::max(1.0, (normal * beta).norm());
    fit.step_norm = step.norm() / beta_scale;

    if (!(beta(0) > 0.0)) {
        fit.message = "fitted normalization is not positive";
        return fit;
    }

    fit.n0 = beta(0);
    fit.p = beta(1) / beta(0);
    fit.q = beta(2) / beta(0);

    // covariance of beta is the inverse curvature; transform to (n0, p, q)
    const Matrix3d cov_beta = solver.solve(Matrix3d::Identity());
    Matrix3d jac = Matrix3d::Zero();
    jac(0, 0) = 1.0;
    jac(1, 0) = -beta(1) / (beta(0) * beta(0));
    jac(1, 1) = 1.0 / beta(0);
    jac(2, 0) = -beta(2) / (beta(0) * beta(0));
    jac(2, 2) = 1.0 / beta(0);
    fit.covariance = jac * cov_beta * jac.transpose();

    fit.chi2 = chi2(FringeModel{fit.n0, fit.p, fit.q, fit.theta0}, dataset);
    fit.converged = fit.gradient_norm < 1e-8 && fit.step_norm < 1e-10;
    if (!fit.converged) fit.message = "normal-equation refinement did not settle";
    return fit;
}

double visibility_contrast(const FringeDataset& dataset, VisibilityMethod method) {
    if (dataset.samples.empty()) throw ValidationError("dataset is empty");

    std::vector<double> counts;
    counts.reserve(dataset.samples.size());
    for (const auto& sample : dataset.samples)
        counts.push_back(static_cast<double>(sample.counts));
    std::sort(counts.begin(), counts.end());

    std::size_t band = 1;
    if (method == VisibilityMethod::Quantile)
        band = std::max<std::size_t>(1, counts.size() / 10);

    double low = 0.0, high = 0.0;
    for (std::size_t i = 0; i < band; ++i) {
        low += counts[i];
        high += counts[counts.size() - 1 - i];
    }
    low /= static_cast<double>(band);
    high /= static_cast<double>(band);

    const double denom = high + low;
    if (denom <= 0.0 || high == low) return 0.0;
    return (high - low) / denom;
}

DissipativeEstimate extract_dissipative(const FitResult& fit, double contrast, double t0,
                                        double contrast_err) {
    if (!fit.converged) throw ValidationError("fit did not converge");
    if (!(contrast > 0.0) || contrast > 1.0)
        throw ValidationError("contrast must lie in (0, 1]");
    if (!(t0 > 0.0)) throw ValidationError("flight time must be positive");

    DissipativeEstimate est;
    est.contrast_used = contrast;
    est.contrast_err = contrast_err;

    const double p = fit.p, q = fit.q;
    const double amp2 = p * p + q * q;

    if (amp2 == 0.0) {
        est.warnings.push_back("fringe amplitude is zero; alpha and omega unconstrained");
        est.alpha_err = inf;
        est.omega_err = inf;
        return est;
    }

    const double amp = std::sqrt(amp2);
    est.omega = fold_principal(std::atan2(q, p)) / (2.0 * t0);

    const double ratio = amp / contrast;
    if (ratio > 1.0) {
        est.alpha = 0.0;
        est.alpha_clamped = true;
        est.warnings.push_back(
            "fringe amplitude exceeds the contrast (damping factor > 1); "
            "alpha clamped to zero");
    } else {
        est.alpha = -std::log(ratio) / (2.0 * t0);
    }

    // first-order propagation through omega(p,q) and alpha(p,q,C)
    const Eigen::Matrix2d cov_pq = fit.covariance.bottomRightCorner<2, 2>();
    const Eigen::Vector2d grad_omega(-q / amp2, p / amp2);
    const Eigen::Vector2d grad_log_amp(p / amp2, q / amp2);
    est.omega_err = std::sqrt(grad_omega.dot(cov_pq * grad_omega)) / (2.0 * t0);
    const double var_log_amp = grad_log_amp.dot(cov_pq * grad_log_amp);
    const double var_log_contrast =
        (contrast_err / contrast) * (contrast_err / contrast);
    est.alpha_err = std::sqrt(var_log_amp + var_log_contrast) / (2.0 * t0);

    const Eigen::Vector2d grad_amp(p / amp, q / amp);
    const double amp_err = std::sqrt(grad_amp.dot(cov_pq * grad_amp));
    if (amp <= 2.0 * amp_err)
        est.warnings.push_back(
            "fringe amplitude is consistent with zero; alpha and omega are "
            "effectively unconstrained");
    return est;
}

FringeDataset synth_dataset(const FringeParams& fp, const InstrumentGeometry& g,
                            const std::vector<double>& xs, std::uint64_t seed,
                            Port port) {
    std::mt19937_64 rng(seed);
    FringeDataset ds;
    ds.port = port;
    ds.geometry = g;
    ds.samples.reserve(xs.size());
    for (double x : xs) {
        const double mean = fringe_counts(fp, g, x, port);
        if (mean < 0.0) {
            std::ostringstream os;
            os << "expected counts are negative (" << mean << ") at x = " << x;
            throw ValidationError(os.str());
        }
        ds.samples.push_back({x, poisson_sample(rng, mean)});
    }
    return ds;
}

DissipativeEstimate two_time_separation(const FitResult& fit_a, double t0_a,
                                        const FitResult& fit_b, double t0_b) {
    if (!fit_a.converged || !fit_b.converged)
        throw ValidationError("both fits must have converged");
    if (t0_a == t0_b)
        throw ValidationError("the two flight times must differ");

    struct PortReading {
        double amp2 = 0.0, log_amp = 0.0, phi = 0.0;
        double var_log_amp = 0.0, var_phi = 0.0;
    };
    auto read = [](const FitResult& fit) {
        PortReading r;
        r.amp2 = fit.p * fit.p + fit.q * fit.q;
        if (r.amp2 == 0.0) throw ValidationError("fit has zero fringe amplitude");
        r.log_amp = 0.5 * std::log(r.amp2);
        r.phi = std::atan2(fit.q, fit.p);
        const Eigen::Matrix2d cov = fit.covariance.bottomRightCorner<2, 2>();
        const Eigen::Vector2d ga(fit.p / r.amp2, fit.q / r.amp2);
        const Eigen::Vector2d gp(-fit.q / r.amp2, fit.p / r.amp2);
        r.var_log_amp = ga.dot(cov * ga);
        r.var_phi = gp.dot(cov * gp);
        return r;
    };

    const PortReading a = read(fit_a);
    const PortReading b = read(fit_b);
    const double dt = t0_b - t0_a;

    DissipativeEstimate est;
    est.alpha = (a.log_amp - b.log_amp) / (2.0 * dt);
    est.omega = fold_principal(b.phi - a.phi) / (2.0 * dt);
    est.alpha_err = std::sqrt(a.var_log_amp + b.var_log_amp) / (2.0 * std::abs(dt));
    est.omega_err = std::sqrt(a.var_phi + b.var_phi) / (2.0 * std::abs(dt));

    // contrast implied by extrapolating the damping back to t = 0
    const double log_contrast = (t0_b * a.log_amp - t0_a * b.log_amp) / dt;
    est.contrast_used = std::exp(log_contrast);
    const double var_log_contrast = (t0_b * t0_b * a.var_log_amp +
                                     t0_a * t0_a * b.var_log_amp) / (dt * dt);
    est.contrast_err = est.contrast_used * std::sqrt(var_log_contrast);

    if (est.alpha < 0.0)
        est.warnings.push_back("amplitude grows with flight time: implied alpha is negative");
    if (est.contrast_used > 1.0)
        est.warnings.push_back("implied contrast exceeds 1");
    return est;
}

} // namespace atomfringe
