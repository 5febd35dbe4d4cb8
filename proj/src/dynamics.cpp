#include "atomfringe/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "atomfringe/errors.hpp"

namespace atomfringe {

namespace {

using Complex = std::complex<double>;
using Eigen::Matrix3cd;
using Eigen::Matrix3d;
using Eigen::Vector3d;

double root_scale(const Spectrum& sp) {
    double scale = 1.0;
    for (const auto& l : sp.lambda) scale = std::max(scale, std::abs(l));
    return scale;
}

// Computed roots of a triple root scatter by ~eps^(1/3), far above the
// pair threshold, so a mutual cluster at that scale is unresolvable and
// must be treated as degenerate as well.
constexpr double triple_cluster_threshold = 3e-5;

bool is_degenerate(const Spectrum& sp) {
    const double scale = root_scale(sp);
    double min_sep = std::numeric_limits<double>::infinity();
    double max_sep = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double sep = std::abs(sp.lambda[i] - sp.lambda[j]);
            min_sep = std::min(min_sep, sep);
            max_sep = std::max(max_sep, sep);
        }
    return min_sep < degeneracy_threshold * scale ||
           max_sep < triple_cluster_threshold * scale;
}

Complex eval_cubic(const CubicCoefficients& k, Complex x) {
    return ((x + k.r) * x + k.s) * x + k.w;
}

Complex eval_cubic_deriv(const CubicCoefficients& k, Complex x) {
    return (3.0 * x + 2.0 * k.r) * x + k.s;
}

// One Newton step per root, skipped near critical points where the step
// would be unstable (degenerate roots are flagged anyway).
Complex polish(const CubicCoefficients& k, Complex x) {
    const Complex d = eval_cubic_deriv(k, x);
    const double scale = std::max(1.0, std::abs(x));
    if (std::abs(d) < 1e-8 * scale * scale) return x;
    return x - eval_cubic(k, x) / d;
}

} // namespace

CubicCoefficients cubic_coefficients(const LindbladParams& p) {
    CubicCoefficients k;
    k.r = -(p.a + p.alpha + p.gamma);
    k.s = p.a * p.alpha + p.a * p.gamma + p.alpha * p.gamma
          - p.b * p.b - p.c * p.c - p.beta * p.beta + p.omega * p.omega;
    // -det H by cofactor expansion along the first row
    const double det = p.a * (p.alpha * p.gamma - p.beta * p.beta)
                     - (p.b + p.omega) * ((p.b - p.omega) * p.gamma - p.beta * p.c)
                     + p.c * ((p.b - p.omega) * p.beta - p.alpha * p.c);
    k.w = -det;
    return k;
}

Spectrum solve_cubic(const CubicCoefficients& coeffs) {
    const double r = coeffs.r, s = coeffs.s, w = coeffs.w;

    const double q = (r * r - 3.0 * s) / 9.0;
    const double u = (2.0 * r * r * r - 9.0 * r * s + 27.0 * w) / 54.0;

    Spectrum sp;
    if (u * u < q * q * q) {
        // three real roots: trigonometric form on the depressed cubic
        const double theta = std::acos(std::clamp(u / std::sqrt(q * q * q), -1.0, 1.0));
        const double m = -2.0 * std::sqrt(q);
        const double third = r / 3.0;
        const double twopi = 2.0 * std::numbers::pi;
        sp.lambda = {Complex(m * std::cos(theta / 3.0) - third, 0.0),
                     Complex(m * std::cos((theta + twopi) / 3.0) - third, 0.0),
                     Complex(m * std::cos((theta - twopi) / 3.0) - third, 0.0)};
        for (auto& l : sp.lambda) l = Complex(polish(coeffs, l.real()).real(), 0.0);
    } else {
        // one real root; the sign-stable cube-root form avoids cancellation
        const double big = -std::copysign(std::cbrt(std::abs(u) + std::sqrt(u * u - q * q * q)), u);
        const double small = big != 0.0 ? q / big : 0.0;
        const double real_root = polish(coeffs, big + small - r / 3.0).real();
        const double re_pair = -0.5 * (big + small) - r / 3.0;
        const double im_pair = 0.5 * std::sqrt(3.0) * (big - small);
        Complex upper = polish(coeffs, Complex(re_pair, im_pair));
        sp.lambda = {Complex(real_root, 0.0), upper, std::conj(upper)};
    }

    sp.degenerate = is_degenerate(sp);
    return sp;
}

Propagator propagator_eigen(const LindbladParams& p, double t) {
    const CubicCoefficients k = cubic_coefficients(p);
    const Spectrum sp = solve_cubic(k);
    if (sp.degenerate)
        throw DegenerateSpectrumError(
            "generator spectrum is (near-)degenerate; use propagator_series");

    const Matrix3cd h = build_generator(p).h.cast<Complex>();
    const Matrix3cd id = Matrix3cd::Identity();

    Matrix3cd sum = Matrix3cd::Zero();
    for (int kk = 0; kk < 3; ++kk) {
        const Complex lk = sp.lambda[kk];
        const Complex lj = sp.lambda[(kk + 1) % 3];
        const Complex ll = sp.lambda[(kk + 2) % 3];
        const Matrix3cd projector =
            (h - lj * id) * (h - ll * id) / ((lk - lj) * (lk - ll));
        sum += std::exp(-2.0 * lk * t) * projector;
    }

    const double real_scale = std::max(1.0, sum.real().cwiseAbs().maxCoeff());
    const double imag_residue = sum.imag().cwiseAbs().maxCoeff();
    if (imag_residue > 1e-8 * real_scale) {
        std::ostringstream os;
        os << "spectral propagator produced imaginary residue " << imag_residue;
        throw ConsistencyError(os.str());
    }

    return Propagator{sum.real(), t};
}

Propagator propagator_series(const LindbladParams& p, double t) {
    const Matrix3d arg = -2.0 * t * build_generator(p).h;

    // scale so the infinity norm is at most 1/2, Taylor, then square back
    const double norm = arg.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));

    const Matrix3d scaled = arg / std::exp2(squarings);
    Matrix3d result = Matrix3d::Identity();
    Matrix3d term = Matrix3d::Identity();
    for (int n = 1; n <= 24; ++n) {
        term = (term * scaled / static_cast<double>(n)).eval();
        result += term;
    }
    for (int i = 0; i < squarings; ++i) result = (result * result).eval();

    return Propagator{result, t};
}

BlochState evolve(const BlochState& state0, const LindbladParams& p, double t) {
    if (t < 0.0) {
        std::ostringstream os;
        os << "evolution time must be non-negative (semigroup runs forward), got " << t;
        throw ValidationError(os.str());
    }
    if (t == 0.0) return state0;

    Propagator prop;
    try {
        prop = propagator_eigen(p, t);
    } catch (const DegenerateSpectrumError&) {
        prop = propagator_series(p, t);
    }

    const Vector3d out = prop.m * Vector3d(state0.r1, state0.r2, state0.r3);
    return BlochState{out[0], out[1], out[2]};
}

double intensity_evolve(const LindbladParams& p, double theta, double t, Port port,
                        Orientation orientation) {
    const BlochState evolved = evolve(initial_state(orientation), p, t);
    return intensity(evolved, ExitProjector{theta, port});
}

double intensity_general(const LindbladParams& p, double theta, double t, Port port) {
    if (t < 0.0) throw ValidationError("time must be non-negative");

    const CubicCoefficients k = cubic_coefficients(p);
    const Spectrum sp = solve_cubic(k);
    if (sp.degenerate) return intensity_evolve(p, theta, t, port);

    Complex bracket = 0.0;
    for (const auto& lk : sp.lambda) {
        const Complex denom = (3.0 * lk + 2.0 * k.r) * lk + k.s;
        const Complex cos_num =
            (lk - (p.alpha + p.gamma)) * lk + (p.alpha * p.gamma - p.beta * p.beta);
        const Complex sin_num = (p.b - p.omega) * (lk - p.gamma) + p.beta * p.c;
        bracket += std::exp(-2.0 * lk * t) / denom
                   * (cos_num * std::cos(theta) + sin_num * std::sin(theta));
    }

    if (std::abs(bracket.imag()) > 1e-10 * std::max(1.0, std::abs(bracket.real()))) {
        std::ostringstream os;
        os << "intensity sum produced imaginary residue " << bracket.imag();
        throw ConsistencyError(os.str());
    }

    return 0.5 * (1.0 + port_sign(port) * bracket.real());
}

double intensity_simple(double alpha, double omega, double theta, double t, Port port) {
    const double bracket = std::exp(-2.0 * alpha * t) * std::cos(theta - 2.0 * omega * t);
    return 0.5 * (1.0 + port_sign(port) * bracket);
}

double intensity_perturbative(const LindbladParams& p, double theta, double t, Port port) {
    const double w2 = p.omega * p.omega - p.b * p.b - p.c * p.c - p.beta * p.beta
                      - 0.25 * (p.alpha - p.a) * (p.alpha - p.a);
    if (!(w2 > 0.0)) {
        std::ostringstream os;
        os << "perturbative expansion invalid: omega^2 - b^2 - c^2 - beta^2 "
              "- (alpha-a)^2/4 = " << w2 << " must be positive";
        throw ValidationError(os.str());
    }
    const double w = std::sqrt(w2);
    const double sin_wt = std::sin(w * t);
    const double sin_2wt = std::sin(2.0 * w * t);
    const double cos_2wt = std::cos(2.0 * w * t);

    const double cos_coef = cos_2wt + 0.5 * (p.alpha - p.a) / w * sin_2wt
                            - 2.0 * p.beta * p.beta / w2 * sin_wt * sin_wt;
    const double sin_coef = (p.omega - p.b) / w * sin_2wt
                            + 2.0 * p.c * p.beta / w2 * sin_wt * sin_wt;
    const double bracket = std::exp(-(p.a + p.alpha) * t)
                           * (cos_coef * std::cos(theta) + sin_coef * std::sin(theta));
    return 0.5 * (1.0 + port_sign(port) * bracket);
}

} // namespace atomfringe
