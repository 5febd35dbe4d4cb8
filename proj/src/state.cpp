#include "atomfringe/state.hpp"

#include <cmath>
#include <sstream>

#include "atomfringe/errors.hpp"

namespace atomfringe {

double BlochState::norm() const { return std::sqrt(norm_squared()); }

namespace {

[[noreturn]] void reject(const char* what, double value) {
    std::ostringstream os;
    os << "invalid density matrix: " << what << " (got " << value << ")";
    throw ValidationError(os.str());
}

} // namespace

DensityMatrix::DensityMatrix(double rho1, double rho2, std::complex<double> rho3) {
    const double trace = rho1 + rho2;
    if (std::abs(trace - 1.0) > state_tolerance) reject("trace must be 1", trace);
    if (rho1 < -state_tolerance) reject("rho1 must be non-negative", rho1);
    if (rho2 < -state_tolerance) reject("rho2 must be non-negative", rho2);
    const double coh2 = std::norm(rho3);
    if (rho1 * rho2 - coh2 < -state_tolerance)
        reject("rho1*rho2 must dominate |rho3|^2; deficit", rho1 * rho2 - coh2);
    bloch_ = BlochState{rho3.real(), -rho3.imag(), 0.5 * (rho1 - rho2)};
}

std::array<std::array<std::complex<double>, 2>, 2> ExitProjector::matrix() const {
    const double phase = port == Port::Plus ? theta : theta + std::acos(-1.0);
    const std::complex<double> off{std::cos(phase), std::sin(phase)};
    return {{{0.5, 0.5 * std::conj(off)}, {0.5 * off, 0.5}}};
}

BlochState to_bloch(const DensityMatrix& dm) { return dm.bloch(); }

DensityMatrix from_bloch(const BlochState& b) {
    if (b.norm_squared() > 0.25 + state_tolerance) {
        std::ostringstream os;
        os << "Bloch vector outside the physical ball: |r| = " << b.norm();
        throw ValidationError(os.str());
    }
    return DensityMatrix(b);
}

BlochState initial_state(Orientation orientation) {
    return orientation == Orientation::One ? BlochState{0.5, 0.0, 0.0}
                                           : BlochState{-0.5, 0.0, 0.0};
}

double intensity(const BlochState& state, const ExitProjector& proj) {
    const double fringe = std::cos(proj.theta) * state.r1 + std::sin(proj.theta) * state.r2;
    return 0.5 + port_sign(proj.port) * fringe;
}

} // namespace atomfringe
