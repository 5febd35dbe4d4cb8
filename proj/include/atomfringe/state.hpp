#pragma once

#include <array>
#include <complex>

namespace atomfringe {

/// Tolerance for positivity / trace checks on states. Dissipative evolution
/// can graze the pure-state boundary, so exact-zero slack would reject
/// legitimate states by round-off.
inline constexpr double state_tolerance = 1e-12;

/// Which of the two exit beams of the interferometer is observed.
enum class Port { Plus, Minus };

/// Orientation of the incident beam relative to the first grating.
enum class Orientation { One, Two };

/// Real 3-vector representation of the two-beam density matrix.
///
/// Components are (r1, r2, r3) with r1 = Re rho3, r2 = -Im rho3,
/// r3 = (rho1 - rho2)/2. Pure states have norm 1/2; positivity of the
/// underlying density matrix is |r| <= 1/2. This is the canonical
/// representation the dynamics acts on.
struct BlochState {
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;

    double norm_squared() const { return r1 * r1 + r2 * r2 + r3 * r3; }
    double norm() const;

    bool operator==(const BlochState&) const = default;
};

/// Two-beam density matrix: populations rho1, rho2 and coherence rho3
/// (the fourth entry is rho3* by hermiticity).
///
/// Validates trace and positivity on construction and immediately
/// canonicalizes to the Bloch 3-vector, which carries all the physical
/// content once the unit trace is enforced. The population accessors are
/// views reconstructed from the 3-vector, so converting to a BlochState
/// and back is exact.
class DensityMatrix {
public:
    /// Validating constructor; throws ValidationError if the trace deviates
    /// from 1, a population is negative, or rho1*rho2 < |rho3|^2, each
    /// beyond state_tolerance.
    DensityMatrix(double rho1, double rho2, std::complex<double> rho3);

    double rho1() const { return 0.5 + bloch_.r3; }
    double rho2() const { return 0.5 - bloch_.r3; }
    std::complex<double> rho3() const { return {bloch_.r1, -bloch_.r2}; }

    const BlochState& bloch() const { return bloch_; }

    bool operator==(const DensityMatrix& other) const = default;

private:
    friend DensityMatrix from_bloch(const BlochState&);
    explicit DensityMatrix(const BlochState& b) : bloch_(b) {}

    BlochState bloch_;
};

/// Exit-port projector, parametrized by the grating phase theta.
/// The Minus port is the Plus port with theta shifted by pi.
struct ExitProjector {
    double theta = 0.0;
    Port port = Port::Plus;

    /// 2x2 matrix form, row-major: {{m00, m01}, {m10, m11}}.
    std::array<std::array<std::complex<double>, 2>, 2> matrix() const;
};

/// Bloch 3-vector of a density matrix.
BlochState to_bloch(const DensityMatrix& dm);

/// Density matrix encoded by a Bloch 3-vector. Throws ValidationError when
/// |b| exceeds 1/2 beyond state_tolerance. Exact inverse of to_bloch.
DensityMatrix from_bloch(const BlochState& b);

/// Incident-beam state for the given orientation: (1/2, 0, 0) for One,
/// (-1/2, 0, 0) for Two. Both are pure.
BlochState initial_state(Orientation orientation);

/// Mean value of the exit projector in the given state:
/// 1/2 +- [cos(theta) r1 + sin(theta) r2]. The two ports sum to 1 exactly.
double intensity(const BlochState& state, const ExitProjector& proj);

/// +1 for the Plus port, -1 for Minus.
inline double port_sign(Port port) { return port == Port::Plus ? 1.0 : -1.0; }

} // namespace atomfringe
