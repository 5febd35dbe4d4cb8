#pragma once

namespace atomfringe {

/// Physical constants used at the unit boundaries of the library.
/// All internal dynamics runs in angular frequency (s^-1); energies in GeV
/// appear only in inputs/reports and cross this table exactly once.
namespace constants {

/// Reduced Planck constant in GeV*s (CODATA).
inline constexpr double hbar_gev_s = 6.582119569e-25;

/// Planck mass in GeV (CODATA), default for scale-bound estimates.
inline constexpr double planck_mass_gev = 1.22089e19;

} // namespace constants

} // namespace atomfringe
