#pragma once

#include <filesystem>
#include <string>

#include "atomfringe/fitting.hpp"
#include "atomfringe/fringe.hpp"
#include "atomfringe/generator.hpp"

namespace atomfringe {

/// File parsing failed; carries the offending line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::filesystem::path& file, int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_ = 0;
};

/// Reads a generator-parameter file.
///
/// Format: `key = value` lines, `#` comments. Keys: a, b, c, alpha, beta,
/// gamma, omega (and optionally energy), all defaulting to 0, plus a
/// required `units` key that is either `per_second` or `GeV`. GeV values
/// are converted through the hbar bridge on load, so the returned struct
/// is always in s^-1.
LindbladParams read_params_file(const std::filesystem::path& file);

/// Writes a parameter file in s^-1 units.
void write_params_file(const std::filesystem::path& file, const LindbladParams& p);

/// Reads an instrument-geometry file.
///
/// Required keys: kappa_per_m, t0_s, bragg_angle_rad, velocity_m_s,
/// theta0_rad. Optional grating offsets x1_m, x2_m, x3_m default to 0.
InstrumentGeometry read_geometry_file(const std::filesystem::path& file);

/// Reads a dataset file: a header line `x_nm  counts  port` followed by
/// whitespace-separated rows; port is `+` or `-` and must be uniform.
/// The given geometry is attached to the dataset.
FringeDataset read_dataset_file(const std::filesystem::path& file,
                                const InstrumentGeometry& geometry);

/// Writes a dataset file in the format read_dataset_file accepts
/// (tab-separated, positions in nm).
void write_dataset_file(const std::filesystem::path& file, const FringeDataset& ds);

/// JSON report for a fit (and optionally an extraction / two-time
/// estimate), with units stated per field. Schema documented in the
/// project README.
std::string fit_report_json(const FitResult& fit, const DissipativeEstimate* single_time,
                            const DissipativeEstimate* two_time);

/// Human-readable key-value report of the same content.
std::string fit_report_text(const FitResult& fit, const DissipativeEstimate* single_time,
                            const DissipativeEstimate* two_time);

} // namespace atomfringe
