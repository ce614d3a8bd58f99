#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ktpent/entanglement.hpp"
#include "ktpent/phase_matching.hpp"

namespace ktpent {

inline constexpr const char* kCountRecordHeader =
    "theta1_deg,theta2_deg,coincidences,duration_s,singles1_hz,singles2_hz";
inline constexpr const char* kCurveHeader = "abscissa,ordinate";

/// Writes `# `-prefixed comment lines, the header and one row per record.
/// Numbers are printed with 17 significant digits so reading back is exact.
void write_count_records(std::ostream& os, const std::vector<CountRecord>& records,
                         const std::vector<std::string>& comments = {});

/// Parses the count-record CSV. Blank lines and `#` lines are skipped; the
/// first other line must be the exact header. Throws ValidationError with
/// the line number on malformed rows.
std::vector<CountRecord> read_count_records(std::istream& is);

/// Curve CSV: comments, a `# units: <x>,<y>` line, header, rows.
void write_curve_csv(std::ostream& os, const TuningCurve& curve,
                     const std::vector<std::string>& comments = {});
TuningCurve read_curve_csv(std::istream& is);

}  // namespace ktpent
