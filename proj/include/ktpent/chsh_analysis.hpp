#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ktpent/entanglement.hpp"

namespace ktpent {

/// Polariser settings of a CHSH run. Each angle comes with its orthogonal
/// partner used in the correlation denominator.
struct ChshAngles {
  double a = -22.5, a_perp = 67.5;
  double a_prime = 22.5, a_prime_perp = 112.5;
  double b = -45.0, b_perp = 45.0;
  double b_prime = 0.0, b_prime_perp = 90.0;
};

/// Counts entering one correlation term, in the order
/// C(t1,t2), C(t1_perp,t2_perp), C(t1,t2_perp), C(t1_perp,t2).
struct CorrelationCounts {
  double pp = 0.0;
  double tt = 0.0;
  double pt = 0.0;
  double tp = 0.0;

  double total() const { return pp + tt + pt + tp; }
};

using ChshCounts = std::array<CorrelationCounts, 4>;

/// The four settings of each term, terms ordered (a,b), (a',b), (a,b'), (a',b').
std::array<std::array<AngleSetting, 4>, 4> chsh_term_settings(const ChshAngles& angles = {});
/// The 16 distinct settings of a CHSH run.
std::vector<AngleSetting> chsh_settings(const ChshAngles& angles = {});

struct ChshResult {
  std::array<double, 4> E{};
  std::array<double, 4> sigma_E{};
  double S = 0.0;  // |signed sum|
  double S_signed = 0.0;
  double sigma_S = 0.0;
  double significance = 0.0;  // (|S| - 2) / sigma_S
};

/// First-order Poisson error of |S|; each correlation contributes
///   var(E) = [(1-E)^2 (pp+tt) + (1+E)^2 (pt+tp)] / N^2
/// and the four terms add in quadrature.
double s_uncertainty(const ChshCounts& counts);

/// E, S, sigma_S and significance from counts. `variances` defaults to the
/// counts themselves (raw Poisson data); pass raw counts when `counts` are
/// background-subtracted.
ChshResult chsh_from_counts(const ChshCounts& counts, const SignMask& mask = kDefaultSignMask,
                            const ChshCounts* variances = nullptr);

struct AnalysisOptions {
  ChshAngles angles{};
  SignMask mask = kDefaultSignMask;
  double window_ns = 5.0;
  double dark_rate1_hz = 310.0;
  double dark_rate2_hz = 310.0;
};

struct BasisVisibility {
  std::optional<double> raw;
  std::optional<double> net_accidental;
  std::optional<double> net_dark;
  std::size_t rows = 0;
};

struct ChshAnalysis {
  ChshResult raw;
  ChshResult net_accidental;  // R1 R2 tau subtracted per row
  ChshResult net_dark;        // only dark-count-induced coincidences subtracted
  BasisVisibility rect;
  BasisVisibility diag;
  std::size_t clamped_rows = 0;
  std::size_t rows = 0;
};

/// Groups records by CHSH setting (rows repeating a setting are summed) and
/// computes raw and background-subtracted variants. Throws ValidationError
/// listing any of the 16 settings with no row. Rows with polariser 2 at 0 or
/// 45 deg also form the rect / diag fringe for visibilities.
ChshAnalysis analyze_records(std::span<const CountRecord> records, const AnalysisOptions& options = {});

/// Dark-count-induced coincidences: (d1 R2 + R1 d2 - d1 d2) tau.
double dark_coincidence_rate(double singles1_hz, double singles2_hz, double dark1_hz,
                             double dark2_hz, double window_ns);

}  // namespace ktpent
