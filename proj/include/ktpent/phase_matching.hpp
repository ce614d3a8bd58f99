#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ktpent/dispersion.hpp"

namespace ktpent {

/// Periodically poled crystal used collinearly along x.
class CrystalSpec {
 public:
  CrystalSpec(double length_mm, double poling_period_um, Axis pump_axis, Axis signal_axis,
              Axis idler_axis, std::map<Axis, SellmeierModel> models,
              Interval temperature_bounds_c);

  double length_mm() const { return length_mm_; }
  double length_um() const { return length_mm_ * 1e3; }
  double poling_period_um() const { return poling_period_um_; }
  Axis pump_axis() const { return pump_axis_; }
  Axis signal_axis() const { return signal_axis_; }
  Axis idler_axis() const { return idler_axis_; }
  const Interval& temperature_bounds_c() const { return temperature_bounds_c_; }
  const std::map<Axis, SellmeierModel>& models() const { return models_; }
  const SellmeierModel& model(Axis axis) const;

  CrystalSpec with_length_mm(double length_mm) const;
  CrystalSpec with_poling_period_um(double period_um) const;
  CrystalSpec with_temperature_bounds(Interval bounds_c) const;
  /// Widens every model's validity window (for exploratory sweeps).
  CrystalSpec with_model_validity(Interval lambda_um, Interval temp_c) const;

 private:
  double length_mm_;
  double poling_period_um_;
  Axis pump_axis_;
  Axis signal_axis_;
  Axis idler_axis_;
  std::map<Axis, SellmeierModel> models_;
  Interval temperature_bounds_c_;
};

struct PhaseMatchPoint {
  double pump_wavelength_nm = 0.0;
  double temperature_c = 0.0;
  double residual_rad_per_mm = 0.0;
};

/// Sampled curve y(x) with strictly increasing abscissa.
struct TuningCurve {
  std::vector<double> abscissa;
  std::vector<double> ordinate;
  std::string abscissa_label;
  std::string abscissa_unit;
  std::string ordinate_label;
  std::string ordinate_unit;

  std::size_t size() const { return abscissa.size(); }
  bool empty() const { return abscissa.empty(); }
  /// Throws ValidationError on length mismatch, non-monotone abscissa or non-finite ordinate.
  void validate() const;
};

struct PmCurve {
  TuningCurve curve;             // fundamental wavelength (nm) -> temperature (C)
  std::vector<double> omitted_nm;  // grid points with no phase-match temperature
};

struct TurningPoint {
  double fundamental_nm = 0.0;
  double temperature_c = 0.0;
  bool is_minimum = true;
};

struct EpmPoint {
  PhaseMatchPoint point;
  double group_index_mismatch = 0.0;  // n_g,p - (n_g,s + n_g,i) / 2
  double dk_domega_fs_per_mm = 0.0;   // first frequency derivative of the mismatch
};

inline constexpr double kBracketStepC = 1.0;
inline constexpr double kBracketStepNm = 0.5;
inline constexpr double kTemperatureTolC = 1e-3;
inline constexpr double kWavelengthTolNm = 1e-3;

/// First-order QPM phase mismatch in rad/um:
///   2 pi [ n_p(lp)/lp - n_s(ls)/ls - n_i(li)/li + 1/Lambda ]
/// Requires 1/lp = 1/ls + 1/li to 1e-9 nm^-1.
double phase_mismatch(const CrystalSpec& crystal, double pump_nm, double signal_nm,
                      double idler_nm, double temperature_c);

/// Mismatch for degenerate output (signal = idler = 2 x pump).
double degenerate_mismatch(const CrystalSpec& crystal, double pump_nm, double temperature_c);

/// Phase-match temperature for degenerate SPDC at the given pump, searched
/// over the crystal's temperature bounds. Throws NoBracket when none exists.
double degenerate_pm_temperature(const CrystalSpec& crystal, double pump_nm);
PhaseMatchPoint degenerate_pm_point(const CrystalSpec& crystal, double pump_nm);

/// Phase-match temperature against fundamental (= degenerate output)
/// wavelength. Points without a solution are listed in `omitted_nm`.
PmCurve pm_temperature_curve(const CrystalSpec& crystal, Interval fundamental_nm, double step_nm);

/// Interior extremum of a phase-match curve, refined by golden section.
TurningPoint pm_curve_extremum(const CrystalSpec& crystal, const TuningCurve& curve);

/// Largest |T(tp + d) - T(tp - d)| over d = 1 .. max_offset_nm in 1 nm steps.
double turning_point_asymmetry(const CrystalSpec& crystal, const TurningPoint& tp,
                               double max_offset_nm);

/// Extended phase match: degenerate phase matching plus vanishing first
/// frequency derivative of the mismatch, found by an outer root on the
/// group-index condition over pump wavelength with the phase-match
/// temperature solved inside.
EpmPoint find_epm_pump(const CrystalSpec& crystal, Interval pump_search_nm = {700.0, 900.0});

/// Normalised SHG efficiency sinc^2(dk L / 2) against temperature.
TuningCurve shg_power_curve(const CrystalSpec& crystal, double fundamental_nm,
                            Interval temperature_c, double step_c);

/// FWHM of the continuous SHG temperature response, by bisection on the
/// half-maximum crossings around the phase-match temperature inside `search_c`.
double shg_temperature_fwhm(const CrystalSpec& crystal, double fundamental_nm, Interval search_c);

/// Normalised SPDC signal spectrum sinc^2(dk L / 2) with the idler fixed by
/// energy conservation.
TuningCurve spdc_spectrum(const CrystalSpec& crystal, double pump_nm, double temperature_c,
                          std::span<const double> signal_nm);

/// FWHM (nm) of the signal spectrum around the degenerate peak.
double spdc_bandwidth_fwhm(const CrystalSpec& crystal, double pump_nm, double temperature_c);

/// FWHM of a sampled single-peaked curve, linear interpolation at the crossings.
double curve_fwhm(const TuningCurve& curve);

}  // namespace ktpent
