#include "ktpent/phase_matching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ktpent/errors.hpp"
#include "ktpent/roots.hpp"

namespace ktpent {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSpeedOfLightUmPerFs = 0.299792458;

double sinc2(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 3.0;
  const double s = std::sin(x) / x;
  return s * s;
}

std::vector<double> grid(Interval range, double step) {
  std::vector<double> xs;
  const auto n = static_cast<std::size_t>(std::floor(range.width() / step + 1e-9)) + 1;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) xs.push_back(range.lo + static_cast<double>(i) * step);
  return xs;
}

void require_ordered(Interval range, double step, const char* what) {
  if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || range.hi < range.lo) {
    std::ostringstream os;
    os << what << " range [" << range.lo << ", " << range.hi << "] is not ordered";
    throw ValidationError(os.str());
  }
  if (!(step > 0.0) || !std::isfinite(step)) {
    std::ostringstream os;
    os << what << " step " << step << " must be positive";
    throw ValidationError(os.str());
  }
}

}  // namespace

CrystalSpec::CrystalSpec(double length_mm, double poling_period_um, Axis pump_axis,
                         Axis signal_axis, Axis idler_axis, std::map<Axis, SellmeierModel> models,
                         Interval temperature_bounds_c)
    : length_mm_(length_mm),
      poling_period_um_(poling_period_um),
      pump_axis_(pump_axis),
      signal_axis_(signal_axis),
      idler_axis_(idler_axis),
      models_(std::move(models)),
      temperature_bounds_c_(temperature_bounds_c) {
  if (!(length_mm_ > 0.0) || !std::isfinite(length_mm_))
    throw ValidationError("length_mm must be positive");
  if (!(poling_period_um_ > 0.0) || !std::isfinite(poling_period_um_))
    throw ValidationError("poling_period_um must be positive");
  if (!(temperature_bounds_c_.hi >= temperature_bounds_c_.lo))
    throw ValidationError("temperature_bounds_c must be ordered");
  for (Axis a : {pump_axis_, signal_axis_, idler_axis_}) {
    if (!models_.count(a))
      throw ValidationError("no Sellmeier model supplied for axis '" + std::string(to_string(a)) + "'");
  }
}

const SellmeierModel& CrystalSpec::model(Axis axis) const {
  auto it = models_.find(axis);
  if (it == models_.end())
    throw ValidationError("no Sellmeier model for axis '" + std::string(to_string(axis)) + "'");
  return it->second;
}

CrystalSpec CrystalSpec::with_length_mm(double length_mm) const {
  return CrystalSpec(length_mm, poling_period_um_, pump_axis_, signal_axis_, idler_axis_, models_,
                     temperature_bounds_c_);
}

CrystalSpec CrystalSpec::with_poling_period_um(double period_um) const {
  return CrystalSpec(length_mm_, period_um, pump_axis_, signal_axis_, idler_axis_, models_,
                     temperature_bounds_c_);
}

CrystalSpec CrystalSpec::with_temperature_bounds(Interval bounds_c) const {
  return CrystalSpec(length_mm_, poling_period_um_, pump_axis_, signal_axis_, idler_axis_, models_,
                     bounds_c);
}

CrystalSpec CrystalSpec::with_model_validity(Interval lambda_um, Interval temp_c) const {
  std::map<Axis, SellmeierModel> widened;
  for (const auto& [axis, m] : models_) widened.emplace(axis, m.with_validity(lambda_um, temp_c));
  return CrystalSpec(length_mm_, poling_period_um_, pump_axis_, signal_axis_, idler_axis_,
                     std::move(widened), temperature_bounds_c_);
}

void TuningCurve::validate() const {
  if (abscissa.size() != ordinate.size())
    throw ValidationError("curve abscissa and ordinate lengths differ");
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    if (!std::isfinite(ordinate[i])) throw ValidationError("curve ordinate is not finite");
    if (i > 0 && !(abscissa[i] > abscissa[i - 1]))
      throw ValidationError("curve abscissa is not strictly increasing");
  }
}

double phase_mismatch(const CrystalSpec& crystal, double pump_nm, double signal_nm,
                      double idler_nm, double temperature_c) {
  if (!(pump_nm > 0.0 && signal_nm > 0.0 && idler_nm > 0.0))
    throw ParamOutOfRange("wavelengths must be positive");
  const double energy_residual = 1.0 / pump_nm - 1.0 / signal_nm - 1.0 / idler_nm;
  if (std::abs(energy_residual) > 1e-9) {
    std::ostringstream os;
    os << "1/lp - 1/ls - 1/li = " << energy_residual << " nm^-1 for (" << pump_nm << ", "
       << signal_nm << ", " << idler_nm << ") nm";
    throw EnergyConservationViolated(os.str());
  }
  const double lp = pump_nm * 1e-3;
  const double ls = signal_nm * 1e-3;
  const double li = idler_nm * 1e-3;
  const double np = refractive_index(crystal.model(crystal.pump_axis()), {lp, temperature_c});
  const double ns = refractive_index(crystal.model(crystal.signal_axis()), {ls, temperature_c});
  const double ni = refractive_index(crystal.model(crystal.idler_axis()), {li, temperature_c});
  return kTwoPi * (np / lp - ns / ls - ni / li + 1.0 / crystal.poling_period_um());
}

double degenerate_mismatch(const CrystalSpec& crystal, double pump_nm, double temperature_c) {
  return phase_mismatch(crystal, pump_nm, 2.0 * pump_nm, 2.0 * pump_nm, temperature_c);
}

double degenerate_pm_temperature(const CrystalSpec& crystal, double pump_nm) {
  const auto f = [&](double t) { return degenerate_mismatch(crystal, pump_nm, t); };
  const Interval bounds = crystal.temperature_bounds_c();
  const auto br = roots::scan_for_sign_change(f, bounds.lo, bounds.hi, kBracketStepC);
  if (!br) {
    std::ostringstream os;
    os << "no degenerate phase-match temperature for pump " << pump_nm << " nm in ["
       << bounds.lo << ", " << bounds.hi << "] C";
    throw NoBracket(os.str());
  }
  // Bisect to near the noise floor of the mismatch: the curve is flat at its
  // turning point, so locating the extremum needs very clean temperatures.
  return roots::bisect(f, *br, kTemperatureTolC * 1e-7);
}

PhaseMatchPoint degenerate_pm_point(const CrystalSpec& crystal, double pump_nm) {
  const double t = degenerate_pm_temperature(crystal, pump_nm);
  return {pump_nm, t, degenerate_mismatch(crystal, pump_nm, t) * 1e3};
}

PmCurve pm_temperature_curve(const CrystalSpec& crystal, Interval fundamental_nm, double step_nm) {
  require_ordered(fundamental_nm, step_nm, "wavelength");
  if (fundamental_nm.width() <= 0.0) throw EmptyCurve("zero-length wavelength range");

  PmCurve out;
  out.curve.abscissa_label = "fundamental_wavelength";
  out.curve.abscissa_unit = "nm";
  out.curve.ordinate_label = "phase_match_temperature";
  out.curve.ordinate_unit = "C";
  for (double lam : grid(fundamental_nm, step_nm)) {
    try {
      const double t = degenerate_pm_temperature(crystal, 0.5 * lam);
      out.curve.abscissa.push_back(lam);
      out.curve.ordinate.push_back(t);
    } catch (const NoBracket&) {
      out.omitted_nm.push_back(lam);
    }
  }
  if (out.curve.empty()) throw EmptyCurve("no grid point has a phase-match temperature");
  return out;
}

TurningPoint pm_curve_extremum(const CrystalSpec& crystal, const TuningCurve& curve) {
  curve.validate();
  if (curve.size() < 3) throw NoSolutionInRange("curve too short for an interior extremum");
  const auto& y = curve.ordinate;
  const auto imin = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
  const auto imax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const auto interior = [&](std::size_t i) { return i > 0 && i + 1 < y.size(); };

  bool is_min;
  std::size_t i;
  if (interior(imin)) {
    is_min = true;
    i = imin;
  } else if (interior(imax)) {
    is_min = false;
    i = imax;
  } else {
    throw NoSolutionInRange("phase-match curve has no interior extremum");
  }
  const double sign = is_min ? 1.0 : -1.0;
  const auto g = [&](double lam) { return sign * degenerate_pm_temperature(crystal, 0.5 * lam); };
  const auto [x, gx] = roots::golden_minimize(g, curve.abscissa[i - 1], curve.abscissa[i + 1], 1e-4);
  return {x, sign * gx, is_min};
}

double turning_point_asymmetry(const CrystalSpec& crystal, const TurningPoint& tp,
                               double max_offset_nm) {
  double worst = 0.0;
  for (double d = 1.0; d <= max_offset_nm + 1e-9; d += 1.0) {
    const double hi = degenerate_pm_temperature(crystal, 0.5 * (tp.fundamental_nm + d));
    const double lo = degenerate_pm_temperature(crystal, 0.5 * (tp.fundamental_nm - d));
    worst = std::max(worst, std::abs(hi - lo));
  }
  return worst;
}

namespace {

double group_index_mismatch(const CrystalSpec& crystal, double pump_nm, double t) {
  const double lp = pump_nm * 1e-3;
  const double lf = 2.0 * lp;
  const double ngp = group_index(crystal.model(crystal.pump_axis()), {lp, t});
  const double ngs = group_index(crystal.model(crystal.signal_axis()), {lf, t});
  const double ngi = group_index(crystal.model(crystal.idler_axis()), {lf, t});
  return ngp - 0.5 * (ngs + ngi);
}

}  // namespace

EpmPoint find_epm_pump(const CrystalSpec& crystal, Interval pump_search_nm) {
  require_ordered(pump_search_nm, kBracketStepNm, "pump search");

  // Outer function: group-index condition evaluated on the phase-match locus.
  const auto g = [&](double pump_nm) {
    return group_index_mismatch(crystal, pump_nm, degenerate_pm_temperature(crystal, pump_nm));
  };

  std::optional<roots::Bracket> br;
  bool have_prev = false;
  double prev_x = 0.0;
  double prev_g = 0.0;
  for (double x : grid(pump_search_nm, kBracketStepNm)) {
    double gx;
    try {
      gx = g(x);
    } catch (const NoBracket&) {
      have_prev = false;  // gap in the locus breaks the bracket
      continue;
    } catch (const OutOfRange&) {
      have_prev = false;
      continue;
    }
    if (have_prev && (gx == 0.0 || std::signbit(gx) != std::signbit(prev_g))) {
      br = roots::Bracket{prev_x, x, prev_g, gx};
      break;
    }
    have_prev = true;
    prev_x = x;
    prev_g = gx;
  }
  if (!br) {
    std::ostringstream os;
    os << "no extended phase match for pump in [" << pump_search_nm.lo << ", "
       << pump_search_nm.hi << "] nm with temperature in [" << crystal.temperature_bounds_c().lo
       << ", " << crystal.temperature_bounds_c().hi << "] C";
    throw NoSolutionInRange(os.str());
  }

  const double pump = roots::bisect(g, *br, kWavelengthTolNm * 1e-2);
  const double t = degenerate_pm_temperature(crystal, pump);
  EpmPoint out;
  out.point = {pump, t, degenerate_mismatch(crystal, pump, t) * 1e3};
  out.group_index_mismatch = group_index_mismatch(crystal, pump, t);
  // dk/domega = dn_g / c, reported per mm.
  out.dk_domega_fs_per_mm = out.group_index_mismatch / kSpeedOfLightUmPerFs * 1e3;
  return out;
}

TuningCurve shg_power_curve(const CrystalSpec& crystal, double fundamental_nm,
                            Interval temperature_c, double step_c) {
  require_ordered(temperature_c, step_c, "temperature");
  const Interval bounds = crystal.temperature_bounds_c();
  if (temperature_c.lo < bounds.lo || temperature_c.hi > bounds.hi) {
    std::ostringstream os;
    os << "SHG sweep [" << temperature_c.lo << ", " << temperature_c.hi
       << "] C exceeds crystal bounds [" << bounds.lo << ", " << bounds.hi << "] C";
    throw OutOfRange(os.str());
  }
  TuningCurve c;
  c.abscissa_label = "temperature";
  c.abscissa_unit = "C";
  c.ordinate_label = "normalized_shg_power";
  c.ordinate_unit = "1";
  const double half_len = 0.5 * crystal.length_um();
  for (double t : grid(temperature_c, step_c)) {
    c.abscissa.push_back(t);
    c.ordinate.push_back(sinc2(degenerate_mismatch(crystal, 0.5 * fundamental_nm, t) * half_len));
  }
  return c;
}

double shg_temperature_fwhm(const CrystalSpec& crystal, double fundamental_nm, Interval search_c) {
  const double pump = 0.5 * fundamental_nm;
  const double half_len = 0.5 * crystal.length_um();
  const auto dk = [&](double t) { return degenerate_mismatch(crystal, pump, t); };
  const auto br = roots::scan_for_sign_change(dk, search_c.lo, search_c.hi, kBracketStepC);
  if (!br) throw NoBracket("no SHG phase-match temperature inside the search window");
  const double peak_t = roots::bisect(dk, *br, 1e-9);
  const auto excess = [&](double t) { return sinc2(dk(t) * half_len) - 0.5; };

  const auto crossing = [&](double direction) {
    constexpr double kWalk = 0.25;
    double a = peak_t;
    double fa = excess(a);
    while (true) {
      const double b = a + direction * kWalk;
      if (b < search_c.lo || b > search_c.hi)
        throw NoBracket("SHG half-maximum crossing lies outside the search window");
      const double fb = excess(b);
      if (fb <= 0.0) {
        roots::Bracket bb = direction > 0 ? roots::Bracket{a, b, fa, fb} : roots::Bracket{b, a, fb, fa};
        return roots::bisect(excess, bb, 1e-9);
      }
      a = b;
      fa = fb;
    }
  };
  return crossing(+1.0) - crossing(-1.0);
}

TuningCurve spdc_spectrum(const CrystalSpec& crystal, double pump_nm, double temperature_c,
                          std::span<const double> signal_nm) {
  TuningCurve c;
  c.abscissa_label = "signal_wavelength";
  c.abscissa_unit = "nm";
  c.ordinate_label = "normalized_spdc_intensity";
  c.ordinate_unit = "1";
  const double half_len = 0.5 * crystal.length_um();
  for (double ls : signal_nm) {
    const double inv_idler = 1.0 / pump_nm - 1.0 / ls;
    if (!(inv_idler > 0.0)) throw ParamOutOfRange("signal wavelength must exceed the pump wavelength");
    const double li = 1.0 / inv_idler;
    c.abscissa.push_back(ls);
    c.ordinate.push_back(sinc2(phase_mismatch(crystal, pump_nm, ls, li, temperature_c) * half_len));
  }
  c.validate();
  return c;
}

double spdc_bandwidth_fwhm(const CrystalSpec& crystal, double pump_nm, double temperature_c) {
  const double half_len = 0.5 * crystal.length_um();
  const auto spectrum = [&](double ls) {
    const double li = 1.0 / (1.0 / pump_nm - 1.0 / ls);
    return sinc2(phase_mismatch(crystal, pump_nm, ls, li, temperature_c) * half_len);
  };
  const double center = 2.0 * pump_nm;
  const double half = 0.5 * spectrum(center);
  if (half < 0.25)
    throw ParamOutOfRange("pump/temperature pair is not near degenerate phase matching");
  const auto excess = [&](double ls) { return spectrum(ls) - half; };

  const auto crossing = [&](double direction) {
    constexpr double kWalk = 0.01;
    constexpr double kMaxWalk = 100.0;
    double a = center;
    double fa = excess(a);
    for (double off = kWalk; off <= kMaxWalk; off += kWalk) {
      const double b = center + direction * off;
      const double fb = excess(b);
      if (fb <= 0.0) {
        roots::Bracket bb = direction > 0 ? roots::Bracket{a, b, fa, fb} : roots::Bracket{b, a, fb, fa};
        return roots::bisect(excess, bb, 1e-9);
      }
      a = b;
      fa = fb;
    }
    throw NoBracket("SPDC half-maximum crossing not found within 100 nm of degeneracy");
  };
  return crossing(+1.0) - crossing(-1.0);
}

double curve_fwhm(const TuningCurve& curve) {
  curve.validate();
  if (curve.size() < 3) throw EmptyCurve("curve too short for a FWHM");
  const auto& x = curve.abscissa;
  const auto& y = curve.ordinate;
  const auto ipk = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double half = 0.5 * y[ipk];

  std::size_t i = ipk;
  while (i > 0 && y[i - 1] > half) --i;
  if (i == 0) throw NoBracket("curve does not fall to half maximum on the low side");
  const double left = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1]);

  std::size_t j = ipk;
  while (j + 1 < y.size() && y[j + 1] > half) ++j;
  if (j + 1 == y.size()) throw NoBracket("curve does not fall to half maximum on the high side");
  const double right = x[j] + (y[j] - half) * (x[j + 1] - x[j]) / (y[j] - y[j + 1]);
  return right - left;
}

}  // namespace ktpent
