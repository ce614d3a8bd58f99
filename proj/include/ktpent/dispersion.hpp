#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ktpent {

/// Principal dielectric axis of an x-cut biaxial crystal.
enum class Axis { y, z };

std::string_view to_string(Axis axis);
Axis axis_from_string(std::string_view name);

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

/// One term of the thermal index correction:
///   value * lambda^lambda_power * (T - T_ref)^dT_power
struct ThermalTerm {
  int lambda_power = 0;
  int dT_power = 1;
  double value = 0.0;
};

/// Temperature-dependent refractive index model for one crystal axis.
///
/// Two dispersion forms are understood (selected by `form_id`):
///
///   "resonant"   : n^2 = A + sum_k Bk / (1 - Ck / lambda^2) - D * lambda^2
///                  coefficients A, B1, C1, B2, C2, ..., D (D optional)
///   "polynomial" : n = sum_k pk * lambda^k, coefficients p0, p1, ...
///
/// Wavelengths are vacuum micrometres, temperatures degrees Celsius. The
/// constructor rejects unknown coefficient names, resonance poles inside the
/// wavelength window, thermal terms that survive at the reference
/// temperature, and any index <= 1 on the validity grid.
class SellmeierModel {
 public:
  SellmeierModel(Axis axis, std::string form_id, std::map<std::string, double> coefficients,
                 std::vector<ThermalTerm> thermal, double reference_temperature_c,
                 Interval valid_lambda_um, Interval valid_temp_c, std::string source_citation = {});

  Axis axis() const { return axis_; }
  const std::string& form_id() const { return form_id_; }
  const std::map<std::string, double>& coefficients() const { return coefficients_; }
  const std::vector<ThermalTerm>& thermal() const { return thermal_; }
  double reference_temperature_c() const { return reference_temperature_c_; }
  const Interval& valid_lambda_um() const { return valid_lambda_um_; }
  const Interval& valid_temp_c() const { return valid_temp_c_; }
  const std::string& source_citation() const { return source_citation_; }

  /// Room-temperature dispersion formula, no range check.
  double bare_index(double lambda_um) const;
  /// Thermal correction for a temperature offset from the reference, no range check.
  double thermal_shift(double lambda_um, double delta_t) const;

  /// Copy with a different validity window (coefficients unchanged).
  SellmeierModel with_validity(Interval valid_lambda_um, Interval valid_temp_c) const;

 private:
  enum class Form { resonant, polynomial };

  void parse_coefficients();
  void check_invariants() const;

  Axis axis_;
  std::string form_id_;
  std::map<std::string, double> coefficients_;
  std::vector<ThermalTerm> thermal_;
  double reference_temperature_c_;
  Interval valid_lambda_um_;
  Interval valid_temp_c_;
  std::string source_citation_;

  Form form_ = Form::resonant;
  double a_ = 0.0;
  double d_ = 0.0;
  std::vector<std::pair<double, double>> resonances_;  // (B, C)
  std::vector<double> poly_;
};

struct IndexQuery {
  double wavelength_um = 0.0;
  double temperature_c = 0.0;
};

/// Finite-difference step used for wavelength derivatives (um).
inline constexpr double kDerivativeStepUm = 1e-4;

/// n(lambda, T) = bare(lambda) + thermal(lambda, T - T_ref). Throws OutOfRange
/// outside the model's validity window.
double refractive_index(const SellmeierModel& model, const IndexQuery& q);

/// d^order n / d lambda^order in um^-order (order 1 or 2). Central difference
/// with one Richardson level; the query must sit at least two steps inside
/// the wavelength window.
double index_derivative(const SellmeierModel& model, const IndexQuery& q, int order);

/// n_g = n - lambda dn/dlambda.
double group_index(const SellmeierModel& model, const IndexQuery& q);

}  // namespace ktpent
