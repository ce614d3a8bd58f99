#include "ktpent/dispersion.hpp"

#include <cmath>
#include <sstream>

#include "ktpent/errors.hpp"

namespace ktpent {

std::string_view to_string(Axis axis) { return axis == Axis::y ? "y" : "z"; }

Axis axis_from_string(std::string_view name) {
  if (name == "y") return Axis::y;
  if (name == "z") return Axis::z;
  throw ValidationError("unknown crystal axis '" + std::string(name) + "' (expected y or z)");
}

SellmeierModel::SellmeierModel(Axis axis, std::string form_id,
                               std::map<std::string, double> coefficients,
                               std::vector<ThermalTerm> thermal, double reference_temperature_c,
                               Interval valid_lambda_um, Interval valid_temp_c,
                               std::string source_citation)
    : axis_(axis),
      form_id_(std::move(form_id)),
      coefficients_(std::move(coefficients)),
      thermal_(std::move(thermal)),
      reference_temperature_c_(reference_temperature_c),
      valid_lambda_um_(valid_lambda_um),
      valid_temp_c_(valid_temp_c),
      source_citation_(std::move(source_citation)) {
  parse_coefficients();
  check_invariants();
}

SellmeierModel SellmeierModel::with_validity(Interval valid_lambda_um, Interval valid_temp_c) const {
  return SellmeierModel(axis_, form_id_, coefficients_, thermal_, reference_temperature_c_,
                        valid_lambda_um, valid_temp_c, source_citation_);
}

namespace {

// Parses the integer suffix of names like "B12" or "p3"; -1 if absent/invalid.
int suffix_index(const std::string& name, std::size_t prefix_len) {
  if (name.size() <= prefix_len) return -1;
  int value = 0;
  for (std::size_t i = prefix_len; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return -1;
    value = value * 10 + (name[i] - '0');
  }
  return value;
}

}  // namespace

void SellmeierModel::parse_coefficients() {
  if (form_id_ == "resonant") {
    form_ = Form::resonant;
    std::map<int, double> b, c;
    bool have_a = false;
    for (const auto& [name, value] : coefficients_) {
      if (!std::isfinite(value)) throw ValidationError("coefficient '" + name + "' is not finite");
      if (name == "A") {
        a_ = value;
        have_a = true;
      } else if (name == "D") {
        d_ = value;
      } else if (name[0] == 'B' && suffix_index(name, 1) >= 1) {
        b[suffix_index(name, 1)] = value;
      } else if (name[0] == 'C' && suffix_index(name, 1) >= 1) {
        c[suffix_index(name, 1)] = value;
      } else {
        throw ValidationError("unknown coefficient '" + name + "' for form 'resonant'");
      }
    }
    if (!have_a) throw ValidationError("form 'resonant' requires coefficient 'A'");
    for (const auto& [k, bv] : b) {
      auto it = c.find(k);
      if (it == c.end()) throw ValidationError("coefficient 'B" + std::to_string(k) + "' has no matching 'C" + std::to_string(k) + "'");
      resonances_.emplace_back(bv, it->second);
    }
    for (const auto& [k, cv] : c) {
      (void)cv;
      if (!b.count(k)) throw ValidationError("coefficient 'C" + std::to_string(k) + "' has no matching 'B" + std::to_string(k) + "'");
    }
  } else if (form_id_ == "polynomial") {
    form_ = Form::polynomial;
    std::map<int, double> p;
    for (const auto& [name, value] : coefficients_) {
      if (!std::isfinite(value)) throw ValidationError("coefficient '" + name + "' is not finite");
      const int k = name[0] == 'p' ? suffix_index(name, 1) : -1;
      if (k < 0) throw ValidationError("unknown coefficient '" + name + "' for form 'polynomial'");
      p[k] = value;
    }
    if (p.empty()) throw ValidationError("form 'polynomial' requires at least one coefficient");
    poly_.assign(static_cast<std::size_t>(p.rbegin()->first) + 1, 0.0);
    for (const auto& [k, value] : p) poly_[static_cast<std::size_t>(k)] = value;
  } else {
    throw ValidationError("unknown form_id '" + form_id_ + "' (expected resonant or polynomial)");
  }
}

void SellmeierModel::check_invariants() const {
  if (!(valid_lambda_um_.lo > 0.0) || !(valid_lambda_um_.hi > valid_lambda_um_.lo))
    throw ValidationError("valid_lambda_um must be an ordered positive interval");
  if (!(valid_temp_c_.hi > valid_temp_c_.lo))
    throw ValidationError("valid_temp_c must be an ordered interval");
  if (!std::isfinite(reference_temperature_c_))
    throw ValidationError("reference_temperature_c is not finite");
  for (const auto& term : thermal_) {
    if (term.dT_power < 1)
      throw ValidationError("thermal term with dT_power < 1 does not vanish at the reference temperature");
    if (!std::isfinite(term.value)) throw ValidationError("thermal term value is not finite");
  }
  for (const auto& [b, c] : resonances_) {
    (void)b;
    if (c > 0.0) {
      const double pole = std::sqrt(c);
      if (valid_lambda_um_.contains(pole)) {
        std::ostringstream os;
        os << "resonance pole at " << pole << " um lies inside the wavelength window";
        throw ValidationError(os.str());
      }
    }
  }
  constexpr int kLambdaSamples = 64;
  constexpr int kTempSamples = 8;
  for (int i = 0; i <= kLambdaSamples; ++i) {
    const double lam = valid_lambda_um_.lo + valid_lambda_um_.width() * i / kLambdaSamples;
    for (int j = 0; j <= kTempSamples; ++j) {
      const double t = valid_temp_c_.lo + valid_temp_c_.width() * j / kTempSamples;
      const double n = bare_index(lam) + thermal_shift(lam, t - reference_temperature_c_);
      if (!(std::isfinite(n) && n > 1.0)) {
        std::ostringstream os;
        os << "refractive index " << n << " at " << lam << " um, " << t
           << " C violates n > 1 inside the validity window";
        throw ValidationError(os.str());
      }
    }
  }
}

double SellmeierModel::bare_index(double lambda_um) const {
  if (form_ == Form::polynomial) {
    double n = 0.0;
    for (auto it = poly_.rbegin(); it != poly_.rend(); ++it) n = n * lambda_um + *it;
    return n;
  }
  const double l2 = lambda_um * lambda_um;
  double n2 = a_ - d_ * l2;
  for (const auto& [b, c] : resonances_) n2 += b / (1.0 - c / l2);
  return std::sqrt(n2);
}

double SellmeierModel::thermal_shift(double lambda_um, double delta_t) const {
  double dn = 0.0;
  for (const auto& term : thermal_) {
    dn += term.value * std::pow(lambda_um, term.lambda_power) * std::pow(delta_t, term.dT_power);
  }
  return dn;
}

namespace {

void require_inside(const SellmeierModel& model, const IndexQuery& q, double margin_um) {
  const auto& wl = model.valid_lambda_um();
  const auto& tr = model.valid_temp_c();
  if (!(q.wavelength_um > 0.0) || q.wavelength_um - margin_um < wl.lo ||
      q.wavelength_um + margin_um > wl.hi || !tr.contains(q.temperature_c)) {
    std::ostringstream os;
    os << to_string(model.axis()) << "-axis query (" << q.wavelength_um << " um, "
       << q.temperature_c << " C) outside validity window [" << wl.lo << ", " << wl.hi
       << "] um x [" << tr.lo << ", " << tr.hi << "] C";
    if (margin_um > 0.0) os << " with derivative margin " << margin_um << " um";
    throw OutOfRange(os.str());
  }
}

}  // namespace

double refractive_index(const SellmeierModel& model, const IndexQuery& q) {
  require_inside(model, q, 0.0);
  return model.bare_index(q.wavelength_um) +
         model.thermal_shift(q.wavelength_um, q.temperature_c - model.reference_temperature_c());
}

double index_derivative(const SellmeierModel& model, const IndexQuery& q, int order) {
  if (order != 1 && order != 2) throw ParamOutOfRange("derivative order must be 1 or 2");
  constexpr double h = kDerivativeStepUm;
  require_inside(model, q, 2.0 * h);

  const double dt = q.temperature_c - model.reference_temperature_c();
  auto n = [&](double lam) { return model.bare_index(lam) + model.thermal_shift(lam, dt); };
  const double x = q.wavelength_um;

  if (order == 1) {
    const double d_h = (n(x + h) - n(x - h)) / (2.0 * h);
    const double d_2h = (n(x + 2.0 * h) - n(x - 2.0 * h)) / (4.0 * h);
    return (4.0 * d_h - d_2h) / 3.0;
  }
  const double f0 = n(x);
  const double d_h = (n(x + h) - 2.0 * f0 + n(x - h)) / (h * h);
  const double d_2h = (n(x + 2.0 * h) - 2.0 * f0 + n(x - 2.0 * h)) / (4.0 * h * h);
  return (4.0 * d_h - d_2h) / 3.0;
}

double group_index(const SellmeierModel& model, const IndexQuery& q) {
  return refractive_index(model, q) - q.wavelength_um * index_derivative(model, q, 1);
}

}  // namespace ktpent
