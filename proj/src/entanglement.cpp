#include "ktpent/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ktpent/errors.hpp"

namespace ktpent {

double reduce_angle_deg(double deg) {
  double r = std::fmod(deg, 180.0);
  if (r < 0.0) r += 180.0;
  if (r >= 180.0) r -= 180.0;
  return r;
}

namespace {

bool same_angle(double a, double b, double tol) {
  const double d = std::abs(reduce_angle_deg(a) - reduce_angle_deg(b));
  return d <= tol || 180.0 - d <= tol;
}

void require_fraction(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << name << " = " << x << " outside [0, 1]";
    throw ParamOutOfRange(os.str());
  }
}

void require_nonnegative(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << name << " = " << x << " must be finite and >= 0";
    throw ParamOutOfRange(os.str());
  }
}

}  // namespace

bool same_setting(const AngleSetting& a, const AngleSetting& b, double tol_deg) {
  return same_angle(a.theta1_deg, b.theta1_deg, tol_deg) &&
         same_angle(a.theta2_deg, b.theta2_deg, tol_deg);
}

void DetectorModel::validate() const {
  require_fraction(efficiency, "detector efficiency");
  require_nonnegative(dark_rate_hz, "dark rate");
  require_nonnegative(gate_window_ns, "gate window");
  require_nonnegative(trigger_rate_hz, "trigger rate");
}

void CountRecord::validate() const {
  if (!std::isfinite(setting.theta1_deg) || !std::isfinite(setting.theta2_deg))
    throw ParamOutOfRange("polariser angles must be finite");
  require_nonnegative(coincidences, "coincidences");
  require_nonnegative(singles1_hz, "singles1");
  require_nonnegative(singles2_hz, "singles2");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s))
    throw ParamOutOfRange("record duration must be > 0");
}

void ExperimentModel::validate() const {
  require_nonnegative(pair_rate_per_mw, "pair rate");
  require_nonnegative(pump_power_mw, "pump power");
  require_fraction(arm_transmissions[0], "arm 1 transmission");
  require_fraction(arm_transmissions[1], "arm 2 transmission");
  detectors[0].validate();
  detectors[1].validate();
}

TwoPhotonState ideal_post_selected_state() {
  Vector4c<double> psi = Vector4c<double>::Zero();
  psi(kHV) = psi(kVH) = 1.0 / std::sqrt(2.0);
  return TwoPhotonState::from_pure(psi);
}

TwoPhotonState dephased_state(double coherence, double imbalance) {
  require_fraction(coherence, "coherence");
  require_fraction(imbalance, "imbalance");
  const double p_hv = 0.5 * (1.0 + imbalance);
  const double p_vh = 0.5 * (1.0 - imbalance);
  Matrix4c<double> rho = Matrix4c<double>::Zero();
  rho(kHV, kHV) = p_hv;
  rho(kVH, kVH) = p_vh;
  rho(kHV, kVH) = rho(kVH, kHV) = coherence * std::sqrt(p_hv * p_vh);
  return TwoPhotonState(rho);
}

TwoPhotonState maximally_mixed_state() {
  return TwoPhotonState(Matrix4c<double>::Identity() / 4.0);
}

TwoPhotonState product_state(const AngleSetting& pol) {
  const double t1 = deg_to_rad(pol.theta1_deg);
  const double t2 = deg_to_rad(pol.theta2_deg);
  Vector4c<double> psi;
  psi << std::cos(t1) * std::cos(t2), std::cos(t1) * std::sin(t2), std::sin(t1) * std::cos(t2),
      std::sin(t1) * std::sin(t2);
  return TwoPhotonState::from_pure(psi);
}

double coincidence_probability(const TwoPhotonState& state, const AngleSetting& setting) {
  return coincidence_probability(state, setting.theta1_deg, setting.theta2_deg);
}

double correlation_E(double c_pp, double c_tt, double c_pt, double c_tp) {
  const double total = c_pp + c_tt + c_pt + c_tp;
  if (!(total > 0.0)) throw ZeroDenominator("correlation needs a positive coincidence total");
  return (c_pp + c_tt - c_pt - c_tp) / total;
}

ChshValue chsh_S(const std::array<double, 4>& E, const SignMask& mask) {
  double s = 0.0;
  for (std::size_t k = 0; k < 4; ++k) s += mask[k] * E[k];
  return {s, std::abs(s)};
}

double visibility(double c_max, double c_min) {
  if (c_max == 0.0 && c_min == 0.0) throw Degenerate("visibility of an empty fringe");
  if (!(c_max >= c_min && c_min >= 0.0))
    throw ParamOutOfRange("visibility needs c_max >= c_min >= 0");
  return (c_max - c_min) / (c_max + c_min);
}

double basis_angle_deg(Basis basis) { return basis == Basis::rect ? 0.0 : 45.0; }

const char* to_string(Basis basis) { return basis == Basis::rect ? "rect" : "diag"; }

std::vector<AngleSetting> fringe_settings(double theta2_deg, double step_deg) {
  if (!(step_deg > 0.0)) throw ParamOutOfRange("fringe step must be > 0");
  std::vector<AngleSetting> out;
  const auto n = static_cast<int>(std::ceil(180.0 / step_deg - 1e-9));
  for (int i = 0; i < n; ++i) out.push_back({i * step_deg, theta2_deg});
  return out;
}

double visibility_in_basis(const TwoPhotonState& state, Basis basis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : fringe_settings(basis_angle_deg(basis), kFringeStepDeg)) {
    const double p = std::max(0.0, coincidence_probability(state, s));
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  if (hi <= 0.0) return 0.0;
  return visibility(hi, lo);
}

double accidental_rate(double singles1_hz, double singles2_hz, double window_ns) {
  require_nonnegative(singles1_hz, "singles1");
  require_nonnegative(singles2_hz, "singles2");
  require_nonnegative(window_ns, "coincidence window");
  return singles1_hz * singles2_hz * window_ns * 1e-9;
}

NetCount subtract_accidentals(const CountRecord& record, double window_ns) {
  const double acc = accidental_rate(record.singles1_hz, record.singles2_hz, window_ns) * record.duration_s;
  const double net = record.coincidences - acc;
  if (net < 0.0) return {0.0, true};
  return {net, false};
}

ExpectedCounts expected_counts(const ExperimentModel& model, const AngleSetting& setting,
                               double duration_s) {
  model.validate();
  if (!(duration_s > 0.0)) throw ParamOutOfRange("duration must be > 0");
  const auto& d1 = model.detectors[0];
  const auto& d2 = model.detectors[1];
  const double pairs = model.pair_rate_per_mw * model.pump_power_mw;
  const double eta1 = model.arm_transmissions[0] * d1.efficiency;
  const double eta2 = model.arm_transmissions[1] * d2.efficiency;

  const auto [m1, m2] = marginal_probabilities(model.state, setting.theta1_deg, setting.theta2_deg);
  const double p12 = coincidence_probability(model.state, setting);

  ExpectedCounts out;
  out.singles1_hz = pairs * eta1 * m1 + d1.dark_rate_hz;
  out.singles2_hz = pairs * eta2 * m2 + d2.dark_rate_hz;
  out.true_coincidences = pairs * eta1 * eta2 * p12 * duration_s;
  out.accidental_coincidences =
      accidental_rate(out.singles1_hz, out.singles2_hz, d2.gate_window_ns) * duration_s;
  out.coincidences = out.true_coincidences + out.accidental_coincidences;
  return out;
}

namespace {

double poisson_draw(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(rng));
}

}  // namespace

std::vector<CountRecord> simulate_counts(const ExperimentModel& model,
                                         std::span<const AngleSetting> settings,
                                         double duration_s, std::uint64_t seed) {
  model.validate();
  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const auto mean = expected_counts(model, settings[i], duration_s);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::mt19937_64 rng(seq);
    CountRecord r;
    r.setting = settings[i];
    r.duration_s = duration_s;
    r.coincidences = poisson_draw(rng, mean.coincidences);
    r.singles1_hz = poisson_draw(rng, mean.singles1_hz * duration_s) / duration_s;
    r.singles2_hz = poisson_draw(rng, mean.singles2_hz * duration_s) / duration_s;
    out.push_back(r);
  }
  return out;
}

double fringe_ratio(const ExperimentModel& model, Basis basis, double duration_s) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& s : fringe_settings(basis_angle_deg(basis), kFringeStepDeg)) {
    const double c = expected_counts(model, s, duration_s).coincidences;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  if (!(lo > 0.0)) throw ZeroDenominator("fringe minimum is zero; ratio undefined");
  return hi / lo;
}

}  // namespace ktpent
