#include "ktpent/chsh_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ktpent/errors.hpp"

namespace ktpent {

std::array<std::array<AngleSetting, 4>, 4> chsh_term_settings(const ChshAngles& g) {
  const auto term = [](double t1, double t1p, double t2, double t2p) {
    return std::array<AngleSetting, 4>{AngleSetting{t1, t2}, AngleSetting{t1p, t2p},
                                       AngleSetting{t1, t2p}, AngleSetting{t1p, t2}};
  };
  return {term(g.a, g.a_perp, g.b, g.b_perp), term(g.a_prime, g.a_prime_perp, g.b, g.b_perp),
          term(g.a, g.a_perp, g.b_prime, g.b_prime_perp),
          term(g.a_prime, g.a_prime_perp, g.b_prime, g.b_prime_perp)};
}

std::vector<AngleSetting> chsh_settings(const ChshAngles& angles) {
  std::vector<AngleSetting> out;
  for (const auto& term : chsh_term_settings(angles)) {
    for (const auto& s : term) {
      const bool seen = std::any_of(out.begin(), out.end(),
                                    [&](const AngleSetting& o) { return same_setting(o, s); });
      if (!seen) out.push_back(s);
    }
  }
  return out;
}

namespace {

double variance_E(const CorrelationCounts& c, const CorrelationCounts& var, double E) {
  const double n = c.total();
  return ((1.0 - E) * (1.0 - E) * (var.pp + var.tt) + (1.0 + E) * (1.0 + E) * (var.pt + var.tp)) /
         (n * n);
}

double significance_of(double s_abs, double sigma) {
  if (sigma > 0.0) return (s_abs - 2.0) / sigma;
  if (s_abs > 2.0) return std::numeric_limits<double>::infinity();
  if (s_abs < 2.0) return -std::numeric_limits<double>::infinity();
  return 0.0;
}

}  // namespace

double s_uncertainty(const ChshCounts& counts) { return chsh_from_counts(counts).sigma_S; }

ChshResult chsh_from_counts(const ChshCounts& counts, const SignMask& mask,
                            const ChshCounts* variances) {
  const ChshCounts& var = variances ? *variances : counts;
  ChshResult r;
  double var_s = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& c = counts[k];
    r.E[k] = correlation_E(c.pp, c.tt, c.pt, c.tp);
    const double v = variance_E(c, var[k], r.E[k]);
    r.sigma_E[k] = std::sqrt(v);
    var_s += v;
  }
  const auto s = chsh_S(r.E, mask);
  r.S = s.magnitude;
  r.S_signed = s.signed_sum;
  r.sigma_S = std::sqrt(var_s);
  r.significance = significance_of(r.S, r.sigma_S);
  return r;
}

double dark_coincidence_rate(double singles1_hz, double singles2_hz, double dark1_hz,
                             double dark2_hz, double window_ns) {
  const double d1 = std::min(dark1_hz, singles1_hz);
  const double d2 = std::min(dark2_hz, singles2_hz);
  return (d1 * singles2_hz + singles1_hz * d2 - d1 * d2) * window_ns * 1e-9;
}

namespace {

struct RowValues {
  double raw = 0.0;
  double net_acc = 0.0;
  double net_dark = 0.0;
};

RowValues row_values(const CountRecord& r, const AnalysisOptions& o, bool& clamped) {
  r.validate();
  RowValues v;
  v.raw = r.coincidences;
  const auto net = subtract_accidentals(r, o.window_ns);
  v.net_acc = net.value;
  clamped = net.clamped;
  const double dark = dark_coincidence_rate(r.singles1_hz, r.singles2_hz, o.dark_rate1_hz,
                                            o.dark_rate2_hz, o.window_ns) *
                      r.duration_s;
  v.net_dark = std::max(0.0, r.coincidences - dark);
  return v;
}

std::string format_setting(const AngleSetting& s) {
  std::ostringstream os;
  os << "(" << s.theta1_deg << ", " << s.theta2_deg << ")";
  return os.str();
}

BasisVisibility fringe_visibility(std::span<const CountRecord> records, const AnalysisOptions& o,
                                  Basis basis) {
  BasisVisibility out;
  const double target = basis_angle_deg(basis);
  double raw_max = -1, raw_min = std::numeric_limits<double>::infinity();
  double acc_max = -1, acc_min = raw_min;
  double dark_max = -1, dark_min = raw_min;
  for (const auto& r : records) {
    if (!same_setting({0.0, r.setting.theta2_deg}, {0.0, target})) continue;
    bool clamped = false;
    const auto v = row_values(r, o, clamped);
    // Rates, so rows with different durations remain comparable.
    const double t = r.duration_s;
    raw_max = std::max(raw_max, v.raw / t);
    raw_min = std::min(raw_min, v.raw / t);
    acc_max = std::max(acc_max, v.net_acc / t);
    acc_min = std::min(acc_min, v.net_acc / t);
    dark_max = std::max(dark_max, v.net_dark / t);
    dark_min = std::min(dark_min, v.net_dark / t);
    ++out.rows;
  }
  if (out.rows < 2) return out;
  const auto safe = [](double hi, double lo) -> std::optional<double> {
    if (hi <= 0.0) return std::nullopt;
    return visibility(hi, lo);
  };
  out.raw = safe(raw_max, raw_min);
  out.net_accidental = safe(acc_max, acc_min);
  out.net_dark = safe(dark_max, dark_min);
  return out;
}

}  // namespace

ChshAnalysis analyze_records(std::span<const CountRecord> records, const AnalysisOptions& o) {
  const auto terms = chsh_term_settings(o.angles);

  ChshCounts raw{}, acc{}, dark{};
  std::vector<std::string> missing;
  ChshAnalysis out;
  out.rows = records.size();

  std::vector<RowValues> values(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool clamped = false;
    values[i] = row_values(records[i], o, clamped);
    if (clamped) ++out.clamped_rows;
  }

  for (std::size_t k = 0; k < 4; ++k) {
    std::array<RowValues, 4> sums{};
    for (std::size_t j = 0; j < 4; ++j) {
      bool found = false;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (!same_setting(records[i].setting, terms[k][j])) continue;
        found = true;
        sums[j].raw += values[i].raw;
        sums[j].net_acc += values[i].net_acc;
        sums[j].net_dark += values[i].net_dark;
      }
      if (!found) {
        const auto label = format_setting(terms[k][j]);
        if (std::find(missing.begin(), missing.end(), label) == missing.end())
          missing.push_back(label);
      }
    }
    raw[k] = {sums[0].raw, sums[1].raw, sums[2].raw, sums[3].raw};
    acc[k] = {sums[0].net_acc, sums[1].net_acc, sums[2].net_acc, sums[3].net_acc};
    dark[k] = {sums[0].net_dark, sums[1].net_dark, sums[2].net_dark, sums[3].net_dark};
  }

  if (!missing.empty()) {
    std::string msg = "missing CHSH settings (theta1, theta2):";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }

  out.raw = chsh_from_counts(raw, o.mask);
  out.net_accidental = chsh_from_counts(acc, o.mask, &raw);
  out.net_dark = chsh_from_counts(dark, o.mask, &raw);
  out.rect = fringe_visibility(records, o, Basis::rect);
  out.diag = fringe_visibility(records, o, Basis::diag);
  return out;
}

}  // namespace ktpent
