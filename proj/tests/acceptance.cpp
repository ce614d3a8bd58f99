// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "ktpent/chsh_analysis.hpp"
#include "ktpent/commands.hpp"
#include "ktpent/config_io.hpp"
#include "ktpent/errors.hpp"
#include "ktpent/phase_matching.hpp"
#include "ktpent/source_budget.hpp"

using namespace ktpent;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title, double runtime_limit_s,
            const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream time;
  time.precision(3);
  time << elapsed << " s";
  if (runtime_limit_s > 0) {
    time << " (limit " << runtime_limit_s << " s)";
    if (elapsed > runtime_limit_s) {
      o.pass = false;
      o.detail += "; runtime exceeded";
    }
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << title << ": " << o.detail << " ["
            << time.str() << "]\n";
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << x;
  return os.str();
}

const CrystalSpec& crystal() {
  static const CrystalSpec c = default_crystal();
  return c;
}

Outcome epm_anchor() {
  const auto epm = find_epm_pump(crystal());
  const double p = epm.point.pump_wavelength_nm;
  return {std::abs(p - 792.0) <= 3.0, "pump " + fmt(p, 3) + " nm (target 792 +- 3)"};
}

Outcome turning_point() {
  const auto pm = pm_temperature_curve(crystal(), {1540.0, 1600.0}, 1.0);
  const auto tp = pm_curve_extremum(crystal(), pm.curve);
  const double asym = turning_point_asymmetry(crystal(), tp, 15.0);
  const bool ok = std::abs(tp.fundamental_nm - 1584.0) <= 5.0 && asym <= 2.0;
  return {ok, "extremum " + fmt(tp.fundamental_nm, 3) + " nm (target 1584 +- 5), asymmetry over +-15 nm " +
                  fmt(asym, 3) + " C (limit 2)"};
}

Outcome table_temperatures() {
  const std::pair<double, double> rows[] = {{770.266, 58.0}, {780.457, 23.1}, {790.412, 12.1}};
  bool ok = true;
  std::string detail;
  for (const auto& [pump, target] : rows) {
    const double t = degenerate_pm_temperature(crystal(), pump);
    ok = ok && std::abs(t - target) <= 3.0;
    detail += (detail.empty() ? "" : ", ") + fmt(pump, 3) + " nm -> " + fmt(t, 2) + " C (target " +
              fmt(target, 1) + " +- 3)";
  }
  return {ok, detail};
}

Outcome shg_bandwidth() {
  // The half-maximum points fall outside the crystal's operating range, so
  // the width is taken on a copy with the temperature limits relaxed.
  const auto relaxed = crystal()
                           .with_temperature_bounds({-200.0, 300.0})
                           .with_model_validity({0.35, 2.0}, {-200.0, 300.0});
  const double w = shg_temperature_fwhm(relaxed, 1550.0, {-200.0, 300.0});
  return {std::abs(w - 80.0) <= 15.0, "FWHM " + fmt(w, 2) + " C (target 80 +- 15)"};
}

Outcome spdc_bandwidth() {
  const double t = degenerate_pm_temperature(crystal(), 780.0);
  const double w = spdc_bandwidth_fwhm(crystal(), 780.0, t);
  return {std::abs(w - 2.0) <= 0.5, "FWHM " + fmt(w, 3) + " nm at " + fmt(t, 2) + " C (target 2.0 +- 0.5)"};
}

double model_S(const TwoPhotonState& state) {
  ChshCounts counts{};
  const auto terms = chsh_term_settings();
  for (std::size_t k = 0; k < 4; ++k)
    counts[k] = {coincidence_probability(state, terms[k][0]), coincidence_probability(state, terms[k][1]),
                 coincidence_probability(state, terms[k][2]), coincidence_probability(state, terms[k][3])};
  return chsh_from_counts(counts).S;
}

Outcome chsh_ideal() {
  const double s = model_S(ideal_post_selected_state());
  const double target = 2 * std::numbers::sqrt2;
  return {std::abs(s - target) <= 1e-9, "|S| = " + fmt(s, 12) + " (target 2 sqrt 2 +- 1e-9)"};
}

Outcome chsh_threshold() {
  const double s = model_S(dephased_state(1.0 / std::numbers::sqrt2, 0.0));
  return {std::abs(s - 2.0) <= 1e-9, "|S| = " + fmt(s, 12) + " at coherence 1/sqrt 2 (target 2 +- 1e-9)"};
}

Outcome coincidence_law() {
  const auto s = ideal_post_selected_state();
  std::mt19937_64 rng(20240521);
  std::uniform_real_distribution<double> angle(-180.0, 180.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t1 = angle(rng), t2 = angle(rng);
    const double closed = 0.5 * std::pow(std::sin((t1 + t2) * std::numbers::pi / 180.0), 2);
    worst = std::max(worst, std::abs(coincidence_probability(s, {t1, t2}) - closed));
  }
  std::ostringstream os;
  os << "max deviation " << worst << " on 100 random pairs (limit 1e-12)";
  return {worst <= 1e-12, os.str()};
}

Outcome loss_arithmetic() {
  const auto t = chain_transmission({{{"filters", 1.6}, {"fiber_coupling", 4.95}}});
  const bool ok = std::abs(t.total_db - 6.55) < 1e-12 && std::abs(t.transmission - 0.2213) <= 5e-4;
  return {ok, fmt(t.total_db, 2) + " dB, transmission " + fmt(t.transmission, 5) + " (target 0.2213 +- 5e-4)"};
}

Outcome monte_carlo() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ktpent_acceptance";
  fs::create_directories(dir);
  cli::BellSimOptions o;  // paper-scale defaults, 200 s per setting
  o.common.seed = 1;
  o.common.out = (dir / "bell_counts.csv").string();
  o.report = (dir / "bell_report.json").string();
  std::ostringstream out, log;
  cli::run_bell_sim(o, out, log);
  const Json rep = read_json_file(o.report);

  const double s = rep["S"].get<double>();
  const double sig = rep["significance"].get<double>();
  const auto singles = rep["model"]["expected_singles_hz"];
  bool singles_ok = true;
  for (const auto& x : singles) singles_ok = singles_ok && x.get<double>() >= 2000.0 && x.get<double>() <= 2700.0;

  bool vis_ok = true;
  std::string vis;
  for (const char* basis : {"rect", "diag"}) {
    const auto& v = rep["visibility"][basis];
    const double raw = v["raw"].get<double>(), net = v["accidental_subtracted"].get<double>();
    vis_ok = vis_ok && net >= raw;
    vis += std::string(", V_") + basis + " raw " + fmt(raw, 4) + " net " + fmt(net, 4);
  }
  const bool ok = singles_ok && s >= 2.5 && s <= 2 * std::numbers::sqrt2 && sig > 5.0 && vis_ok;
  return {ok, "|S| = " + fmt(s, 3) + " +- " + fmt(rep["sigma_S"].get<double>(), 3) + " (" + fmt(sig, 1) +
                  " sigma; band [2.5, 2.828], > 5 sigma), singles " + fmt(singles[0].get<double>(), 0) + "/" +
                  fmt(singles[1].get<double>(), 0) + " Hz" + vis};
}

Outcome power_trend() {
  cli::BellSimOptions o;
  std::string detail;
  bool ok = true;
  for (Basis b : {Basis::rect, Basis::diag}) {
    double prev = std::numeric_limits<double>::infinity();
    detail += std::string(detail.empty() ? "" : "; ") + to_string(b) + ":";
    for (double p : {50.0, 100.0, 200.0, 400.0}) {
      o.pump_power_mw = p;
      const double r = fringe_ratio(cli::build_experiment(o), b, o.duration_s);
      ok = ok && r < prev;
      prev = r;
      detail += " " + fmt(r, 1);
    }
  }
  return {ok, "max/min ratio at 50/100/200/400 mW " + detail};
}

}  // namespace

int main() {
  std::cout << "ktpent acceptance\n";
  report("1", "EPM anchor", 1.0, epm_anchor);
  report("2", "turning point", 5.0, turning_point);
  report("3", "tabulated phase-match temperatures", 0, table_temperatures);
  report("4", "SHG temperature bandwidth", 0, shg_bandwidth);
  report("5", "SPDC bandwidth", 0, spdc_bandwidth);
  report("6a", "CHSH ideal state", 0, chsh_ideal);
  report("6b", "CHSH at coherence 1/sqrt 2", 0, chsh_threshold);
  report("7", "coincidence law", 0, coincidence_law);
  report("8", "loss arithmetic", 0, loss_arithmetic);
  report("9", "Monte Carlo consistency", 30.0, monte_carlo);
  report("10", "power trend", 0, power_trend);
  std::cout << "INFO 11 excluded: exact measured visibilities, per-wavelength sigma values and the "
               "absolute brightness are not reproducible without the raw counts; covered by the "
               "consistency band (9) and the rate-estimate back-solve table\n";
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
