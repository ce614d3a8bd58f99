#include "ktpent/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "ktpent/count_records.hpp"
#include "ktpent/errors.hpp"
#include "ktpent/version.hpp"

namespace ktpent::cli {

namespace {

// Reads optional keys from a config object and rejects anything it was not
// asked about once `finish` is called.
class ConfigFields {
 public:
  ConfigFields(const Json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) throw ValidationError(ctx_ + ": config must be a JSON object");
  }

  template <class T>
  void get(const std::string& key, T& target) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      target = it->template get<T>();
    } catch (const Json::exception& e) {
      throw ValidationError(ctx_ + ": key '" + key + "' has the wrong type (" + e.what() + ")");
    }
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& target) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      target.reset();
      return;
    }
    T value{};
    get(key, value);
    target = value;
  }

  const Json* raw(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!seen_.count(key)) throw ValidationError(ctx_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const Json& j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

void read_common(ConfigFields& f, CommonOptions& c) {
  f.get("crystal", c.crystal_path);
  f.get("poling_period_um", c.poling_period_um);
  f.get("out", c.out);
  f.get("seed", c.seed);
}

Json common_json(const CommonOptions& c) {
  Json j = {{"crystal", c.crystal_path}, {"out", c.out}, {"seed", c.seed}};
  j["poling_period_um"] = c.poling_period_um ? Json(*c.poling_period_um) : Json(nullptr);
  return j;
}

void read_detector(const Json& j, DetectorModel& d, const std::string& ctx) {
  ConfigFields f(j, ctx);
  f.get("efficiency", d.efficiency);
  f.get("dark_rate_hz", d.dark_rate_hz);
  f.get("gate_window_ns", d.gate_window_ns);
  f.get("trigger_rate_hz", d.trigger_rate_hz);
  f.finish();
}

Json detector_json(const DetectorModel& d) {
  return {{"efficiency", d.efficiency},
          {"dark_rate_hz", d.dark_rate_hz},
          {"gate_window_ns", d.gate_window_ns},
          {"trigger_rate_hz", d.trigger_rate_hz}};
}

/// JSON cannot carry inf/NaN; they become null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json optional_number(const std::optional<double>& x) {
  return x ? number_or_null(*x) : Json(nullptr);
}

struct Provenance {
  std::string command;
  std::string config_hash;
  std::uint64_t seed;

  std::vector<std::string> comments() const {
    return {std::string("tool: ktpent ") + kVersion, "command: " + command,
            "config_hash: " + config_hash, "seed: " + std::to_string(seed)};
  }

  Json json() const {
    return {{"tool", "ktpent"},
            {"version", kVersion},
            {"command", command},
            {"config_hash", config_hash},
            {"seed", seed}};
  }
};

// The hash covers what is computed, not where it is written, so the same run
// sent to two different files carries the same header.
Provenance provenance(const std::string& command, Json options, std::uint64_t seed) {
  options.erase("out");
  options.erase("report");
  return {command, fnv1a_hex(options.dump()), seed};
}

void emit(const std::string& text, const std::string& path, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    if (!fallback) throw IoError("failed writing to output stream");
  } else {
    write_text_file(path, text);
  }
}

std::string format_nm(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

}  // namespace

std::array<double, 2> BellSimOptions::default_arm_transmissions() {
  const double collection = db_to_transmission(1.6 + 4.95);
  return {collection * db_to_transmission(0.31) * 0.5, collection * db_to_transmission(0.66) * 0.5};
}

// ---------------------------------------------------------------- config

void apply_config(PmCurveOptions& o, const Json& j) {
  ConfigFields f(j, "pm-curve config");
  read_common(f, o.common);
  f.get("from_nm", o.from_nm);
  f.get("to_nm", o.to_nm);
  f.get("step_nm", o.step_nm);
  f.finish();
}

void apply_config(ShgSweepOptions& o, const Json& j) {
  ConfigFields f(j, "shg-sweep config");
  read_common(f, o.common);
  f.get("wavelengths_nm", o.wavelengths_nm);
  f.get("t_from_c", o.t_from_c);
  f.get("t_to_c", o.t_to_c);
  f.get("t_step_c", o.t_step_c);
  f.finish();
}

void apply_config(EpmFindOptions& o, const Json& j) {
  ConfigFields f(j, "epm-find config");
  read_common(f, o.common);
  f.get("search_from_nm", o.search_from_nm);
  f.get("search_to_nm", o.search_to_nm);
  f.finish();
}

void apply_config(BellSimOptions& o, const Json& j) {
  ConfigFields f(j, "bell-sim config");
  read_common(f, o.common);
  f.get("coherence", o.coherence);
  f.get("imbalance", o.imbalance);
  f.get("pair_rate_per_mw", o.pair_rate_per_mw);
  f.get("pump_power_mw", o.pump_power_mw);
  f.get("arm_transmissions", o.arm_transmissions);
  if (const Json* d = f.raw("detector1")) read_detector(*d, o.detectors[0], "bell-sim config detector1");
  if (const Json* d = f.raw("detector2")) read_detector(*d, o.detectors[1], "bell-sim config detector2");
  f.get("duration_s", o.duration_s);
  f.get("fringe_step_deg", o.fringe_step_deg);
  f.get("report", o.report);
  f.get("power_sweep_mw", o.power_sweep_mw);
  f.finish();
}

void apply_config(ChshAnalyzeOptions& o, const Json& j) {
  ConfigFields f(j, "chsh-analyze config");
  read_common(f, o.common);
  f.get("input", o.input);
  f.get("window_ns", o.window_ns);
  f.get("dark_rate1_hz", o.dark_rate1_hz);
  f.get("dark_rate2_hz", o.dark_rate2_hz);
  f.get("sign_mask", o.mask);
  f.finish();
}

void apply_config(RateEstimateOptions& o, const Json& j) {
  ConfigFields f(j, "rate-estimate config");
  read_common(f, o.common);
  f.get("pump_power_mw", o.pump_power_mw);
  f.get("bandwidth_nm", o.bandwidth_nm);
  f.get("bandwidth_from_crystal", o.bandwidth_from_crystal);
  f.get("bandwidth_pump_nm", o.bandwidth_pump_nm);
  if (const Json* c = f.raw("collection")) o.collection = loss_chain_from_json(*c);
  if (const Json* c = f.raw("arm1")) o.arm1 = loss_chain_from_json(*c);
  if (const Json* c = f.raw("arm2")) o.arm2 = loss_chain_from_json(*c);
  f.get("detector_efficiency1", o.detector_efficiency1);
  f.get("detector_efficiency2", o.detector_efficiency2);
  f.get("detected_rate_hz", o.detected_rate_hz);
  f.get("target_brightness", o.target_brightness);
  f.get("reference_detected_rate_hz", o.reference_detected_rate_hz);
  if (const Json* a = f.raw("accounting")) {
    ConfigFields af(*a, "rate-estimate config accounting");
    af.get("both_arm_losses", o.accounting.both_arm_losses);
    af.get("beam_splitter_half", o.accounting.beam_splitter_half);
    af.get("both_detector_efficiencies", o.accounting.both_detector_efficiencies);
    af.finish();
  }
  f.finish();
}

Json to_json(const PmCurveOptions& o) {
  Json j = common_json(o.common);
  j.update({{"from_nm", o.from_nm}, {"to_nm", o.to_nm}, {"step_nm", o.step_nm}});
  return j;
}

Json to_json(const ShgSweepOptions& o) {
  Json j = common_json(o.common);
  j.update({{"wavelengths_nm", o.wavelengths_nm},
            {"t_from_c", optional_number(o.t_from_c)},
            {"t_to_c", optional_number(o.t_to_c)},
            {"t_step_c", o.t_step_c}});
  return j;
}

Json to_json(const EpmFindOptions& o) {
  Json j = common_json(o.common);
  j.update({{"search_from_nm", o.search_from_nm}, {"search_to_nm", o.search_to_nm}});
  return j;
}

Json to_json(const BellSimOptions& o) {
  Json j = common_json(o.common);
  j.update({{"coherence", o.coherence},
            {"imbalance", o.imbalance},
            {"pair_rate_per_mw", o.pair_rate_per_mw},
            {"pump_power_mw", o.pump_power_mw},
            {"arm_transmissions", o.arm_transmissions},
            {"detector1", detector_json(o.detectors[0])},
            {"detector2", detector_json(o.detectors[1])},
            {"duration_s", o.duration_s},
            {"fringe_step_deg", o.fringe_step_deg},
            {"report", o.report},
            {"power_sweep_mw", o.power_sweep_mw}});
  return j;
}

Json to_json(const ChshAnalyzeOptions& o) {
  Json j = common_json(o.common);
  j.update({{"input", o.input},
            {"window_ns", o.window_ns},
            {"dark_rate1_hz", o.dark_rate1_hz},
            {"dark_rate2_hz", o.dark_rate2_hz},
            {"sign_mask", o.mask}});
  return j;
}

Json to_json(const RateEstimateOptions& o) {
  Json j = common_json(o.common);
  j.update({{"pump_power_mw", o.pump_power_mw},
            {"bandwidth_nm", o.bandwidth_nm},
            {"bandwidth_from_crystal", o.bandwidth_from_crystal},
            {"bandwidth_pump_nm", o.bandwidth_pump_nm},
            {"collection", to_json(o.collection)},
            {"arm1", to_json(o.arm1)},
            {"arm2", to_json(o.arm2)},
            {"detector_efficiency1", o.detector_efficiency1},
            {"detector_efficiency2", o.detector_efficiency2},
            {"detected_rate_hz", optional_number(o.detected_rate_hz)},
            {"target_brightness", o.target_brightness},
            {"reference_detected_rate_hz", optional_number(o.reference_detected_rate_hz)},
            {"accounting",
             {{"both_arm_losses", o.accounting.both_arm_losses},
              {"beam_splitter_half", o.accounting.beam_splitter_half},
              {"both_detector_efficiencies", o.accounting.both_detector_efficiencies}}}});
  return j;
}

// ---------------------------------------------------------------- shared

CrystalSpec resolve_crystal(const CommonOptions& common) {
  CrystalSpec c = common.crystal_path.empty() ? default_crystal() : load_crystal_file(common.crystal_path);
  if (common.poling_period_um) c = c.with_poling_period_um(*common.poling_period_um);
  return c;
}

ExperimentModel build_experiment(const BellSimOptions& o) {
  ExperimentModel m{dephased_state(o.coherence, o.imbalance), o.pair_rate_per_mw, o.pump_power_mw,
                    o.arm_transmissions, o.detectors};
  m.validate();
  return m;
}

namespace {

Json result_json(const ChshResult& r) {
  static constexpr const char* kTerms[4] = {"E(a,b)", "E(a',b)", "E(a,b')", "E(a',b')"};
  Json e = Json::object();
  Json se = Json::object();
  for (std::size_t k = 0; k < 4; ++k) {
    e[kTerms[k]] = number_or_null(r.E[k]);
    se[kTerms[k]] = number_or_null(r.sigma_E[k]);
  }
  return {{"S", number_or_null(r.S)},
          {"S_signed", number_or_null(r.S_signed)},
          {"sigma_S", number_or_null(r.sigma_S)},
          {"significance", number_or_null(r.significance)},
          {"E", e},
          {"sigma_E", se}};
}

Json visibility_json(const BasisVisibility& v) {
  return {{"raw", optional_number(v.raw)},
          {"accidental_subtracted", optional_number(v.net_accidental)},
          {"dark_subtracted", optional_number(v.net_dark)},
          {"rows", v.rows}};
}

}  // namespace

Json analysis_report(const ChshAnalysis& a) {
  Json j = result_json(a.raw);
  j["variants"] = {{"raw", result_json(a.raw)},
                   {"accidental_subtracted", result_json(a.net_accidental)},
                   {"dark_subtracted", result_json(a.net_dark)}};
  j["visibility"] = {{"rect", visibility_json(a.rect)}, {"diag", visibility_json(a.diag)}};
  j["rows"] = a.rows;
  j["clamped_rows"] = a.clamped_rows;
  return j;
}

// ---------------------------------------------------------------- pm-curve

int run_pm_curve(const PmCurveOptions& o, std::ostream& out, std::ostream& log) {
  // Range checks come before loading anything.
  if (!std::isfinite(o.from_nm) || !std::isfinite(o.to_nm) || o.to_nm <= o.from_nm)
    throw ValidationError("wavelength range [" + format_nm(o.from_nm) + ", " + format_nm(o.to_nm) +
                          "] nm must satisfy from < to");
  if (!(o.step_nm > 0.0)) throw ValidationError("step_nm must be > 0");

  const CrystalSpec crystal = resolve_crystal(o.common);
  const auto prov = provenance("pm-curve", to_json(o), o.common.seed);
  const PmCurve pm = pm_temperature_curve(crystal, {o.from_nm, o.to_nm}, o.step_nm);

  std::ostringstream csv;
  write_curve_csv(csv, pm.curve, prov.comments());
  emit(csv.str(), o.common.out, out);

  log << "pm-curve: " << pm.curve.size() << " points";
  if (!pm.omitted_nm.empty()) {
    log << ", omitted (no phase match in crystal bounds):";
    for (double x : pm.omitted_nm) log << ' ' << x;
  }
  log << '\n';
  try {
    const TurningPoint tp = pm_curve_extremum(crystal, pm.curve);
    log << std::fixed << std::setprecision(3) << "turning point: " << tp.fundamental_nm << " nm at "
        << tp.temperature_c << " C (" << (tp.is_minimum ? "minimum" : "maximum") << ")\n";
    try {
      log << "asymmetry over +-15 nm: " << turning_point_asymmetry(crystal, tp, 15.0) << " C\n";
    } catch (const Error& e) {
      log << "asymmetry over +-15 nm: unavailable (" << e.what() << ")\n";
    }
    log.unsetf(std::ios::floatfield);
  } catch (const NoSolutionInRange& e) {
    log << "turning point: none (" << e.what() << ")\n";
  }
  return kOk;
}

// ---------------------------------------------------------------- shg-sweep

int run_shg_sweep(const ShgSweepOptions& o, std::ostream& out, std::ostream& log) {
  if (o.wavelengths_nm.empty()) throw ValidationError("at least one fundamental wavelength is required");
  if (!(o.t_step_c > 0.0)) throw ValidationError("t_step_c must be > 0");
  const CrystalSpec crystal = resolve_crystal(o.common);
  const Interval window{o.t_from_c.value_or(crystal.temperature_bounds_c().lo),
                        o.t_to_c.value_or(crystal.temperature_bounds_c().hi)};
  if (!(window.hi > window.lo)) throw ValidationError("temperature range must satisfy from < to");

  const auto prov = provenance("shg-sweep", to_json(o), o.common.seed);
  const std::filesystem::path dir = o.common.out.empty() ? "." : o.common.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  // The half-maximum crossings may fall outside the sweep; the continuous
  // width is then found on a copy with the temperature limits relaxed.
  const CrystalSpec relaxed = crystal.with_temperature_bounds({-200.0, 300.0})
                                  .with_model_validity({0.35, 2.0}, {-200.0, 300.0});
  Json summary = Json::array();
  for (double lam : o.wavelengths_nm) {
    const TuningCurve curve = shg_power_curve(crystal, lam, window, o.t_step_c);
    auto comments = prov.comments();
    comments.push_back("fundamental_nm: " + format_nm(lam));
    std::ostringstream csv;
    write_curve_csv(csv, curve, comments);
    const auto path = dir / ("shg_" + format_nm(lam) + "nm.csv");
    write_text_file(path, csv.str());

    Json row = {{"fundamental_nm", lam}, {"file", path.string()}};
    double peak = 0.0;
    double peak_t = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (curve.ordinate[i] > peak) {
        peak = curve.ordinate[i];
        peak_t = curve.abscissa[i];
      }
    }
    row["peak_temperature_c"] = peak_t;
    row["peak_value"] = peak;
    try {
      row["fwhm_c"] = shg_temperature_fwhm(crystal, lam, window);
      row["fwhm_extrapolated"] = false;
    } catch (const NoBracket&) {
      try {
        row["fwhm_c"] = shg_temperature_fwhm(relaxed, lam, {-200.0, 300.0});
        row["fwhm_extrapolated"] = true;
      } catch (const Error&) {
        row["fwhm_c"] = nullptr;
      }
    }
    log << "shg-sweep: " << lam << " nm -> " << path.string() << ", peak " << peak << " at "
        << peak_t << " C, FWHM ";
    if (row["fwhm_c"].is_null()) {
      log << "unavailable\n";
    } else {
      log << std::fixed << std::setprecision(2) << row["fwhm_c"].get<double>() << " C"
          << (row["fwhm_extrapolated"].get<bool>() ? " (crossings outside the sweep window)" : "")
          << '\n';
      log.unsetf(std::ios::floatfield);
      log << std::setprecision(6);
    }
    summary.push_back(row);
  }
  Json report = {{"provenance", prov.json()}, {"curves", summary}};
  out << report.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- epm-find

int run_epm_find(const EpmFindOptions& o, std::ostream& out, std::ostream& log) {
  if (!(o.search_to_nm > o.search_from_nm)) throw ValidationError("search range must satisfy from < to");
  const CrystalSpec crystal = resolve_crystal(o.common);
  const auto prov = provenance("epm-find", to_json(o), o.common.seed);
  const EpmPoint epm = find_epm_pump(crystal, {o.search_from_nm, o.search_to_nm});

  // Mismatch tolerance: what a 1 mK error in the phase-match temperature
  // leaves; group-index tolerance: what a 1 pm error in pump leaves.
  const double pump = epm.point.pump_wavelength_nm;
  const double t = epm.point.temperature_c;
  const double dk_tol = std::abs(degenerate_mismatch(crystal, pump, t + kTemperatureTolC) -
                                 degenerate_mismatch(crystal, pump, t)) * 1e3;
  Json report = {
      {"provenance", prov.json()},
      {"pump_wavelength_nm", pump},
      {"fundamental_wavelength_nm", 2.0 * pump},
      {"temperature_c", t},
      {"poling_period_um", crystal.poling_period_um()},
      {"length_mm", crystal.length_mm()},
      {"residuals",
       {{"abs_delta_k_rad_per_mm", std::abs(epm.point.residual_rad_per_mm)},
        {"abs_group_index_mismatch", std::abs(epm.group_index_mismatch)},
        {"abs_dk_domega_fs_per_mm", std::abs(epm.dk_domega_fs_per_mm)}}},
      {"tolerances",
       {{"delta_k_rad_per_mm", dk_tol},
        {"temperature_c", kTemperatureTolC},
        {"wavelength_nm", kWavelengthTolNm}}}};
  emit(report.dump(2) + "\n", o.common.out, out);
  log << std::fixed << std::setprecision(3) << "epm-find: pump " << pump << " nm at " << t << " C\n";
  log.unsetf(std::ios::floatfield);
  return kOk;
}

// ---------------------------------------------------------------- bell-sim

int run_bell_sim(const BellSimOptions& o, std::ostream& out, std::ostream& log) {
  if (!(o.duration_s > 0.0)) throw ValidationError("duration_s must be > 0");
  const auto prov = provenance("bell-sim", to_json(o), o.common.seed);

  if (!o.power_sweep_mw.empty()) {
    std::ostringstream csv;
    for (const auto& c : prov.comments()) csv << "# " << c << '\n';
    csv << "# units: mW,1,1\n";
    csv << "power_mw,ratio_rect,ratio_diag\n";
    csv << std::setprecision(17);
    for (double p : o.power_sweep_mw) {
      BellSimOptions at = o;
      at.pump_power_mw = p;
      const ExperimentModel m = build_experiment(at);
      csv << p << ',' << fringe_ratio(m, Basis::rect, o.duration_s) << ','
          << fringe_ratio(m, Basis::diag, o.duration_s) << '\n';
    }
    emit(csv.str(), o.common.out, out);
    log << "bell-sim: power sweep over " << o.power_sweep_mw.size() << " pump powers\n";
    return kOk;
  }

  const ExperimentModel model = build_experiment(o);
  std::vector<AngleSetting> settings = fringe_settings(basis_angle_deg(Basis::rect), o.fringe_step_deg);
  for (const auto& s : fringe_settings(basis_angle_deg(Basis::diag), o.fringe_step_deg))
    settings.push_back(s);
  for (const auto& s : chsh_settings()) {
    const bool dup = std::any_of(settings.begin(), settings.end(),
                                 [&](const AngleSetting& x) { return same_setting(x, s); });
    if (!dup) settings.push_back(s);
  }

  const auto records = simulate_counts(model, settings, o.duration_s, o.common.seed);
  AnalysisOptions ao;
  ao.window_ns = o.detectors[1].gate_window_ns;
  ao.dark_rate1_hz = o.detectors[0].dark_rate_hz;
  ao.dark_rate2_hz = o.detectors[1].dark_rate_hz;
  const ChshAnalysis analysis = analyze_records(records, ao);

  // Noise-free reference from the same model.
  std::vector<CountRecord> expected;
  for (const auto& s : settings) {
    const auto e = expected_counts(model, s, o.duration_s);
    expected.push_back({s, e.coincidences, e.singles1_hz, e.singles2_hz, o.duration_s});
  }
  const ChshAnalysis model_analysis = analyze_records(expected, ao);

  const std::string csv_path = o.common.out.empty() ? "bell_counts.csv" : o.common.out;
  std::ostringstream csv;
  write_count_records(csv, records, prov.comments());
  write_text_file(csv_path, csv.str());

  Json report = analysis_report(analysis);
  report["provenance"] = prov.json();
  report["counts_file"] = csv_path;
  report["model"] = {{"S_expected", model_analysis.raw.S},
                     {"S_expected_accidental_subtracted", model_analysis.net_accidental.S},
                     {"state_visibility_rect", visibility_in_basis(model.state, Basis::rect)},
                     {"state_visibility_diag", visibility_in_basis(model.state, Basis::diag)},
                     {"expected_singles_hz",
                      {expected_counts(model, {0.0, 90.0}, o.duration_s).singles1_hz,
                       expected_counts(model, {0.0, 90.0}, o.duration_s).singles2_hz}}};
  emit(report.dump(2) + "\n", o.report, out);
  log << std::fixed << std::setprecision(3) << "bell-sim: " << records.size() << " settings -> "
      << csv_path << "; |S| = " << analysis.raw.S << " +- " << analysis.raw.sigma_S << " ("
      << std::setprecision(1) << analysis.raw.significance << " sigma)\n";
  log.unsetf(std::ios::floatfield);
  return kOk;
}

// ---------------------------------------------------------------- chsh-analyze

int run_chsh_analyze(const ChshAnalyzeOptions& o, std::ostream& out, std::ostream& log) {
  if (o.input.empty()) throw ValidationError("an input count CSV is required");
  for (int s : o.mask)
    if (s != 1 && s != -1) throw ValidationError("sign mask entries must be +1 or -1");
  std::ifstream in(o.input);
  if (!in) throw IoError("cannot open '" + o.input + "'");
  std::vector<CountRecord> records;
  try {
    records = read_count_records(in);
  } catch (const ValidationError& e) {
    throw ValidationError(o.input + ": " + e.what());
  }

  AnalysisOptions ao;
  ao.mask = o.mask;
  ao.window_ns = o.window_ns;
  ao.dark_rate1_hz = o.dark_rate1_hz;
  ao.dark_rate2_hz = o.dark_rate2_hz;
  const ChshAnalysis a = analyze_records(records, ao);

  Json report = analysis_report(a);
  report["provenance"] = provenance("chsh-analyze", to_json(o), o.common.seed).json();
  report["input"] = o.input;
  emit(report.dump(2) + "\n", o.common.out, out);
  log << std::fixed << std::setprecision(4) << "chsh-analyze: |S| = " << a.raw.S << " +- "
      << a.raw.sigma_S << '\n';
  log.unsetf(std::ios::floatfield);
  return kOk;
}

// ---------------------------------------------------------------- rate-estimate

namespace {

Json chain_report(const LossChain& chain) {
  const auto t = chain_transmission(chain);
  return {{"chain", to_json(chain)}, {"total_db", t.total_db}, {"transmission", t.transmission}};
}

Json accounting_json(const BrightnessAccounting& a) {
  return {{"label", a.label()},
          {"both_arm_losses", a.both_arm_losses},
          {"beam_splitter_half", a.beam_splitter_half},
          {"both_detector_efficiencies", a.both_detector_efficiencies}};
}

}  // namespace

int run_rate_estimate(const RateEstimateOptions& o, std::ostream& out, std::ostream& log) {
  const auto prov = provenance("rate-estimate", to_json(o), o.common.seed);
  BudgetInputs in;
  in.pump_power_mw = o.pump_power_mw;
  in.chain1 = o.collection.concat(o.arm1);
  in.chain2 = o.collection.concat(o.arm2);
  in.detector1.efficiency = o.detector_efficiency1;
  in.detector2.efficiency = o.detector_efficiency2;

  std::string bandwidth_source = "config";
  in.bandwidth_nm = o.bandwidth_nm;
  if (o.bandwidth_from_crystal) {
    const CrystalSpec crystal = resolve_crystal(o.common);
    const double t = degenerate_pm_temperature(crystal, o.bandwidth_pump_nm);
    in.bandwidth_nm = spdc_bandwidth_fwhm(crystal, o.bandwidth_pump_nm, t);
    bandwidth_source = "crystal";
  }

  Json report = {{"provenance", prov.json()},
                 {"collection", chain_report(o.collection)},
                 {"arm1", chain_report(in.chain1)},
                 {"arm2", chain_report(in.chain2)},
                 {"pump_power_mw", in.pump_power_mw},
                 {"bandwidth_nm", in.bandwidth_nm},
                 {"bandwidth_source", bandwidth_source},
                 {"detector_efficiencies", {o.detector_efficiency1, o.detector_efficiency2}},
                 {"accounting", accounting_json(o.accounting)},
                 {"target_brightness", o.target_brightness}};

  double brightness = o.target_brightness;
  if (o.detected_rate_hz) {
    const auto est = brightness_from_detected(*o.detected_rate_hz, in, o.accounting);
    Json divisors = Json::array();
    for (const auto& d : est.assumptions) divisors.push_back({{"label", d.label}, {"value", d.value}});
    report["estimate"] = {{"detected_rate_hz", est.detected_rate_hz},
                          {"brightness", est.rate},
                          {"divisors", divisors}};
    brightness = est.rate;
  } else {
    report["estimate"] = nullptr;
  }

  const double predicted = predicted_detected_rate(brightness, in, o.accounting);
  const double recovered = brightness_from_detected(predicted, in, o.accounting).rate;
  report["round_trip"] = {{"brightness", brightness},
                          {"predicted_detected_rate_hz", predicted},
                          {"recovered_brightness", recovered},
                          {"relative_error", std::abs(recovered - brightness) / brightness}};

  Json variants = Json::array();
  std::optional<std::pair<double, std::string>> closest;
  for (const auto& v : accounting_variants()) {
    Json row = accounting_json(v);
    const double implied = predicted_detected_rate(o.target_brightness, in, v);
    row["implied_detected_rate_hz"] = implied;
    if (o.detected_rate_hz) row["brightness"] = brightness_from_detected(*o.detected_rate_hz, in, v).rate;
    if (o.reference_detected_rate_hz) {
      const double miss = std::abs(std::log(implied / *o.reference_detected_rate_hz));
      if (!closest || miss < closest->first) closest = std::make_pair(miss, v.label());
    }
    variants.push_back(row);
  }
  report["variants"] = variants;
  report["reference_detected_rate_hz"] = optional_number(o.reference_detected_rate_hz);
  report["closest_variant"] = closest ? Json(closest->second) : Json(nullptr);

  emit(report.dump(2) + "\n", o.common.out, out);
  const auto coll = chain_transmission(o.collection);
  log << std::fixed << std::setprecision(4) << "rate-estimate: collection " << coll.total_db
      << " dB (T = " << coll.transmission << "); target " << std::setprecision(0)
      << o.target_brightness << " implies " << std::setprecision(3)
      << predicted_detected_rate(o.target_brightness, in, o.accounting)
      << " detected pairs/s under " << o.accounting.label() << '\n';
  log.unsetf(std::ios::floatfield);
  return kOk;
}

// ---------------------------------------------------------------- errors

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.error_class()) {
      case ErrorClass::validation: return kValidation;
      case ErrorClass::solver: return kSolver;
      case ErrorClass::io: return kIo;
    }
    return kValidation;
  } catch (const Json::exception& e) {
    err << "error: ValidationError: " << e.what() << '\n';
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace ktpent::cli
