#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ktpent/chsh_analysis.hpp"
#include "ktpent/config_io.hpp"
#include "ktpent/entanglement.hpp"
#include "ktpent/source_budget.hpp"

namespace ktpent::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kSolver = 2, kIo = 3 };

/// Flags shared by every subcommand.
struct CommonOptions {
  std::string crystal_path;  // empty: bundled default crystal
  std::optional<double> poling_period_um;
  std::string out;  // empty: stdout (directory for shg-sweep)
  std::uint64_t seed = 1;
};

struct PmCurveOptions {
  CommonOptions common;
  double from_nm = 1540.0;
  double to_nm = 1600.0;
  double step_nm = 1.0;
};

struct ShgSweepOptions {
  CommonOptions common;
  std::vector<double> wavelengths_nm{1545.0, 1550.0, 1555.0, 1560.0};
  std::optional<double> t_from_c;  // default: crystal bounds
  std::optional<double> t_to_c;
  double t_step_c = 0.1;
};

struct EpmFindOptions {
  CommonOptions common;
  double search_from_nm = 700.0;
  double search_to_nm = 900.0;
};

struct BellSimOptions {
  CommonOptions common;
  double coherence = 0.92;
  double imbalance = 0.0;
  double pair_rate_per_mw = 2500.0;
  double pump_power_mw = 200.0;
  std::array<double, 2> arm_transmissions = default_arm_transmissions();
  std::array<DetectorModel, 2> detectors{};
  double duration_s = 200.0;
  double fringe_step_deg = 5.0;
  std::string report;  // empty: stdout
  std::vector<double> power_sweep_mw;  // non-empty selects power-sweep mode

  /// Collection (1.6 + 4.95 dB), polariser insertion (0.31 / 0.66 dB) and
  /// the 50/50 splitter, per arm.
  static std::array<double, 2> default_arm_transmissions();
};

struct ChshAnalyzeOptions {
  CommonOptions common;
  std::string input;
  double window_ns = 5.0;
  double dark_rate1_hz = 310.0;
  double dark_rate2_hz = 310.0;
  SignMask mask = kDefaultSignMask;
};

struct RateEstimateOptions {
  CommonOptions common;
  double pump_power_mw = 200.0;
  double bandwidth_nm = 2.0;
  bool bandwidth_from_crystal = false;
  double bandwidth_pump_nm = 780.0;
  LossChain collection{{{"filters", 1.6}, {"fiber_coupling", 4.95}}};
  LossChain arm1{{{"polarization_rotator_polarizer_1", 0.31}}};
  LossChain arm2{{{"polarization_rotator_polarizer_2", 0.66}}};
  double detector_efficiency1 = 0.08;
  double detector_efficiency2 = 0.08;
  std::optional<double> detected_rate_hz;
  double target_brightness = 1.63e4;
  std::optional<double> reference_detected_rate_hz;
  BrightnessAccounting accounting{};
};

// Config-file application: keys mirror the long flag names with '_' for '-'.
// Unknown keys raise ValidationError naming the key.
void apply_config(PmCurveOptions& o, const Json& j);
void apply_config(ShgSweepOptions& o, const Json& j);
void apply_config(EpmFindOptions& o, const Json& j);
void apply_config(BellSimOptions& o, const Json& j);
void apply_config(ChshAnalyzeOptions& o, const Json& j);
void apply_config(RateEstimateOptions& o, const Json& j);

Json to_json(const PmCurveOptions& o);
Json to_json(const ShgSweepOptions& o);
Json to_json(const EpmFindOptions& o);
Json to_json(const BellSimOptions& o);
Json to_json(const ChshAnalyzeOptions& o);
Json to_json(const RateEstimateOptions& o);

/// Crystal from --crystal (or the bundled default) with overrides applied.
CrystalSpec resolve_crystal(const CommonOptions& common);

ExperimentModel build_experiment(const BellSimOptions& o);
Json analysis_report(const ChshAnalysis& analysis);

// Each command writes its primary output to `common.out` (or `out` when
// unset) and human-readable summaries to `log`. Errors are thrown.
int run_pm_curve(const PmCurveOptions& o, std::ostream& out, std::ostream& log);
int run_shg_sweep(const ShgSweepOptions& o, std::ostream& out, std::ostream& log);
int run_epm_find(const EpmFindOptions& o, std::ostream& out, std::ostream& log);
int run_bell_sim(const BellSimOptions& o, std::ostream& out, std::ostream& log);
int run_chsh_analyze(const ChshAnalyzeOptions& o, std::ostream& out, std::ostream& log);
int run_rate_estimate(const RateEstimateOptions& o, std::ostream& out, std::ostream& log);

/// Runs `body`, mapping exceptions to exit codes with a diagnostic on `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace ktpent::cli
