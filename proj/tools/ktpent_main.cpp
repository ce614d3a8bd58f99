#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "ktpent/commands.hpp"
#include "ktpent/version.hpp"

namespace {

using namespace ktpent;
using namespace ktpent::cli;

// A subcommand's flags are applied on top of its config file, so each flag
// is captured separately and only copied over when it was given.
template <class Options>
struct Command {
  CLI::App* app = nullptr;
  std::string config;
  std::vector<std::function<void(Options&)>> overrides;

  template <class Holder, class Access>
  CLI::Option* option(const std::string& name, const std::string& desc, Access access) {
    auto holder = std::make_shared<Holder>();
    CLI::Option* opt = app->add_option(name, *holder, desc);
    overrides.push_back([opt, holder, access](Options& o) {
      if (opt->count() > 0) access(o) = *holder;
    });
    return opt;
  }

  template <class Holder, class Apply>
  CLI::Option* custom(const std::string& name, const std::string& desc, Apply apply) {
    auto holder = std::make_shared<Holder>();
    CLI::Option* opt = app->add_option(name, *holder, desc);
    overrides.push_back([opt, holder, apply](Options& o) {
      if (opt->count() > 0) apply(o, *holder);
    });
    return opt;
  }

  void common_flags() {
    app->add_option("--config", config, "JSON config file; flags override its values");
    option<std::string>("--crystal", "crystal JSON file (default: bundled PPKTP)",
                        [](Options& o) -> auto& { return o.common.crystal_path; });
    option<std::string>("--out", "output path", [](Options& o) -> auto& { return o.common.out; });
    option<std::uint64_t>("--seed", "random seed", [](Options& o) -> auto& { return o.common.seed; });
    option<double>("--poling-period", "override the crystal poling period (um)",
                   [](Options& o) -> auto& { return o.common.poling_period_um; });
  }

  Options resolve() const {
    Options o{};
    if (!config.empty()) apply_config(o, read_json_file(config));
    for (const auto& f : overrides) f(o);
    return o;
  }
};

template <class Options>
int execute(const Command<Options>& cmd, int (*run)(const Options&, std::ostream&, std::ostream&)) {
  return guarded([&] { return run(cmd.resolve(), std::cout, std::cerr); }, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PPKTP phase-matching and polarization-entanglement toolkit"};
  app.set_version_flag("--version", std::string("ktpent ") + kVersion);
  app.require_subcommand(1);

  Command<PmCurveOptions> pm;
  pm.app = app.add_subcommand("pm-curve", "degenerate phase-match temperature vs fundamental wavelength (CSV)");
  pm.common_flags();
  pm.option<double>("--from", "first fundamental wavelength (nm)", [](auto& o) -> auto& { return o.from_nm; });
  pm.option<double>("--to", "last fundamental wavelength (nm)", [](auto& o) -> auto& { return o.to_nm; });
  pm.option<double>("--step", "wavelength step (nm)", [](auto& o) -> auto& { return o.step_nm; });

  Command<ShgSweepOptions> shg;
  shg.app = app.add_subcommand("shg-sweep", "normalised SHG power vs temperature; --out is a directory");
  shg.common_flags();
  shg.option<std::vector<double>>("--wavelengths", "fundamental wavelengths (nm)",
                                  [](auto& o) -> auto& { return o.wavelengths_nm; });
  shg.option<double>("--t-from", "first temperature (C)", [](auto& o) -> auto& { return o.t_from_c; });
  shg.option<double>("--t-to", "last temperature (C)", [](auto& o) -> auto& { return o.t_to_c; });
  shg.option<double>("--t-step", "temperature step (C)", [](auto& o) -> auto& { return o.t_step_c; });

  Command<EpmFindOptions> epm;
  epm.app = app.add_subcommand("epm-find", "extended phase-matching pump wavelength (JSON)");
  epm.common_flags();
  epm.option<double>("--from", "pump search start (nm)", [](auto& o) -> auto& { return o.search_from_nm; });
  epm.option<double>("--to", "pump search end (nm)", [](auto& o) -> auto& { return o.search_to_nm; });

  Command<BellSimOptions> bell;
  bell.app = app.add_subcommand("bell-sim", "simulate fringe and CHSH counts; --out is the count CSV");
  bell.common_flags();
  bell.option<double>("--coherence", "HV/VH coherence in [0, 1]", [](auto& o) -> auto& { return o.coherence; });
  bell.option<double>("--imbalance", "HV/VH population imbalance", [](auto& o) -> auto& { return o.imbalance; });
  bell.option<double>("--pair-rate", "generated pairs per s per mW", [](auto& o) -> auto& { return o.pair_rate_per_mw; });
  bell.option<double>("--pump-power", "pump power (mW)", [](auto& o) -> auto& { return o.pump_power_mw; });
  bell.custom<std::vector<double>>("--arm-transmissions", "arm 1 and arm 2 transmissions",
                                   [](BellSimOptions& o, const std::vector<double>& v) {
                                     o.arm_transmissions = {v.at(0), v.at(1)};
                                   })
      ->expected(2);
  bell.custom<double>("--efficiency", "detector efficiency (both)", [](BellSimOptions& o, double v) {
    o.detectors[0].efficiency = o.detectors[1].efficiency = v;
  });
  bell.custom<double>("--dark-rate", "dark count rate per detector (Hz)", [](BellSimOptions& o, double v) {
    o.detectors[0].dark_rate_hz = o.detectors[1].dark_rate_hz = v;
  });
  bell.custom<double>("--window", "coincidence gate window (ns)", [](BellSimOptions& o, double v) {
    o.detectors[0].gate_window_ns = o.detectors[1].gate_window_ns = v;
  });
  bell.option<double>("--duration", "integration time per setting (s)", [](auto& o) -> auto& { return o.duration_s; });
  bell.option<double>("--fringe-step", "fringe scan step (deg)", [](auto& o) -> auto& { return o.fringe_step_deg; });
  bell.option<std::string>("--report", "analysis JSON path (default stdout)", [](auto& o) -> auto& { return o.report; });
  bell.option<std::vector<double>>("--power-sweep", "pump powers (mW); writes fringe ratios instead",
                                   [](auto& o) -> auto& { return o.power_sweep_mw; });

  Command<ChshAnalyzeOptions> chsh;
  chsh.app = app.add_subcommand("chsh-analyze", "CHSH and visibility analysis of a count CSV (JSON)");
  chsh.common_flags();
  chsh.option<std::string>("input", "count-record CSV", [](auto& o) -> auto& { return o.input; });
  chsh.option<double>("--window", "coincidence window (ns)", [](auto& o) -> auto& { return o.window_ns; });
  chsh.option<double>("--dark-rate1", "detector 1 dark rate (Hz)", [](auto& o) -> auto& { return o.dark_rate1_hz; });
  chsh.option<double>("--dark-rate2", "detector 2 dark rate (Hz)", [](auto& o) -> auto& { return o.dark_rate2_hz; });
  chsh.custom<std::vector<int>>("--sign-mask", "signs of E(a,b) E(a',b) E(a,b') E(a',b')",
                                [](ChshAnalyzeOptions& o, const std::vector<int>& v) {
                                  o.mask = {v.at(0), v.at(1), v.at(2), v.at(3)};
                                })
      ->expected(4)
      ->allow_extra_args(false);

  Command<RateEstimateOptions> rate;
  rate.app = app.add_subcommand("rate-estimate", "pair brightness from a loss budget (JSON)");
  rate.common_flags();
  rate.option<double>("--pump-power", "pump power (mW)", [](auto& o) -> auto& { return o.pump_power_mw; });
  rate.option<double>("--bandwidth", "SPDC bandwidth (nm)", [](auto& o) -> auto& { return o.bandwidth_nm; });
  rate.custom<bool>("--bandwidth-from-crystal", "compute the bandwidth from the crystal model",
                    [](RateEstimateOptions& o, bool v) { o.bandwidth_from_crystal = v; });
  rate.option<double>("--bandwidth-pump", "pump wavelength for the computed bandwidth (nm)",
                      [](auto& o) -> auto& { return o.bandwidth_pump_nm; });
  const auto chain_flag = [&](const std::string& name, LossChain RateEstimateOptions::*member) {
    rate.custom<std::string>(name, "loss chain JSON file [{label, loss_db}]",
                             [member](RateEstimateOptions& o, const std::string& path) {
                               o.*member = loss_chain_from_json(read_json_file(path));
                             });
  };
  chain_flag("--collection", &RateEstimateOptions::collection);
  chain_flag("--arm1", &RateEstimateOptions::arm1);
  chain_flag("--arm2", &RateEstimateOptions::arm2);
  rate.option<double>("--detector-efficiency1", "detector 1 efficiency",
                      [](auto& o) -> auto& { return o.detector_efficiency1; });
  rate.option<double>("--detector-efficiency2", "detector 2 efficiency",
                      [](auto& o) -> auto& { return o.detector_efficiency2; });
  rate.option<double>("--detected-rate", "detected coincidence rate (Hz)",
                      [](auto& o) -> auto& { return o.detected_rate_hz; });
  rate.option<double>("--target", "brightness to back-solve (pairs/s/mW/nm)",
                      [](auto& o) -> auto& { return o.target_brightness; });
  rate.option<double>("--reference-rate", "reference detected rate for variant selection (Hz)",
                      [](auto& o) -> auto& { return o.reference_detected_rate_hz; });
  rate.option<bool>("--both-arm-losses", "divide by both arms' losses",
                    [](auto& o) -> auto& { return o.accounting.both_arm_losses; });
  rate.option<bool>("--beam-splitter-half", "divide by the splitter's 1/2",
                    [](auto& o) -> auto& { return o.accounting.beam_splitter_half; });
  rate.option<bool>("--both-detector-efficiencies", "divide by both detector efficiencies",
                    [](auto& o) -> auto& { return o.accounting.both_detector_efficiencies; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  if (pm.app->parsed()) return execute(pm, &run_pm_curve);
  if (shg.app->parsed()) return execute(shg, &run_shg_sweep);
  if (epm.app->parsed()) return execute(epm, &run_epm_find);
  if (bell.app->parsed()) return execute(bell, &run_bell_sim);
  if (chsh.app->parsed()) return execute(chsh, &run_chsh_analyze);
  if (rate.app->parsed()) return execute(rate, &run_rate_estimate);
  return kValidation;
}
