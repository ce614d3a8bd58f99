#include "ktpent/source_budget.hpp"

#include <cmath>
#include <sstream>

#include "ktpent/errors.hpp"

namespace ktpent {

void LossChain::validate() const {
  for (const auto& e : elements) {
    if (!(e.loss_db >= 0.0) || !std::isfinite(e.loss_db)) {
      std::ostringstream os;
      os << "loss element '" << e.label << "' has invalid loss " << e.loss_db << " dB";
      throw ParamOutOfRange(os.str());
    }
  }
}

LossChain LossChain::concat(const LossChain& other) const {
  LossChain out = *this;
  out.elements.insert(out.elements.end(), other.elements.begin(), other.elements.end());
  return out;
}

double db_to_transmission(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

double transmission_to_db(double transmission) {
  if (!(transmission > 0.0)) throw ParamOutOfRange("transmission must be > 0");
  return -10.0 * std::log10(transmission);
}

ChainTransmission chain_transmission(const LossChain& chain) {
  chain.validate();
  ChainTransmission out;
  for (const auto& e : chain.elements) {
    out.total_db += e.loss_db;
    out.transmission *= db_to_transmission(e.loss_db);
  }
  return out;
}

std::string BrightnessAccounting::label() const {
  std::string s;
  s += both_arm_losses ? "both_arms" : "arm1_only";
  s += beam_splitter_half ? "+bs_half" : "+no_bs";
  s += both_detector_efficiencies ? "+both_detectors" : "+detector1_only";
  return s;
}

std::vector<BrightnessAccounting> accounting_variants() {
  std::vector<BrightnessAccounting> out;
  for (int mask = 0; mask < 8; ++mask)
    out.push_back({(mask & 4) != 0, (mask & 2) != 0, (mask & 1) != 0});
  return out;
}

namespace {

std::vector<Divisor> divisors(const BudgetInputs& in, const BrightnessAccounting& acc) {
  if (!(in.pump_power_mw > 0.0)) throw ParamOutOfRange("pump power must be > 0");
  if (!(in.bandwidth_nm > 0.0)) throw ParamOutOfRange("bandwidth must be > 0");
  in.detector1.validate();
  in.detector2.validate();

  std::vector<Divisor> d;
  d.push_back({"pump_power_mw", in.pump_power_mw});
  d.push_back({"bandwidth_nm", in.bandwidth_nm});
  d.push_back({"arm1_transmission", chain_transmission(in.chain1).transmission});
  if (acc.both_arm_losses) d.push_back({"arm2_transmission", chain_transmission(in.chain2).transmission});
  d.push_back({"detector1_efficiency", in.detector1.efficiency});
  if (acc.both_detector_efficiencies) d.push_back({"detector2_efficiency", in.detector2.efficiency});
  if (acc.beam_splitter_half) d.push_back({"beam_splitter_post_selection", 0.5});
  for (const auto& x : d) {
    if (!(x.value > 0.0)) throw ParamOutOfRange("divisor '" + x.label + "' must be > 0");
  }
  return d;
}

}  // namespace

BrightnessEstimate brightness_from_detected(double detected_coincidence_rate_hz,
                                            const BudgetInputs& in,
                                            const BrightnessAccounting& accounting) {
  if (!(detected_coincidence_rate_hz > 0.0))
    throw ParamOutOfRange("detected coincidence rate must be > 0");
  BrightnessEstimate out;
  out.detected_rate_hz = detected_coincidence_rate_hz;
  out.accounting = accounting;
  out.assumptions = divisors(in, accounting);
  out.rate = detected_coincidence_rate_hz;
  for (const auto& d : out.assumptions) out.rate /= d.value;
  return out;
}

double predicted_detected_rate(double brightness, const BudgetInputs& in,
                               const BrightnessAccounting& accounting) {
  if (!(brightness > 0.0)) throw ParamOutOfRange("brightness must be > 0");
  double rate = brightness;
  for (const auto& d : divisors(in, accounting)) rate *= d.value;
  return rate;
}

}  // namespace ktpent
