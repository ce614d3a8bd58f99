#pragma once

#include <string>
#include <vector>

#include "ktpent/entanglement.hpp"

namespace ktpent {

struct LossElement {
  std::string label;
  double loss_db = 0.0;
};

/// Ordered attenuating elements; losses must be finite and >= 0.
struct LossChain {
  std::vector<LossElement> elements;

  void validate() const;
  LossChain concat(const LossChain& other) const;
};

struct ChainTransmission {
  double transmission = 1.0;
  double total_db = 0.0;
};

double db_to_transmission(double loss_db);
double transmission_to_db(double transmission);
ChainTransmission chain_transmission(const LossChain& chain);

/// Which efficiencies divide the detected coincidence rate. Every flag is
/// explicit because the combination rule is not fixed by the measured data.
struct BrightnessAccounting {
  bool both_arm_losses = true;        // divide by arm 2's chain as well as arm 1's
  bool beam_splitter_half = true;     // 50/50 splitter post-selects half the pairs
  bool both_detector_efficiencies = true;

  std::string label() const;
};

/// All 8 flag combinations, in a fixed order.
std::vector<BrightnessAccounting> accounting_variants();

struct Divisor {
  std::string label;
  double value = 1.0;
};

struct BrightnessEstimate {
  double rate = 0.0;  // pairs per (s mW nm)
  double detected_rate_hz = 0.0;
  BrightnessAccounting accounting;
  std::vector<Divisor> assumptions;  // every factor divided out, in order
};

struct BudgetInputs {
  double pump_power_mw = 0.0;
  double bandwidth_nm = 0.0;
  LossChain chain1;
  LossChain chain2;
  DetectorModel detector1;
  DetectorModel detector2;
};

/// Detected coincidence rate -> generated pairs per (s mW nm).
BrightnessEstimate brightness_from_detected(double detected_coincidence_rate_hz,
                                            const BudgetInputs& in,
                                            const BrightnessAccounting& accounting);

/// Inverse of brightness_from_detected.
double predicted_detected_rate(double brightness, const BudgetInputs& in,
                               const BrightnessAccounting& accounting);

}  // namespace ktpent
