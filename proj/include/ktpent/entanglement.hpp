#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ktpent/polarization.hpp"

namespace ktpent {

/// Polariser transmission axes in degrees, H = 0.
struct AngleSetting {
  double theta1_deg = 0.0;
  double theta2_deg = 0.0;
};

/// Reduces an angle to [0, 180).
double reduce_angle_deg(double deg);
/// Equal as polariser settings (modulo 180 deg) within `tol_deg`.
bool same_setting(const AngleSetting& a, const AngleSetting& b, double tol_deg = 1e-6);

/// Gated InGaAs single-photon detector.
struct DetectorModel {
  double efficiency = 0.08;
  double dark_rate_hz = 310.0;
  double gate_window_ns = 5.0;
  double trigger_rate_hz = 10e6;

  void validate() const;
};

/// Coincidence and singles counts at one polariser setting.
struct CountRecord {
  AngleSetting setting;
  double coincidences = 0.0;
  double singles1_hz = 0.0;
  double singles2_hz = 0.0;
  double duration_s = 1.0;

  void validate() const;
};

struct ExperimentModel {
  TwoPhotonState state;
  double pair_rate_per_mw = 0.0;  // pairs per second per mW of pump
  double pump_power_mw = 0.0;
  std::array<double, 2> arm_transmissions{1.0, 1.0};
  std::array<DetectorModel, 2> detectors{};

  void validate() const;
};

/// Ideal post-selected state (|HV> + |VH>) / sqrt(2).
TwoPhotonState ideal_post_selected_state();

/// HV/VH populations (1 +- imbalance)/2 with the HV<->VH coherence scaled by
/// `coherence` relative to the pure state.
TwoPhotonState dephased_state(double coherence, double imbalance);

TwoPhotonState maximally_mixed_state();
TwoPhotonState product_state(const AngleSetting& polarizations);

double coincidence_probability(const TwoPhotonState& state, const AngleSetting& setting);

/// Correlation from four coincidence counts:
///   (C(a,b) + C(a_perp,b_perp) - C(a,b_perp) - C(a_perp,b)) / sum
double correlation_E(double c_pp, double c_tt, double c_pt, double c_tp);

/// Sign applied to each E term of the CHSH sum, ordered
/// (E(a,b), E(a',b), E(a,b'), E(a',b')).
using SignMask = std::array<int, 4>;
inline constexpr SignMask kDefaultSignMask{-1, +1, +1, +1};

struct ChshValue {
  double signed_sum = 0.0;
  double magnitude = 0.0;
};

ChshValue chsh_S(const std::array<double, 4>& E, const SignMask& mask = kDefaultSignMask);

/// (c_max - c_min) / (c_max + c_min).
double visibility(double c_max, double c_min);

enum class Basis { rect, diag };
double basis_angle_deg(Basis basis);
const char* to_string(Basis basis);

/// Angular step used for model fringe scans.
inline constexpr double kFringeStepDeg = 0.5;

/// Fringe visibility with polariser 2 fixed at the basis angle and polariser 1
/// scanned over a 0.5 deg grid.
double visibility_in_basis(const TwoPhotonState& state, Basis basis);

/// R1 * R2 * tau in s^-1 for singles in s^-1 and a window in ns.
double accidental_rate(double singles1_hz, double singles2_hz, double window_ns);

struct NetCount {
  double value = 0.0;
  bool clamped = false;
};

/// max(0, coincidences - accidental_rate * duration).
NetCount subtract_accidentals(const CountRecord& record, double window_ns);

struct ExpectedCounts {
  double true_coincidences = 0.0;
  double accidental_coincidences = 0.0;
  double coincidences = 0.0;  // true + accidental
  double singles1_hz = 0.0;
  double singles2_hz = 0.0;
};

/// Mean counts for one setting. Accidentals use detector 2's gate window,
/// which is opened by detector 1's clicks.
ExpectedCounts expected_counts(const ExperimentModel& model, const AngleSetting& setting,
                               double duration_s);

/// Poisson-sampled records; each record draws from its own generator seeded
/// by (seed, index), so results do not depend on evaluation order.
std::vector<CountRecord> simulate_counts(const ExperimentModel& model,
                                         std::span<const AngleSetting> settings,
                                         double duration_s, std::uint64_t seed);

/// Max/min ratio of expected coincidences over a polariser-1 fringe scan.
double fringe_ratio(const ExperimentModel& model, Basis basis, double duration_s);

/// Fringe scan settings: polariser 2 fixed at `theta2_deg`, polariser 1 over [0, 180).
std::vector<AngleSetting> fringe_settings(double theta2_deg, double step_deg);

}  // namespace ktpent
