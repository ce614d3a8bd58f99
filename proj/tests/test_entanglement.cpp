#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "ktpent/chsh_analysis.hpp"
#include "ktpent/entanglement.hpp"
#include "ktpent/errors.hpp"

using namespace ktpent;

namespace {

constexpr double kPi = std::numbers::pi;

double rad(double deg) { return deg * kPi / 180.0; }

// Amplitude oracle for (|HV> + |VH>)/sqrt(2) projected on two linear
// polarisers, written with plain trigonometry rather than matrices.
double psi_plus_probability(double t1_deg, double t2_deg) {
  const double a1 = rad(t1_deg), a2 = rad(t2_deg);
  const double amp = (std::cos(a1) * std::sin(a2) + std::sin(a1) * std::cos(a2)) / std::sqrt(2.0);
  return amp * amp;
}

// Correlation of dephased_state(c, 0), derived by hand from the density matrix.
double dephased_E(double c, double t1_deg, double t2_deg) {
  const double a1 = 2 * rad(t1_deg), a2 = 2 * rad(t2_deg);
  return -std::cos(a1) * std::cos(a2) + c * std::sin(a1) * std::sin(a2);
}

ChshCounts model_counts(const TwoPhotonState& state, double scale, const ChshAngles& g = {}) {
  ChshCounts out{};
  const auto terms = chsh_term_settings(g);
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = {scale * coincidence_probability(state, terms[k][0]),
              scale * coincidence_probability(state, terms[k][1]),
              scale * coincidence_probability(state, terms[k][2]),
              scale * coincidence_probability(state, terms[k][3])};
  }
  return out;
}

ExperimentModel paper_scale_model(double coherence) {
  const double collection = std::pow(10.0, -0.655);
  return {dephased_state(coherence, 0.0),
          2500.0,
          200.0,
          {collection * std::pow(10.0, -0.031) * 0.5, collection * std::pow(10.0, -0.066) * 0.5},
          {}};
}

}  // namespace

TEST_CASE("ideal state density matrix") {
  const auto s = ideal_post_selected_state();
  CHECK(s.element(kHV, kHV).real() == doctest::Approx(0.5));
  CHECK(s.element(kVH, kVH).real() == doctest::Approx(0.5));
  CHECK(s.element(kHV, kVH).real() == doctest::Approx(0.5));
  CHECK(std::abs(s.element(kHH, kHH)) == 0.0);
  CHECK(s.purity() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("states are validated on construction") {
  Matrix4c<double> rho = Matrix4c<double>::Zero();
  rho(0, 0) = 1.0;
  CHECK_NOTHROW(TwoPhotonState{rho});
  rho(0, 1) = 0.3;  // not Hermitian
  CHECK_THROWS_AS(TwoPhotonState{rho}, ValidationError);
  rho(0, 1) = 0.0;
  rho(0, 0) = 0.9;  // trace != 1
  CHECK_THROWS_AS(TwoPhotonState{rho}, ValidationError);
  rho(0, 0) = 1.2;
  rho(1, 1) = -0.2;  // negative eigenvalue
  CHECK_THROWS_AS(TwoPhotonState{rho}, ValidationError);
  CHECK_THROWS_AS(dephased_state(1.2, 0.0), ParamOutOfRange);
}

TEST_CASE("dephased family endpoints") {
  const auto pure = dephased_state(1.0, 0.0).rho();
  CHECK((pure - ideal_post_selected_state().rho()).norm() < 1e-15);
  const auto mixed = dephased_state(0.0, 0.0);
  CHECK(std::abs(mixed.element(kHV, kVH)) == 0.0);
  CHECK(mixed.element(kHV, kHV).real() == doctest::Approx(0.5));
  CHECK(mixed.purity() == doctest::Approx(0.5));
  const auto tilted = dephased_state(1.0, 0.2);
  CHECK(tilted.element(kHV, kHV).real() == doctest::Approx(0.6));
  CHECK(tilted.purity() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coincidence law of the ideal state on random angles") {
  const auto s = ideal_post_selected_state();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-180.0, 180.0);
  for (int i = 0; i < 100; ++i) {
    const double t1 = angle(rng), t2 = angle(rng);
    const double closed = 0.5 * std::pow(std::sin(rad(t1 + t2)), 2);
    CHECK(std::abs(coincidence_probability(s, {t1, t2}) - closed) < 1e-12);
    CHECK(std::abs(psi_plus_probability(t1, t2) - closed) < 1e-12);
    // 180-degree periodicity in each polariser.
    CHECK(std::abs(coincidence_probability(s, {t1 + 180.0, t2}) - closed) < 1e-12);
  }
  CHECK(coincidence_probability(s, {0.0, 0.0}) == doctest::Approx(0.0));
  CHECK(coincidence_probability(s, {0.0, 90.0}) == doctest::Approx(0.5));
  CHECK(coincidence_probability(s, {22.5, 22.5}) == doctest::Approx(0.25));
}

TEST_CASE("polarisation algebra is scalar-generic") {
  Vector4c<float> vf;
  vf << 0.0f, std::sqrt(0.5f), std::sqrt(0.5f), 0.0f;
  const auto s = BasicTwoPhotonState<float>::from_pure(vf);
  CHECK(coincidence_probability(s, 22.5f, 22.5f) == doctest::Approx(0.25).epsilon(1e-6));
  Vector4c<long double> vl;
  vl << 0.0L, std::sqrt(0.5L), std::sqrt(0.5L), 0.0L;
  const auto lp = BasicTwoPhotonState<long double>::from_pure(vl);
  CHECK(static_cast<double>(coincidence_probability(lp, 10.0L, 35.0L)) ==
        doctest::Approx(psi_plus_probability(10.0, 35.0)).epsilon(1e-15));
}

TEST_CASE("product and mixed states") {
  const auto hh = product_state({0.0, 0.0});
  CHECK(coincidence_probability(hh, {0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(coincidence_probability(hh, {30.0, 60.0}) ==
        doctest::Approx(std::pow(std::cos(rad(30)) * std::cos(rad(60)), 2)));
  const auto mm = maximally_mixed_state();
  CHECK(coincidence_probability(mm, {12.0, 77.0}) == doctest::Approx(0.25));
  CHECK(visibility_in_basis(mm, Basis::rect) == doctest::Approx(0.0));
  CHECK(visibility_in_basis(mm, Basis::diag) == doctest::Approx(0.0));
  CHECK(chsh_from_counts(model_counts(hh, 1000.0)).S <= 2.0 + 1e-12);
}

TEST_CASE("correlation E") {
  CHECK(correlation_E(10, 10, 0, 0) == 1.0);
  CHECK(correlation_E(10, 10, 10, 10) == 0.0);
  CHECK_THROWS_AS(correlation_E(0, 0, 0, 0), ZeroDenominator);
  // Ideal state at (-22.5, -45) with complements: +sqrt(2)/2.
  const auto s = ideal_post_selected_state();
  const auto p = [&](double a, double b) { return coincidence_probability(s, {a, b}); };
  CHECK(correlation_E(p(-22.5, -45), p(67.5, 45), p(-22.5, 45), p(67.5, -45)) ==
        doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
}

TEST_CASE("CHSH value of the ideal state") {
  const auto r = chsh_from_counts(model_counts(ideal_post_selected_state(), 1.0));
  CHECK(std::abs(r.S - 2 * std::sqrt(2.0)) < 1e-9);
  CHECK(r.E[0] == doctest::Approx(std::sqrt(0.5)));
  for (int k = 1; k < 4; ++k) CHECK(r.E[k] == doctest::Approx(-std::sqrt(0.5)));
  // All-plus sum cannot reach the quantum bound here.
  CHECK(chsh_S(r.E, {1, 1, 1, 1}).magnitude == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("CHSH value is affine in coherence: S = sqrt(2) (1 + c)") {
  // From E = -cos2t1 cos2t2 + c sin2t1 sin2t2 at the default angles.
  const ChshAngles g;
  for (double c : {0.0, std::sqrt(2.0) - 1.0, 1.0 / std::sqrt(2.0), 0.92, 1.0}) {
    CAPTURE(c);
    const auto r = chsh_from_counts(model_counts(dephased_state(c, 0.0), 1.0));
    CHECK(std::abs(r.S - std::sqrt(2.0) * (1.0 + c)) < 1e-9);
    CHECK(r.E[0] == doctest::Approx(dephased_E(c, g.a, g.b)).epsilon(1e-12));
    CHECK(r.E[3] == doctest::Approx(dephased_E(c, g.a_prime, g.b_prime)).epsilon(1e-12));
  }
  // The local bound |S| = 2 is crossed at c = sqrt(2) - 1, not at 1/sqrt(2).
  const auto at = chsh_from_counts(model_counts(dephased_state(std::sqrt(2.0) - 1.0, 0.0), 1.0));
  CHECK(std::abs(at.S - 2.0) < 1e-9);
}

TEST_CASE("basis visibilities of model states") {
  CHECK(visibility_in_basis(ideal_post_selected_state(), Basis::rect) == doctest::Approx(1.0));
  CHECK(visibility_in_basis(ideal_post_selected_state(), Basis::diag) == doctest::Approx(1.0));
  for (double c : {0.3, 0.71, 0.9}) {
    CHECK(visibility_in_basis(dephased_state(c, 0.0), Basis::diag) == doctest::Approx(c).epsilon(1e-12));
    CHECK(visibility_in_basis(dephased_state(c, 0.0), Basis::rect) == doctest::Approx(1.0));
  }
  CHECK(visibility(100, 100) == 0.0);
  CHECK(visibility(100, 0) == 1.0);
  CHECK(visibility(100, 5) == doctest::Approx(95.0 / 105.0));
  CHECK_THROWS_AS(visibility(0, 0), Degenerate);
}

TEST_CASE("accidentals") {
  CHECK(accidental_rate(0, 2500, 5) == 0.0);
  CHECK(accidental_rate(2700, 2700, 5) == doctest::Approx(0.03645));
  CHECK(accidental_rate(2700, 2700, 10) == doctest::Approx(2 * accidental_rate(2700, 2700, 5)));

  CountRecord r{{0, 90}, 100.0, 0.0, 0.0, 10.0};
  CHECK(subtract_accidentals(r, 5).value == 100.0);
  CHECK_FALSE(subtract_accidentals(r, 5).clamped);
  r.coincidences = 1;
  r.singles1_hz = r.singles2_hz = 1e4;
  const auto net = subtract_accidentals(r, 5);
  CHECK(net.value == 0.0);
  CHECK(net.clamped);
}

TEST_CASE("net visibility is never below raw for setting-independent accidentals") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double acc = 50.0 * u(rng);
    const double hi = acc + 10.0 + 1000.0 * u(rng);
    const double lo = acc + (hi - acc) * u(rng);
    CHECK(visibility(hi - acc, lo - acc) >= visibility(hi, lo) - 1e-15);
  }
}

TEST_CASE("expected counts") {
  ExperimentModel unit{ideal_post_selected_state(), 1000.0, 3.0, {1.0, 1.0}, {}};
  for (auto& d : unit.detectors) {
    d.efficiency = 1.0;
    d.dark_rate_hz = 0.0;
  }
  const auto e = expected_counts(unit, {0.0, 90.0}, 2.0);
  CHECK(e.true_coincidences == doctest::Approx(1000.0 * 3.0 * 2.0 / 2.0));
  CHECK(e.singles1_hz == doctest::Approx(1500.0));
  unit.detectors[1].gate_window_ns = 0.0;
  CHECK(expected_counts(unit, {0.0, 90.0}, 2.0).coincidences == doctest::Approx(3000.0));

  auto dark_only = paper_scale_model(0.92);
  dark_only.pump_power_mw = 0.0;
  const auto floor = expected_counts(dark_only, {0.0, 90.0}, 200.0);
  CHECK(floor.true_coincidences == 0.0);
  CHECK(floor.coincidences == doctest::Approx(310.0 * 310.0 * 5e-9 * 200.0));

  // Doubling power doubles true coincidences, more than doubles accidentals.
  const auto m = paper_scale_model(0.92);
  auto m2 = m;
  m2.pump_power_mw *= 2;
  const auto a = expected_counts(m, {0.0, 90.0}, 1.0), b = expected_counts(m2, {0.0, 90.0}, 1.0);
  CHECK(b.true_coincidences == doctest::Approx(2 * a.true_coincidences));
  CHECK(b.accidental_coincidences > 2 * a.accidental_coincidences);
  CHECK(fringe_ratio(m2, Basis::diag, 1.0) < fringe_ratio(m, Basis::diag, 1.0));

  // Paper-scale singles land in the measured 2000-2700 /s range.
  CHECK(a.singles1_hz > 2000.0);
  CHECK(a.singles1_hz < 2700.0);
  CHECK(a.singles2_hz > 2000.0);
  CHECK(a.singles2_hz < 2700.0);
}

TEST_CASE("fringe ratio falls strictly with pump power") {
  auto m = paper_scale_model(0.92);
  for (Basis basis : {Basis::rect, Basis::diag}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double p : {50.0, 100.0, 200.0, 400.0, 800.0}) {
      m.pump_power_mw = p;
      const double r = fringe_ratio(m, basis, 200.0);
      CHECK(r < prev);
      prev = r;
    }
  }
}

TEST_CASE("seeded simulation") {
  const auto m = paper_scale_model(0.92);
  const auto settings = chsh_settings();
  const auto a = simulate_counts(m, settings, 200.0, 42);
  const auto b = simulate_counts(m, settings, 200.0, 42);
  const auto c = simulate_counts(m, settings, 200.0, 43);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].coincidences == b[i].coincidences && a[i].singles1_hz == b[i].singles1_hz;
    differ = differ || a[i].coincidences != c[i].coincidences;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("Poisson sample mean agrees with the expected counts") {
  const auto m = paper_scale_model(0.92);
  const std::vector<AngleSetting> setting{{22.5, 0.0}};
  const double mean = expected_counts(m, setting[0], 1.0).coincidences;
  constexpr int kReps = 10000;
  double sum = 0.0;
  for (int i = 0; i < kReps; ++i) sum += simulate_counts(m, setting, 1.0, 1000 + i)[0].coincidences;
  const double se = std::sqrt(mean / kReps);
  CHECK(std::abs(sum / kReps - mean) < 3 * se);
}

TEST_CASE("delta-method sigma_S against a parametric bootstrap") {
  const auto check_against_bootstrap = [](const ChshCounts& means) {
    const double analytic = chsh_from_counts(means).sigma_S;
    std::mt19937_64 rng(2024);
    constexpr int kTrials = 100000;
    double s1 = 0.0, s2 = 0.0;
    for (int t = 0; t < kTrials; ++t) {
      ChshCounts draw{};
      for (std::size_t k = 0; k < 4; ++k) {
        auto pois = [&](double mu) {
          return mu > 0 ? static_cast<double>(std::poisson_distribution<long long>(mu)(rng)) : 0.0;
        };
        draw[k] = {pois(means[k].pp), pois(means[k].tt), pois(means[k].pt), pois(means[k].tp)};
      }
      const double s = chsh_from_counts(draw).S_signed;
      s1 += s;
      s2 += s * s;
    }
    const double boot = std::sqrt(std::max(0.0, s2 / kTrials - (s1 / kTrials) * (s1 / kTrials)));
    return std::pair{analytic, boot};
  };

  SUBCASE("generic counts") {
    const auto [analytic, boot] = check_against_bootstrap(model_counts(dephased_state(0.9, 0.0), 2000.0));
    CHECK(analytic > 0.0);
    CHECK(std::abs(analytic - boot) < 0.1 * boot);
  }
  SUBCASE("perfect correlations") {
    ChshCounts perfect{};
    perfect.fill({400, 400, 0, 0});
    const auto [analytic, boot] = check_against_bootstrap(perfect);
    CHECK(std::isfinite(analytic));
    CHECK(analytic == 0.0);  // (1 - E) = 0 and the cross counts are zero
    CHECK(boot < 1e-9);
  }
}

TEST_CASE("sigma_S scaling and significance") {
  const auto base = model_counts(dephased_state(0.9, 0.0), 1000.0);
  ChshCounts scaled = base;
  for (auto& c : scaled) c = {c.pp * 4, c.tt * 4, c.pt * 4, c.tp * 4};
  const auto r1 = chsh_from_counts(base), r4 = chsh_from_counts(scaled);
  CHECK(r4.sigma_S == doctest::Approx(r1.sigma_S / 2));
  CHECK(r4.significance == doctest::Approx(2 * r1.significance));

  ChshCounts flat{};
  flat.fill({100, 100, 100, 100});
  const auto f = chsh_from_counts(flat);
  CHECK(f.S == 0.0);
  CHECK(f.significance < 0.0);

  // Hundreds of counts per setting give a significance in the 5-25 sigma band.
  const auto m = paper_scale_model(0.92);
  std::vector<CountRecord> records;
  for (const auto& s : chsh_settings()) {
    const auto e = expected_counts(m, s, 20.0);
    records.push_back({s, e.coincidences, e.singles1_hz, e.singles2_hz, 20.0});
  }
  const auto a = analyze_records(records);
  CHECK(a.raw.significance > 5.0);
  CHECK(a.raw.significance < 25.0);
}

TEST_CASE("simulate-analyse pipeline recovers the model S") {
  const auto m = paper_scale_model(0.92);
  const auto settings = chsh_settings();
  std::vector<CountRecord> expected;
  for (const auto& s : settings) {
    const auto e = expected_counts(m, s, 200.0);
    expected.push_back({s, e.coincidences, e.singles1_hz, e.singles2_hz, 200.0});
  }
  const double s_model = analyze_records(expected).raw.S;

  int covered = 0;
  constexpr int kRuns = 200;
  for (int seed = 1; seed <= kRuns; ++seed) {
    const auto a = analyze_records(simulate_counts(m, settings, 200.0, seed));
    if (std::abs(a.raw.S - s_model) <= 3 * a.raw.sigma_S) ++covered;
    if (seed == 1) {
      CHECK(a.raw.S > 2.0);
      CHECK(a.raw.significance > 5.0);
    }
  }
  CHECK(covered >= 0.95 * kRuns);
}

TEST_CASE("record analysis") {
  const auto m = paper_scale_model(0.92);
  std::vector<CountRecord> records;
  for (const auto& s : chsh_settings()) {
    const auto e = expected_counts(m, s, 100.0);
    records.push_back({s, e.coincidences, e.singles1_hz, e.singles2_hz, 100.0});
  }
  const auto whole = analyze_records(records);

  SUBCASE("split rows are summed") {
    std::vector<CountRecord> split;
    for (auto r : records) {
      r.coincidences /= 2;
      r.duration_s /= 2;
      split.push_back(r);
      split.push_back(r);
    }
    const auto a = analyze_records(split);
    CHECK(a.raw.S == doctest::Approx(whole.raw.S).epsilon(1e-12));
    CHECK(a.net_accidental.S == doctest::Approx(whole.net_accidental.S).epsilon(1e-12));
  }
  SUBCASE("angles are compared modulo 180") {
    auto shifted = records;
    for (auto& r : shifted) r.setting.theta1_deg += 180.0;
    CHECK(analyze_records(shifted).raw.S == doctest::Approx(whole.raw.S));
  }
  SUBCASE("missing settings are listed") {
    auto partial = records;
    partial.erase(partial.begin());
    try {
      analyze_records(partial);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("missing CHSH settings") != std::string::npos);
      CHECK(msg.find("(-22.5, -45)") != std::string::npos);
    }
  }
  SUBCASE("background-subtracted variants") {
    CHECK(whole.net_accidental.S > whole.raw.S);
    CHECK(whole.net_dark.S >= whole.raw.S);
    CHECK(whole.net_dark.S <= whole.net_accidental.S);
    CHECK(whole.clamped_rows == 0);
  }
  CHECK(dark_coincidence_rate(2000, 2500, 310, 310, 5) ==
        doctest::Approx((310.0 * 2500 + 2000.0 * 310 - 310.0 * 310) * 5e-9));
}
