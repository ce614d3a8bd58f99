#include <doctest.h>

#include <cmath>

#include "ktpent/config_io.hpp"
#include "ktpent/errors.hpp"

using namespace ktpent;

namespace {

const CrystalSpec& crystal() {
  static const CrystalSpec c = default_crystal();
  return c;
}

const SellmeierModel& ny() { return crystal().model(Axis::y); }
const SellmeierModel& nz() { return crystal().model(Axis::z); }

// Closed-form y-axis dispersion and its derivative, written out here so the
// finite-difference path has something exact to compare against.
double ny_bare(double l) {
  const double l2 = l * l;
  return std::sqrt(2.09930 + 0.922683 / (1 - 0.0467695 / l2) - 0.0138408 * l2);
}

double ny_bare_slope(double l) {
  const double c = 0.0467695;
  const double u = 1 - c / (l * l);
  const double dn2 = 0.922683 * (-1.0 / (u * u)) * (2 * c / (l * l * l)) - 2 * 0.0138408 * l;
  return dn2 / (2 * ny_bare(l));
}

}  // namespace

TEST_CASE("room-temperature indices match the independent oracle") {
  // Values from tests/oracles/ktp_oracle.py.
  CHECK(refractive_index(ny(), {0.78, 25.0}) == doctest::Approx(1.7579528504165485).epsilon(1e-13));
  CHECK(refractive_index(ny(), {1.56, 25.0}) == doctest::Approx(1.7338915280383265).epsilon(1e-13));
  CHECK(refractive_index(nz(), {1.56, 25.0}) == doctest::Approx(1.815793831323578).epsilon(1e-13));
}

TEST_CASE("thermal correction follows the two-term polynomial") {
  CHECK(refractive_index(ny(), {0.78, 60.0}) == doctest::Approx(1.7582984281055438).epsilon(1e-13));
  CHECK(refractive_index(nz(), {1.56, -5.0}) == doctest::Approx(1.8154031144635718).epsilon(1e-13));
  CHECK(ny().thermal_shift(1.0, 0.0) == 0.0);
  // Index rises with temperature on both axes in this window.
  CHECK(refractive_index(nz(), {1.0, 40.0}) > refractive_index(nz(), {1.0, 30.0}));
}

TEST_CASE("wavelength derivatives agree with the analytic slope") {
  for (double l : {0.5, 0.78, 1.2, 1.56, 1.9}) {
    CAPTURE(l);
    CHECK(index_derivative(ny(), {l, 25.0}, 1) ==
          doctest::Approx(ny_bare_slope(l)).epsilon(1e-8));
  }
  const double h = 1e-5;
  const double second = (ny_bare_slope(0.9 + h) - ny_bare_slope(0.9 - h)) / (2 * h);
  CHECK(index_derivative(ny(), {0.9, 25.0}, 2) == doctest::Approx(second).epsilon(1e-5));
  CHECK(group_index(nz(), {1.56, 25.0}) == doctest::Approx(1.8524776711560411).epsilon(1e-9));
  CHECK_THROWS_AS(index_derivative(ny(), {0.9, 25.0}, 3), ParamOutOfRange);
}

TEST_CASE("queries outside the validity window are refused with context") {
  CHECK_THROWS_AS(refractive_index(ny(), {0.30, 25.0}), OutOfRange);
  CHECK_THROWS_AS(refractive_index(ny(), {2.5, 25.0}), OutOfRange);
  CHECK_THROWS_AS(refractive_index(nz(), {1.0, 250.0}), OutOfRange);
  try {
    refractive_index(ny(), {2.5, 25.0});
  } catch (const OutOfRange& e) {
    CHECK(std::string(e.what()).find("2.5") != std::string::npos);
  }
  // The derivative stencil needs room on both sides.
  CHECK_THROWS_AS(index_derivative(ny(), {2.0, 25.0}, 1), OutOfRange);
}

TEST_CASE("model construction validates its inputs") {
  const Interval lam{0.4, 2.0}, temp{0, 100};
  CHECK_NOTHROW(SellmeierModel(Axis::y, "polynomial", {{"p0", 1.7}, {"p1", -0.01}}, {}, 25, lam, temp));
  CHECK(SellmeierModel(Axis::y, "polynomial", {{"p0", 1.7}, {"p1", -0.01}}, {}, 25, lam, temp)
            .bare_index(1.0) == doctest::Approx(1.69));
  CHECK_THROWS_AS(SellmeierModel(Axis::y, "cauchy", {{"A", 2.0}}, {}, 25, lam, temp), ValidationError);
  CHECK_THROWS_AS(SellmeierModel(Axis::y, "resonant", {{"A", 2.0}, {"Q", 1.0}}, {}, 25, lam, temp),
                  ValidationError);
  CHECK_THROWS_AS(SellmeierModel(Axis::y, "resonant", {{"A", 2.0}, {"B1", 1.0}}, {}, 25, lam, temp),
                  ValidationError);
  // Pole at sqrt(0.36) = 0.6 um inside the window.
  CHECK_THROWS_AS(
      SellmeierModel(Axis::y, "resonant", {{"A", 2.0}, {"B1", 0.9}, {"C1", 0.36}}, {}, 25, lam, temp),
      ValidationError);
  CHECK_THROWS_AS(SellmeierModel(Axis::y, "polynomial", {{"p0", 0.9}}, {}, 25, lam, temp), ValidationError);
  CHECK_THROWS_AS(SellmeierModel(Axis::y, "polynomial", {{"p0", 1.7}}, {{0, 0, 1e-3}}, 25, lam, temp),
                  ValidationError);
}

TEST_CASE("coefficient JSON round-trips and names unknown keys") {
  const Json j = to_json(nz());
  const SellmeierModel back = sellmeier_from_json(j);
  CHECK(refractive_index(back, {1.3, 47.0}) == refractive_index(nz(), {1.3, 47.0}));
  CHECK(back.source_citation() == nz().source_citation());

  Json bad = j;
  bad["sellmeier_typo"] = 1;
  try {
    sellmeier_from_json(bad);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("sellmeier_typo") != std::string::npos);
  }
  Json missing = j;
  missing.erase("valid_temp_c");
  CHECK_THROWS_AS(sellmeier_from_json(missing), ValidationError);
}
