#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "laserplan/error.hpp"
#include "laserplan/laser_model.hpp"
#include "test_support.hpp"

using namespace laserplan;

namespace {

const LaserParams kAverage{0.334, 0.473, 12.73, 1.939};

// Plain Gaussian crater written out independently of crater_depth.
double gaussian_crater(double a, double sigma, double phi, double e, double r) {
  const double v = e * std::exp(-(r * r) / (2.0 * sigma * sigma)) - phi;
  return v > 0.0 ? -a * v : 0.0;
}

double removed_volume(const HeightField& before, const HeightField& after) {
  double v = 0.0;
  for (std::size_t k = 0; k < before.size(); ++k) v += before.at(k) - after.at(k);
  return v * before.grid().cell_area();
}

}  // namespace

TEST_CASE("energy table: knots, interpolation, range") {
  const EnergyTable table;
  CHECK(energy_for_duty(table, 50.0) == 6.75);
  CHECK(energy_for_duty(table, 20.0) == 1.91);
  CHECK(energy_for_duty(table, 25.0) == doctest::Approx(2.705).epsilon(1e-12));
  CHECK_THROWS_AS(energy_for_duty(table, 19.9), Error);
  CHECK_THROWS_AS(energy_for_duty(table, 100.1), Error);
  try {
    energy_for_duty(table, 10.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
}

TEST_CASE("energy table rejects unsorted or decreasing entries") {
  CHECK_THROWS_AS(EnergyTable({{30, 3.5, 0}, {20, 1.9, 0}}), Error);
  CHECK_THROWS_AS(EnergyTable({{20, 3.5, 0}, {30, 1.9, 0}}), Error);
  CHECK_THROWS_AS(EnergyTable({{20, 3.5, 0}, {130, 5.0, 0}}), Error);
}

TEST_CASE("crater_depth: centre value, clamp and Gaussian reduction") {
  CHECK(crater_depth(kAverage, 6.75, 0.0) == doctest::Approx(-0.334 * (6.75 - 1.939)).epsilon(1e-12));
  CHECK(crater_depth(kAverage, 6.75, 0.0) == doctest::Approx(-1.6069).epsilon(1e-4));
  CHECK(crater_depth(kAverage, 1.5, 0.0) == 0.0);
  CHECK(crater_depth(kAverage, 1.9, 0.3) == 0.0);

  const LaserParams gauss{0.3, 0.5, 1.0, 1.0};
  CHECK(crater_depth(gauss, 6.0, 0.5) == doctest::Approx(-0.3 * (6.0 * std::exp(-0.5) - 1.0)).epsilon(1e-14));
}

TEST_CASE("P = 1 matches an independently coded Gaussian over 1000 samples") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> e(0.0, 12.0), r(0.0, 2.0);
  const LaserParams p{0.41, 0.37, 1.0, 1.2};
  for (int k = 0; k < 1000; ++k) {
    const double ek = e(rng), rk = r(rng);
    CHECK(std::abs(crater_depth(p, ek, rk) - gaussian_crater(0.41, 0.37, 1.2, ek, rk)) < 1e-12);
  }
}

TEST_CASE("crater_depth is radially monotone and vanishes past the cutting radius") {
  for (double energy : {2.5, 6.75, 11.05}) {
    double prev = crater_depth(kAverage, energy, 0.0);
    for (int k = 1; k <= 400; ++k) {
      const double d = crater_depth(kAverage, energy, k * 0.005);
      CHECK(d >= prev);
      CHECK(d <= 0.0);
      prev = d;
    }
    const double rc = cutting_radius(kAverage, energy);
    CHECK(crater_depth(kAverage, energy, rc * (1 + 1e-9)) == 0.0);
    CHECK(crater_depth(kAverage, energy, rc * 0.999) < 0.0);
  }
}

TEST_CASE("apply_cut on a flat surface at normal incidence") {
  const EnergyTable table;
  const HeightField flat(test::square_grid(2.0, 0.05), 0.0);
  CutInput cut;
  cut.duty = 50.0;
  const HeightField out = apply_cut(flat, cut, kAverage, table);
  CHECK(out(40, 40) == doctest::Approx(-1.6069).epsilon(1e-4));
  // Along +x the depth never gets deeper than at the centre.
  for (int i = 41; i < 81; ++i) CHECK(out(i, 40) >= out(i - 1, 40));
  CHECK(out(0, 0) == 0.0);
  CHECK(out(80, 40) == 0.0);
}

TEST_CASE("apply_cut below threshold leaves the surface unchanged") {
  const EnergyTable table;
  const HeightField flat(test::square_grid(2.0, 0.05), 0.0);
  CutInput cut;
  cut.duty = 20.0;  // 1.91 J < 1.939 J
  const HeightField out = apply_cut(flat, cut, kAverage, table);
  CHECK(out.hash() == flat.hash());
}

TEST_CASE("two identical cuts double the depth exactly") {
  const EnergyTable table;
  const HeightField flat(test::square_grid(2.0, 0.05), 0.0);
  CutInput cut;
  cut.mu = {0.3, -0.2};
  cut.duty = 40.0;
  const HeightField once = apply_cut(flat, cut, kAverage, table);
  const HeightField twice = apply_cut(once, cut, kAverage, table);
  for (std::size_t k = 0; k < flat.size(); ++k) CHECK(twice.at(k) == 2.0 * once.at(k));
}

TEST_CASE("apply_cut never raises heights, including tilted beams") {
  const EnergyTable table;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(-1.5, 1.5), ang(-10.0, 10.0), duty(20.0, 100.0);
  HeightField s(test::square_grid(2.0, 0.05), 0.0);
  for (int k = 0; k < 30; ++k) {
    CutInput cut;
    cut.mu = {pos(rng), pos(rng)};
    cut.theta_deg = {ang(rng), ang(rng)};
    cut.duty = duty(rng);
    const HeightField next = apply_cut(s, cut, kAverage, table);
    for (std::size_t c = 0; c < s.size(); ++c) CHECK(next.at(c) <= s.at(c));
    s = next;
  }
}

TEST_CASE("tilted beam stretches the footprint along the tilt and lowers fluence") {
  const EnergyTable table;
  const HeightField flat(test::square_grid(2.0, 0.01), 0.0);
  CutInput cut;
  cut.duty = 50.0;
  cut.theta_deg = {10.0, 0.0};
  const HeightField tilted = apply_cut(flat, cut, kAverage, table);
  const double cos10 = std::cos(10.0 * std::numbers::pi / 180.0);
  const double rc = cutting_radius(kAverage, 6.75 * cos10);
  auto extent = [&](bool along_x) {
    int n = 0;
    for (int k = 0; k <= 200; ++k) {
      const int i = along_x ? 200 + k : 200;
      const int j = along_x ? 200 : 200 + k;
      if (i >= tilted.grid().nx || j >= tilted.grid().ny) break;
      if (tilted(i, j) < 0.0) n = k;
    }
    return n * 0.01;
  };
  CHECK(extent(false) == doctest::Approx(rc).epsilon(0.02));
  CHECK(extent(true) == doctest::Approx(rc / cos10).epsilon(0.02));
  CHECK(tilted(200, 200) == doctest::Approx(crater_depth(kAverage, 6.75 * cos10, 0.0)).epsilon(1e-12));

  CutOptions normal;
  normal.tilt_model = TiltModel::NormalProjection;
  const HeightField projected = apply_cut(flat, cut, kAverage, table, normal);
  CHECK(projected(200, 200) == doctest::Approx(-0.334 * (6.75 - 1.939)).epsilon(1e-12));
}

TEST_CASE("apply_cut error paths") {
  const EnergyTable table;
  HeightField flat(test::square_grid(1.0, 0.05), 0.0);
  CutInput cut;
  cut.mu = {3.0, 0.0};
  try {
    apply_cut(flat, cut, kAverage, table);
    FAIL("expected OutsideWorkspace");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutsideWorkspace);
  }
  cut.mu = {0.0, 0.0};
  flat.invalidate(flat.grid().index(20, 20));
  CHECK_THROWS_AS(apply_cut(flat, cut, kAverage, table), Error);
  cut.mu = {0.5, 0.5};
  cut.theta_deg = {10.5, 0.0};
  CHECK_THROWS_AS(apply_cut(flat, cut, kAverage, table), Error);
}

TEST_CASE("removed volume grows with P toward the flat top") {
  const HeightField flat(test::square_grid(1.5, 0.01), 0.0);
  CutInput cut;
  cut.duty = 50.0;
  double prev = 0.0;
  for (double p : {1.0, 4.0, 12.73}) {
    LaserParams lp = kAverage;
    lp.P = p;
    const double v = removed_volume(flat, apply_crater(flat, cut, lp, 6.75));
    CHECK(v > prev);
    prev = v;
  }
}
