#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "laserplan/error.hpp"
#include "laserplan/scattered_interp.hpp"
#include "laserplan/triangulation.hpp"
#include "test_support.hpp"

using namespace laserplan;

namespace {

PointCloud3 cloud_of(const std::vector<Eigen::Vector2d>& xy, auto fn) {
  PointCloud3 c;
  for (const auto& p : xy) c.points.emplace_back(p.x(), p.y(), fn(p.x(), p.y()));
  return c;
}

std::vector<Eigen::Vector2d> random_sites(int n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Eigen::Vector2d> xy;
  for (int k = 0; k < n; ++k) xy.emplace_back(u(rng), u(rng));
  return xy;
}

}  // namespace

TEST_CASE("triangulation covers the hull with ccw triangles") {
  const auto xy = random_sites(300, 0.0, 4.0, 11);
  const Triangulation tri(xy);
  double area = 0.0;
  for (const auto& t : tri.triangles()) {
    const auto& a = tri.vertices()[t[0]];
    const auto& b = tri.vertices()[t[1]];
    const auto& c = tri.vertices()[t[2]];
    const double o = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    CHECK(o > 0.0);
    area += 0.5 * o;
  }
  // Euler: a planar triangulation of n points with h on the hull has 2n - 2 - h triangles.
  int hull_edges = 0;
  for (const auto& nb : tri.neighbors()) {
    for (int k = 0; k < 3; ++k) hull_edges += nb[k] < 0 ? 1 : 0;
  }
  CHECK(static_cast<int>(tri.triangles().size()) == 2 * 300 - 2 - hull_edges);
  CHECK(area > 0.0);
}

TEST_CASE("triangulation handles cocircular grid sites") {
  std::vector<Eigen::Vector2d> xy;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) xy.emplace_back(i, j);
  }
  const Triangulation tri(xy);
  CHECK(tri.triangles().size() == 50);
}

TEST_CASE("interpolation: planar reproduction from four corners") {
  const std::vector<Eigen::Vector2d> xy{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const HeightField h = interpolate_scattered(cloud_of(xy, [](double, double) { return 1.0; }),
                                              GridSpec::covering({0, 0}, {2, 2}, 0.1));
  CHECK(h.all_valid());
  for (std::size_t k = 0; k < h.size(); ++k) CHECK(std::abs(h.at(k) - 1.0) < 1e-9);
}

TEST_CASE("interpolation: linear precision on a single triangle") {
  const std::vector<Eigen::Vector2d> xy{{0, 0}, {3, 0}, {0, 3}};
  const HeightField h = interpolate_scattered(cloud_of(xy, [](double x, double) { return x; }),
                                              GridSpec::covering({0, 0}, {3, 3}, 0.1));
  std::size_t valid = 0;
  for (int j = 0; j < h.grid().ny; ++j) {
    for (int i = 0; i < h.grid().nx; ++i) {
      if (!h.valid(i, j)) continue;
      ++valid;
      CHECK(std::abs(h(i, j) - h.grid().x(i)) < 1e-9);
    }
  }
  // Lower-left half of the square, including the diagonal.
  CHECK(valid > 400);
  CHECK_FALSE(h.valid(30, 30));
}

TEST_CASE("interpolation reproduces random affine functions exactly") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    const auto xy = random_sites(80, -1.0, 1.0, 100 + trial);
    const HeightField h = interpolate_scattered(cloud_of(xy, [&](double x, double y) { return a * x + b * y + c; }),
                                                test::square_grid(1.0, 0.05));
    double worst = 0.0;
    for (int j = 0; j < h.grid().ny; ++j) {
      for (int i = 0; i < h.grid().nx; ++i) {
        if (!h.valid(i, j)) continue;
        worst = std::max(worst, std::abs(h(i, j) - (a * h.grid().x(i) + b * h.grid().y(j) + c)));
      }
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("Clough-Tocher with exact gradients reproduces quadratics") {
  const auto xy = random_sites(40, 0.0, 1.0, 9);
  std::vector<double> f;
  std::vector<Eigen::Vector2d> g;
  for (const auto& p : xy) {
    f.push_back(p.x() * p.x() + 0.5 * p.x() * p.y() - 2.0 * p.y() * p.y());
    g.emplace_back(2.0 * p.x() + 0.5 * p.y(), 0.5 * p.x() - 4.0 * p.y());
  }
  const CloughTocherInterpolant ct(xy, f, g);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector2d q(u(rng), u(rng));
    const auto v = ct(q);
    if (!v) continue;
    CHECK(std::abs(*v - (q.x() * q.x() + 0.5 * q.x() * q.y() - 2.0 * q.y() * q.y())) < 1e-12);
  }
}

TEST_CASE("Clough-Tocher matches an independent reference implementation") {
  // Frozen from scipy.interpolate.CloughTocher2DInterpolator(tol=1e-14) on
  // the same sites and samples.
  std::vector<Eigen::Vector2d> xy;
  std::vector<double> f;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double x = i * 0.9 + 0.13 * ((i * 7 + j * 3) % 5) / 5.0;
      const double y = j * 1.1 + 0.17 * ((i * 11 + j * 5) % 7) / 7.0;
      xy.emplace_back(x, y);
      f.push_back(std::sin(x) * std::cos(y) + 0.3 * x * y);
    }
  }
  const CloughTocherInterpolant ct(xy, f);
  CHECK(ct({1.0, 1.0}).value() == doctest::Approx(0.7342000614735189).epsilon(1e-9));
  CHECK(ct({2.3, 3.1}).value() == doctest::Approx(1.4095273695897572).epsilon(1e-9));
  CHECK(ct({3.7, 0.6}).value() == doctest::Approx(0.29260438787300813).epsilon(1e-9));
  CHECK(ct({0.5, 4.2}).value() == doctest::Approx(0.3660761191014691).epsilon(1e-9));
  CHECK(ct({4.1, 2.2}).value() == doctest::Approx(3.1436368952861256).epsilon(1e-9));
}

TEST_CASE("Clough-Tocher surface is C1 across triangle edges") {
  const auto xy = random_sites(60, 0.0, 2.0, 21);
  std::vector<double> f;
  for (const auto& p : xy) f.push_back(std::exp(-p.squaredNorm()) + p.x());
  const CloughTocherInterpolant ct(xy, f);
  const auto& tri = ct.triangulation();
  int checked = 0;
  for (std::size_t t = 0; t < tri.triangles().size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      if (tri.neighbors()[t][k] < 0) continue;
      const auto& a = tri.vertices()[tri.triangles()[t][(k + 1) % 3]];
      const auto& b = tri.vertices()[tri.triangles()[t][(k + 2) % 3]];
      const Eigen::Vector2d mid = 0.5 * (a + b);
      Eigen::Vector2d n(-(b - a).y(), (b - a).x());
      n.normalize();
      // One-sided slopes with Richardson extrapolation to h -> 0.
      const double h = 1e-4;
      const auto f0 = ct(mid);
      const auto p1 = ct(mid + h * n), p2 = ct(mid + 0.5 * h * n);
      const auto m1 = ct(mid - h * n), m2 = ct(mid - 0.5 * h * n);
      if (!f0 || !p1 || !p2 || !m1 || !m2) continue;
      const double right = 2.0 * (*p2 - *f0) / (0.5 * h) - (*p1 - *f0) / h;
      const double left = 2.0 * (*f0 - *m2) / (0.5 * h) - (*f0 - *m1) / h;
      CHECK(std::abs(right - left) < 1e-3);
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("interpolation error on sin(x)cos(y) from 200 samples") {
  // 14 x 14 lattice spanning [0, 5]^2, interior nodes jittered, plus four extra sites.
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> jit(-0.1, 0.1);
  std::vector<Eigen::Vector2d> xy;
  for (int i = 0; i < 14; ++i) {
    for (int j = 0; j < 14; ++j) {
      double x = i * 5.0 / 13, y = j * 5.0 / 13;
      if (i > 0 && i < 13) x += jit(rng);
      if (j > 0 && j < 13) y += jit(rng);
      xy.emplace_back(x, y);
    }
  }
  for (const Eigen::Vector2d p : {Eigen::Vector2d(1.3, 1.7), Eigen::Vector2d(3.1, 0.9), Eigen::Vector2d(2.2, 4.1),
                                  Eigen::Vector2d(4.4, 2.6)}) {
    xy.push_back(p);
  }
  REQUIRE(xy.size() == 200);
  const HeightField h = interpolate_scattered(
      cloud_of(xy, [](double x, double y) { return std::sin(x) * std::cos(y); }),
      GridSpec::covering({0, 0}, {5, 5}, 0.1));
  double worst = 0.0;
  for (int j = 0; j < h.grid().ny; ++j) {
    for (int i = 0; i < h.grid().nx; ++i) {
      if (!h.valid(i, j)) continue;
      worst = std::max(worst, std::abs(h(i, j) - std::sin(h.grid().x(i)) * std::cos(h.grid().y(j))));
    }
  }
  CHECK(h.all_valid());
  CHECK(worst < 0.05);
}

TEST_CASE("interpolation error paths") {
  const std::vector<Eigen::Vector2d> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  try {
    interpolate_scattered(cloud_of(line, [](double x, double) { return x; }), test::square_grid(2.0, 0.1));
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
  const std::vector<Eigen::Vector2d> tri{{10, 10}, {11, 10}, {10, 11}};
  try {
    interpolate_scattered(cloud_of(tri, [](double, double) { return 0.0; }), test::square_grid(2.0, 0.1));
    FAIL("expected EmptyOverlap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyOverlap);
  }
}
