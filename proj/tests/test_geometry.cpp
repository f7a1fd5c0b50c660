#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "laserplan/error.hpp"
#include "laserplan/fitting.hpp"
#include "laserplan/grid.hpp"
#include "laserplan/rigid_transform.hpp"
#include "test_support.hpp"

using namespace laserplan;

TEST_CASE("grid covering a 10 mm span at 0.05 mm has 201 nodes per axis") {
  const GridSpec g = test::square_grid(5.0, 0.05);
  CHECK(g.nx == 201);
  CHECK(g.ny == 201);
  CHECK(g.x(200) == doctest::Approx(5.0));
  CHECK(g.nearest({0.0, 0.0}).value() == std::make_pair(100, 100));
  CHECK_FALSE(g.nearest({5.1, 0.0}).has_value());
}

TEST_CASE("grid validation rejects bad spacing and tiny grids") {
  GridSpec g;
  g.spacing = {0.0, 0.1};
  CHECK_THROWS_AS(g.validate(), Error);
  g.spacing = {0.1, 0.1};
  g.nx = 1;
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("heightfield hash tracks heights and mask") {
  HeightField a(test::square_grid(1.0, 0.5), 0.0);
  HeightField b = a;
  CHECK(a.hash() == b.hash());
  b.at(3) = 1e-12;
  CHECK(a.hash() != b.hash());
  b = a;
  b.invalidate(0);
  CHECK(a.hash() != b.hash());
}

TEST_CASE("compose: identity, inverse, rotation group") {
  std::mt19937_64 rng(1);
  const RigidTransform t = test::random_transform(rng, 0.1, 2.0, 20.0);
  const RigidTransform c1 = compose(RigidTransform::identity(), t);
  CHECK((c1.matrix() - t.matrix()).cwiseAbs().maxCoeff() < 1e-15);

  const RigidTransform c2 = compose(t, t.inverse());
  CHECK((c2.matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-9);

  const double half_pi = std::numbers::pi / 2;
  const auto rz90 = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), half_pi);
  const auto rz180 = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), std::numbers::pi);
  CHECK((compose(rz90, rz90).matrix() - rz180.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("compose is associative and preserves the rigid invariants") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = test::random_transform(rng, 0.0, 3.1, 50.0);
    const auto b = test::random_transform(rng, 0.0, 3.1, 50.0);
    const auto c = test::random_transform(rng, 0.0, 3.1, 50.0);
    const auto left = compose(compose(a, b), c);
    const auto right = compose(a, compose(b, c));
    CHECK((left.matrix() - right.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(is_valid_rotation(left.rotation()));
    CHECK(is_valid_rotation(left.inverse().rotation()));
  }
}

TEST_CASE("rigid transform rejects improper rotations") {
  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = -1.0;
  CHECK_THROWS_AS(RigidTransform(reflect, Eigen::Vector3d::Zero()), Error);
}

TEST_CASE("fit_plane on exact planes") {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 4; ++j) pts.emplace_back(i * 0.3, j * 0.7, 2.0);
  }
  Plane p = fit_plane(pts);
  CHECK((p.normal - Eigen::Vector3d::UnitZ()).norm() < 1e-12);
  CHECK(p.offset == doctest::Approx(2.0).epsilon(1e-12));

  pts.clear();
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 4; ++j) pts.emplace_back(i * 0.3, j * 0.7, 1.0 - i * 0.3 - j * 0.7);
  }
  p = fit_plane(pts);
  CHECK((p.normal - Eigen::Vector3d(1, 1, 1).normalized()).norm() < 1e-9);
  CHECK(p.offset == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("fit_plane rejects collinear points") {
  std::vector<Eigen::Vector3d> pts{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  try {
    fit_plane(pts);
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
}

TEST_CASE("fit_plane offset under noise: Monte Carlo over 100 seeds") {
  int within = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> n(0.0, 0.01);
    std::vector<Eigen::Vector3d> pts;
    for (int k = 0; k < 100; ++k) pts.emplace_back(u(rng), u(rng), 0.5 + n(rng));
    const Plane p = fit_plane(pts);
    within += std::abs(p.offset - 0.5) < 0.005 ? 1 : 0;
  }
  // Offset std is ~0.001 mm, so 0.005 is a 5-sigma band.
  CHECK(within == 100);
}

TEST_CASE("fit_plane is invariant under rigid motion") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<Eigen::Vector3d> pts;
  for (int k = 0; k < 60; ++k) {
    const double x = u(rng), y = u(rng);
    pts.emplace_back(x, y, 0.2 * x - 0.1 * y + 1.0 + n(rng));
  }
  const Plane base = fit_plane(pts);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = test::random_transform(rng, 0.0, 1.2, 10.0);
    std::vector<Eigen::Vector3d> moved;
    for (const auto& p : pts) moved.push_back(t.apply(p));
    const Plane m = fit_plane(moved);
    const Eigen::Vector3d expected_n = t.rotation() * base.normal;
    const double sign = expected_n.dot(m.normal) >= 0.0 ? 1.0 : -1.0;
    CHECK((sign * m.normal - expected_n).norm() < 1e-9);
    CHECK(sign * m.offset == doctest::Approx(base.offset + expected_n.dot(t.translation())).epsilon(1e-9));
  }
}
