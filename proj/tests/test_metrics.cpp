#include <doctest.h>

#include <cmath>
#include <random>

#include "laserplan/error.hpp"
#include "laserplan/metrics.hpp"
#include "test_support.hpp"

using namespace laserplan;

namespace {

struct Fields {
  HeightField initial, target;
};

Fields well(double half, double spacing, double depth) {
  Fields f{HeightField(test::square_grid(half, spacing), 0.0), HeightField(test::square_grid(half, spacing), -depth)};
  return f;
}

}  // namespace

TEST_CASE("perfect execution") {
  auto [initial, target] = well(1.0, 0.1, 2.0);
  const MetricReport m = compute_metrics(target, target, initial);
  CHECK(m.rmse == 0.0);
  CHECK(m.mae == 0.0);
  CHECK(m.pct_overcut == 0.0);
  CHECK(m.pct_undercut == 0.0);
  CHECK(m.iou == 1.0);
}

TEST_CASE("nothing cut is a full undercut") {
  auto [initial, target] = well(1.0, 0.1, 2.0);
  target(3, 3) = 0.0;
  const MetricReport m = compute_metrics(initial, target, initial);
  CHECK(m.pct_undercut == doctest::Approx(100.0));
  CHECK(m.pct_overcut == 0.0);
  CHECK(m.iou == 0.0);
}

TEST_CASE("uniform 0.1 mm undercut over a 2 mm well") {
  auto [initial, target] = well(1.0, 0.1, 2.0);
  HeightField achieved(initial.grid(), -1.9);
  const MetricReport m = compute_metrics(achieved, target, initial);
  CHECK(m.rmse == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.mae == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.pct_undercut == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(m.pct_overcut == 0.0);
  CHECK(m.iou == doctest::Approx(0.95).epsilon(1e-12));
}

TEST_CASE("overcut and undercut percentages and IoU are scale covariant") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GridSpec g = test::square_grid(1.0, 0.1);
  HeightField initial(g, 0.0), target(g, 0.0), achieved(g, 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    target.at(k) = -2.0 * u(rng);
    achieved.at(k) = -2.5 * u(rng);
  }
  const MetricReport base = compute_metrics(achieved, target, initial);
  for (double s : {0.1, 3.0, 17.0}) {
    HeightField t2 = target, a2 = achieved;
    for (std::size_t k = 0; k < g.size(); ++k) {
      t2.at(k) *= s;
      a2.at(k) *= s;
    }
    const MetricReport m = compute_metrics(a2, t2, initial);
    CHECK(m.pct_overcut == doctest::Approx(base.pct_overcut).epsilon(1e-10));
    CHECK(m.pct_undercut == doctest::Approx(base.pct_undercut).epsilon(1e-10));
    CHECK(m.iou == doctest::Approx(base.iou).epsilon(1e-10));
    CHECK(m.rmse == doctest::Approx(s * base.rmse).epsilon(1e-10));
  }
}

TEST_CASE("metric error paths") {
  auto [initial, target] = well(1.0, 0.1, 2.0);
  HeightField above = target;
  above(2, 2) = 0.5;
  try {
    compute_metrics(initial, above, initial);
    FAIL("expected InvalidTarget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidTarget);
  }
  const HeightField other(test::square_grid(1.0, 0.2), 0.0);
  try {
    compute_metrics(other, target, initial);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
}

TEST_CASE("residual volume matches an independent summation") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 0.5);
  const GridSpec g = test::square_grid(2.0, 0.05);
  HeightField s(g, 0.0), t(g, 0.0);
  double independent = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    s.at(k) = n(rng);
    t.at(k) = n(rng);
    if (s.at(k) > t.at(k)) independent += (s.at(k) - t.at(k)) * 0.05 * 0.05;
  }
  CHECK(std::abs(residual_volume(s, t) - independent) < 1e-9);
  CHECK(std::abs(residual_volume(s, t, ExecutionPolicy::Parallel) - independent) < 1e-9);
}

TEST_CASE("histogram conserves counts") {
  std::vector<double> v;
  for (int k = 0; k < 1000; ++k) v.push_back(std::sin(k * 0.37));
  const Histogram h = make_histogram(v, 17);
  CHECK(h.total() == v.size());
  CHECK(h.edges.size() == 18);
  const Histogram flat = make_histogram(std::vector<double>(10, 1.0), 4);
  CHECK(flat.total() == 10);
}
