#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "laserplan/crater_fit.hpp"
#include "laserplan/error.hpp"
#include "test_support.hpp"

using namespace laserplan;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("noiseless round trip at the average parameters") {
  const auto cloud = test::synthetic_crater(0.334, 0.473, 12.73, 1.939, 6.75, {0.12, -0.07}, 1.1, 0.02);
  const FitResult r = fit_crater(cloud, 6.75);
  CHECK(r.converged);
  CHECK(rel(r.params.A, 0.334) < 1e-6);
  CHECK(rel(r.params.sigma, 0.473) < 1e-6);
  CHECK(rel(r.params.P, 12.73) < 1e-6);
  CHECK(std::abs(r.mu.x() - 0.12) < 1e-6);
  CHECK(std::abs(r.mu.y() + 0.07) < 1e-6);
  CHECK(r.rmse < 1e-8);
  CHECK(r.inliers_stable);

  const FitResult g = fit_crater(cloud, 6.75, {.model = CraterModel::Gaussian});
  CHECK(g.params.P == 1.0);
  CHECK(g.rmse > r.rmse);
}

TEST_CASE("Gaussian-generated crater: both modes agree") {
  const auto cloud = test::synthetic_crater(0.3, 0.45, 1.0, 1.939, 6.75, {0.0, 0.0}, 1.2, 0.02);
  const FitResult sg = fit_crater(cloud, 6.75);
  const FitResult g = fit_crater(cloud, 6.75, {.model = CraterModel::Gaussian});
  CHECK(std::abs(sg.params.P - 1.0) < 0.05);
  CHECK(std::abs(sg.rmse - g.rmse) < 1e-6);
}

TEST_CASE("fix_P pins the sharpness") {
  const auto cloud = test::synthetic_crater(0.334, 0.473, 12.73, 1.939, 6.75, {0.0, 0.0}, 1.1, 0.02, 0.02, 3);
  FitOptions opt;
  opt.fix_P = 12.73;
  const FitResult r = fit_crater(cloud, 6.75, opt);
  CHECK(r.params.P == 12.73);
  CHECK(r.rmse == doctest::Approx(0.02).epsilon(0.15));
}

TEST_CASE("round trip over 50 random parameter draws") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ua(0.1, 0.6), us(0.2, 0.8), up(1.0, 25.0), um(-0.2, 0.2);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double a = ua(rng), s = us(rng), p = up(rng);
    const Eigen::Vector2d mu(um(rng), um(rng));
    const auto cloud = test::synthetic_crater(a, s, p, 1.939, 6.75, mu, 2.3 * s, s / 25.0);
    const FitResult r = fit_crater(cloud, 6.75);
    worst = std::max({worst, rel(r.params.A, a), rel(r.params.sigma, s), rel(r.params.P, p)});
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("noisy fits: median sigma and A within 5 percent over 50 seeds") {
  std::vector<double> err_sigma, err_a;
  for (unsigned seed = 0; seed < 50; ++seed) {
    const auto cloud = test::synthetic_crater(0.334, 0.473, 12.73, 1.939, 6.75, {0.0, 0.0}, 1.1, 0.025, 0.02, seed);
    const FitResult r = fit_crater(cloud, 6.75);
    err_sigma.push_back(rel(r.params.sigma, 0.473));
    err_a.push_back(rel(r.params.A, 0.334));
  }
  std::nth_element(err_sigma.begin(), err_sigma.begin() + 25, err_sigma.end());
  std::nth_element(err_a.begin(), err_a.begin() + 25, err_a.end());
  CHECK(err_sigma[25] < 0.05);
  CHECK(err_a[25] < 0.05);
}

TEST_CASE("LM objective never increases across accepted steps") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto cloud = test::synthetic_crater(0.3, 0.5, 8.0, 1.939, 8.29, {0.05, 0.0}, 1.2, 0.03, 0.02, seed);
    for (auto model : {CraterModel::SuperGaussian, CraterModel::Gaussian}) {
      const FitResult r = fit_crater(cloud, 8.29, {.model = model});
      for (const auto& round : r.cost_history) {
        for (std::size_t k = 1; k < round.size(); ++k) CHECK(round[k] <= round[k - 1]);
      }
    }
  }
}

TEST_CASE("fitting the threshold jointly") {
  const auto cloud = test::synthetic_crater(0.334, 0.473, 12.73, 1.939, 6.75, {0.0, 0.0}, 1.1, 0.02);
  FitOptions opt;
  opt.fit_phi = true;
  opt.phi = 1.5;
  const FitResult r = fit_crater(cloud, 6.75, opt);
  // A and phi trade off at a single energy, but the crater itself is matched.
  CHECK(r.rmse < 1e-3);
  CHECK(r.params.A * (6.75 - r.params.phi) == doctest::Approx(0.334 * (6.75 - 1.939)).epsilon(1e-3));
}

TEST_CASE("fit error paths") {
  PointCloud3 small;
  for (int k = 0; k < 10; ++k) small.points.emplace_back(k, 0, -1);
  CHECK_THROWS_AS(fit_crater(small, 6.75), Error);

  const auto flat = test::synthetic_crater(0.334, 0.473, 12.73, 1.939, 1.5, {0.0, 0.0}, 1.1, 0.02, 0.02, 1);
  try {
    fit_crater(flat, 6.75);
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
  const auto crater = test::synthetic_crater(0.334, 0.473, 12.73, 1.939, 6.75, {0.0, 0.0}, 1.1, 0.02);
  FitOptions tight;
  tight.max_iterations = 1;
  try {
    fit_crater(crater, 6.75, tight);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
}
