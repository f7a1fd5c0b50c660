#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "laserplan/error.hpp"
#include "laserplan/perception.hpp"
#include "test_support.hpp"

using namespace laserplan;

namespace {

PointCloud3 two_blobs(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.1);
  PointCloud3 c;
  for (int k = 0; k < 100; ++k) c.points.emplace_back(n(rng), n(rng), n(rng));
  for (int k = 0; k < 100; ++k) c.points.emplace_back(5.0 + n(rng), n(rng), n(rng));
  return c;
}

}  // namespace

TEST_CASE("dbscan separates two blobs") {
  const auto c = two_blobs(1);
  const ClusterResult r = dbscan(c, 0.3, 5);
  CHECK(r.cluster_count == 2);
  std::set<int> first(r.labels.begin(), r.labels.begin() + 100);
  std::set<int> second(r.labels.begin() + 100, r.labels.end());
  first.erase(-1);
  second.erase(-1);
  CHECK(first == std::set<int>{0});
  CHECK(second == std::set<int>{1});
  for (int id = 0; id < r.cluster_count; ++id) CHECK(std::count(r.labels.begin(), r.labels.end(), id) >= 5);
}

TEST_CASE("dbscan: identical points and sparse points") {
  PointCloud3 same;
  for (int k = 0; k < 10; ++k) same.points.emplace_back(1.0, 2.0, 3.0);
  const ClusterResult a = dbscan(same, 0.01, 3);
  CHECK(a.cluster_count == 1);
  for (int l : a.labels) CHECK(l == 0);

  PointCloud3 sparse;
  for (int k = 0; k < 10; ++k) sparse.points.emplace_back(k * 10.0, 0.0, 0.0);
  const ClusterResult b = dbscan(sparse, 1.0, 2);
  CHECK(b.cluster_count == 0);
  for (int l : b.labels) CHECK(l == -1);

  CHECK_THROWS_AS(dbscan(sparse, 0.0, 2), Error);
  CHECK_THROWS_AS(dbscan(sparse, 1.0, 0), Error);
}

TEST_CASE("dbscan partition is stable under permutation") {
  const auto c = two_blobs(7);
  const ClusterResult base = dbscan(c, 0.3, 5);
  std::vector<std::size_t> perm(c.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  PointCloud3 shuffled;
  for (auto k : perm) shuffled.points.push_back(c.points[k]);
  const ClusterResult r = dbscan(shuffled, 0.3, 5);
  CHECK(r.cluster_count == base.cluster_count);
  // Same-cluster relation must match on core structure: compare noise sets and co-membership.
  for (std::size_t a = 0; a < perm.size(); a += 7) {
    for (std::size_t b = 0; b < perm.size(); b += 11) {
      const int la = base.labels[perm[a]], lb = base.labels[perm[b]];
      const int ra = r.labels[a], rb = r.labels[b];
      CHECK((la == -1) == (ra == -1));
      if (la >= 0 && lb >= 0) CHECK((la == lb) == (ra == rb));
    }
  }
}

namespace {

HeightField dot_image(const GridSpec& g, const std::vector<Eigen::Vector2d>& centres, double radius, double scale) {
  HeightField h(g, 0.0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      for (const auto& c : centres) {
        const double r = (g.node(i, j) - c).norm();
        if (r < radius) h.set(g.index(i, j), scale * (1.0 - 0.5 * r / radius));
      }
    }
  }
  return h;
}

}  // namespace

TEST_CASE("blob centroids of a 3x3 dot grid") {
  const GridSpec g = test::square_grid(5.0, 0.1);
  std::vector<Eigen::Vector2d> centres;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) centres.emplace_back(3.0 * b + 0.037, 3.0 * a - 0.021);
  }
  const auto found = extract_blob_centroids(dot_image(g, centres, 0.6, 1.0), 0.2);
  REQUIRE(found.size() == 9);
  for (std::size_t k = 0; k < 9; ++k) CHECK((found[k] - centres[k]).norm() < 0.05);

  // Intensity scale is irrelevant when the threshold scales with it.
  const auto scaled = extract_blob_centroids(dot_image(g, centres, 0.6, 7.0), 1.4);
  REQUIRE(scaled.size() == 9);
  for (std::size_t k = 0; k < 9; ++k) CHECK((scaled[k] - found[k]).norm() < 1e-12);
}

TEST_CASE("blob centroid of a symmetric 4-cell block is exact") {
  const GridSpec g = test::square_grid(1.0, 0.1);
  HeightField h(g, 0.0);
  for (int j = 8; j <= 12; ++j) {
    for (int i = 8; i <= 12; ++i) h.set(g.index(i, j), 1.0 + 0.1 * (std::abs(i - 10) + std::abs(j - 10)));
  }
  const auto found = extract_blob_centroids(h, 0.5);
  REQUIRE(found.size() == 1);
  CHECK((found[0] - g.node(10, 10)).norm() < 1e-12);
}

TEST_CASE("blank or speckled image has no blobs") {
  const GridSpec g = test::square_grid(1.0, 0.1);
  HeightField blank(g, 0.0);
  CHECK_THROWS_AS(extract_blob_centroids(blank, 0.5), Error);
  HeightField speckle(g, 0.0);
  speckle.set(g.index(3, 3), 1.0);
  speckle.set(g.index(12, 9), 1.0);
  try {
    extract_blob_centroids(speckle, 0.5);
    FAIL("expected NoBlobs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoBlobs);
  }
}

namespace {

PointCloud3 sphere_cap(const Eigen::Vector3d& centre, double radius, double max_polar, int rings) {
  PointCloud3 c;
  for (int r = 0; r <= rings; ++r) {
    const double polar = max_polar * r / rings;
    const int around = std::max(1, 6 * r);
    for (int k = 0; k < around; ++k) {
      const double az = 2.0 * M_PI * k / around;
      c.points.emplace_back(centre.x() + radius * std::sin(polar) * std::cos(az),
                            centre.y() + radius * std::sin(polar) * std::sin(az), centre.z() + radius * std::cos(polar));
    }
  }
  return c;
}

}  // namespace

TEST_CASE("constraint from a sphere cap cluster") {
  const Eigen::Vector3d centre(0.2, -0.1, -3.0);
  const double radius = 1.5;
  PointCloud3 cap = sphere_cap(centre, radius, 1.0, 30);
  // Noise points below the cap in the same columns must not lower the ceiling.
  const std::size_t n_cap = cap.size();
  for (std::size_t k = 0; k < n_cap; k += 5) cap.points.push_back(cap.points[k] - Eigen::Vector3d(0, 0, 0.5));
  cap.labels = std::vector<int>(cap.size(), 3);
  cap.points.emplace_back(4.0, 4.0, 10.0);
  cap.labels->push_back(0);

  const GridSpec g = test::square_grid(3.0, 0.05);
  for (double clearance : {0.0, 0.2}) {
    const ConstraintField f = constraint_from_cluster(cap, 3, clearance, g);
    CHECK(f.active_count() > 0);
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        if (!f.ceiling.valid(i, j)) continue;
        const Eigen::Vector2d d = g.node(i, j) - centre.head<2>();
        const double top = centre.z() + std::sqrt(std::max(0.0, radius * radius - d.squaredNorm()));
        worst = std::max(worst, std::abs(f.ceiling(i, j) - (top + clearance)));
      }
    }
    CHECK(worst < 0.05);
    CHECK_FALSE(f.ceiling.valid(0, 0));
  }
}

TEST_CASE("constraint from cluster error paths") {
  PointCloud3 two;
  two.points = {{0, 0, 0}, {1, 0, 0}};
  two.labels = std::vector<int>{0, 0};
  try {
    constraint_from_cluster(two, 0, 0.1, test::square_grid(2.0, 0.1));
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
  PointCloud3 unlabeled;
  unlabeled.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_THROWS_AS(constraint_from_cluster(unlabeled, 0, 0.1, test::square_grid(2.0, 0.1)), Error);
}
