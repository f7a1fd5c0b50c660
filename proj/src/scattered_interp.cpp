#include "laserplan/scattered_interp.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/LU>

#include "laserplan/error.hpp"

namespace laserplan {

namespace {

std::vector<double> vertex_values(const Triangulation& tri, std::span<const double> values) {
  std::vector<double> f(tri.vertices().size());
  for (std::size_t v = 0; v < f.size(); ++v) f[v] = values[tri.source_of()[v]];
  return f;
}

}  // namespace

CloughTocherInterpolant::CloughTocherInterpolant(std::span<const Eigen::Vector2d> xy, std::span<const double> values)
    : tri_(xy) {
  if (values.size() != xy.size()) throw Error(ErrorCode::InvalidArgument, "value count mismatch");
  init(values);
  estimate_gradients();
  patches_.reserve(tri_.triangles().size());
  for (std::size_t t = 0; t < tri_.triangles().size(); ++t) patches_.push_back(build_patch(static_cast<int>(t)));
}

CloughTocherInterpolant::CloughTocherInterpolant(std::span<const Eigen::Vector2d> xy, std::span<const double> values,
                                                 std::span<const Eigen::Vector2d> gradients)
    : tri_(xy) {
  if (values.size() != xy.size() || gradients.size() != xy.size()) {
    throw Error(ErrorCode::InvalidArgument, "value/gradient count mismatch");
  }
  init(values);
  grad_.resize(f_.size());
  for (std::size_t v = 0; v < f_.size(); ++v) grad_[v] = gradients[tri_.source_of()[v]];
  patches_.reserve(tri_.triangles().size());
  for (std::size_t t = 0; t < tri_.triangles().size(); ++t) patches_.push_back(build_patch(static_cast<int>(t)));
}

void CloughTocherInterpolant::init(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite sample value");
  }
  f_ = vertex_values(tri_, values);
}

// Minimizes the approximate curvature of the interpolant along every edge
// (Nielson's functional), one vertex at a time until the update stalls.
void CloughTocherInterpolant::estimate_gradients() {
  constexpr int kMaxIter = 400;
  constexpr double kTol = 1e-13;
  const auto& pts = tri_.vertices();
  const auto adj = tri_.vertex_neighbors();
  grad_.assign(pts.size(), Eigen::Vector2d::Zero());
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double err = 0.0;
    for (std::size_t v = 0; v < pts.size(); ++v) {
      Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
      Eigen::Vector2d s = Eigen::Vector2d::Zero();
      for (int w : adj[v]) {
        const Eigen::Vector2d e = pts[w] - pts[v];
        const double len = e.norm();
        const double l3 = len * len * len;
        const double df2 = -e.dot(grad_[w]);
        q += 4.0 * e * e.transpose() / l3;
        s += (6.0 * (f_[v] - f_[w]) - 2.0 * df2) * e / l3;
      }
      const double det = q.determinant();
      if (!(std::abs(det) > 0.0)) continue;
      const Eigen::Vector2d r = q.inverse() * s;
      const double change = (grad_[v] + r).cwiseAbs().maxCoeff() / std::max(1.0, r.cwiseAbs().maxCoeff());
      grad_[v] = -r;
      err = std::max(err, change);
    }
    if (err < kTol) break;
  }
}

CloughTocherInterpolant::Patch CloughTocherInterpolant::build_patch(int t) const {
  const auto& tri = tri_.triangles()[t];
  const auto& pts = tri_.vertices();
  const Eigen::Vector2d e12 = pts[tri[1]] - pts[tri[0]];
  const Eigen::Vector2d e23 = pts[tri[2]] - pts[tri[1]];
  const Eigen::Vector2d e31 = pts[tri[0]] - pts[tri[2]];
  const Eigen::Vector2d& g1 = grad_[tri[0]];
  const Eigen::Vector2d& g2 = grad_[tri[1]];
  const Eigen::Vector2d& g3 = grad_[tri[2]];

  const double df12 = g1.dot(e12), df21 = -g2.dot(e12);
  const double df23 = g2.dot(e23), df32 = -g3.dot(e23);
  const double df31 = g3.dot(e31), df13 = -g1.dot(e31);

  Patch c{};
  c.c3000 = f_[tri[0]];
  c.c2100 = (df12 + 3 * c.c3000) / 3;
  c.c2010 = (df13 + 3 * c.c3000) / 3;
  c.c0300 = f_[tri[1]];
  c.c1200 = (df21 + 3 * c.c0300) / 3;
  c.c0210 = (df23 + 3 * c.c0300) / 3;
  c.c0030 = f_[tri[2]];
  c.c1020 = (df31 + 3 * c.c0030) / 3;
  c.c0120 = (df32 + 3 * c.c0030) / 3;

  c.c2001 = (c.c2100 + c.c2010 + c.c3000) / 3;
  c.c0201 = (c.c1200 + c.c0300 + c.c0210) / 3;
  c.c0021 = (c.c1020 + c.c0120 + c.c0030) / 3;

  // Cross-boundary derivative along each edge must be linear; the direction
  // is fixed by the neighbour's centroid so adjacent patches agree.
  double g[3];
  for (int k = 0; k < 3; ++k) {
    const int nb = tri_.neighbors()[t][k];
    if (nb < 0) {
      g[k] = -0.5;
      continue;
    }
    const auto& ntri = tri_.triangles()[nb];
    const Eigen::Vector2d centroid = (pts[ntri[0]] + pts[ntri[1]] + pts[ntri[2]]) / 3.0;
    const Eigen::Vector3d b = tri_.barycentric(t, centroid);
    if (k == 0) {
      g[k] = (2 * b[2] + b[1] - 1) / (2 - 3 * b[2] - 3 * b[1]);
    } else if (k == 1) {
      g[k] = (2 * b[0] + b[2] - 1) / (2 - 3 * b[0] - 3 * b[2]);
    } else {
      g[k] = (2 * b[1] + b[0] - 1) / (2 - 3 * b[1] - 3 * b[0]);
    }
  }

  c.c0111 = (g[0] * (-c.c0300 + 3 * c.c0210 - 3 * c.c0120 + c.c0030) +
             (-c.c0300 + 2 * c.c0210 - c.c0120 + c.c0021 + c.c0201)) / 2;
  c.c1011 = (g[1] * (-c.c0030 + 3 * c.c1020 - 3 * c.c2010 + c.c3000) +
             (-c.c0030 + 2 * c.c1020 - c.c2010 + c.c2001 + c.c0021)) / 2;
  c.c1101 = (g[2] * (-c.c3000 + 3 * c.c2100 - 3 * c.c1200 + c.c0300) +
             (-c.c3000 + 2 * c.c2100 - c.c1200 + c.c2001 + c.c0201)) / 2;

  c.c1002 = (c.c1101 + c.c1011 + c.c2001) / 3;
  c.c0102 = (c.c1101 + c.c0111 + c.c0201) / 3;
  c.c0012 = (c.c1011 + c.c0111 + c.c0021) / 3;
  c.c0003 = (c.c1002 + c.c0102 + c.c0012) / 3;
  return c;
}

double CloughTocherInterpolant::evaluate(const Patch& c, const Eigen::Vector3d& bary) {
  // Split coordinates: one of b1..b3 is zero, picking the micro-triangle.
  const double m = bary.minCoeff();
  const double b1 = bary[0] - m, b2 = bary[1] - m, b3 = bary[2] - m, b4 = 3 * m;
  return b1 * b1 * b1 * c.c3000 + 3 * b1 * b1 * b2 * c.c2100 + 3 * b1 * b1 * b3 * c.c2010 +
         3 * b1 * b1 * b4 * c.c2001 + 3 * b1 * b2 * b2 * c.c1200 + 6 * b1 * b2 * b4 * c.c1101 +
         3 * b1 * b3 * b3 * c.c1020 + 6 * b1 * b3 * b4 * c.c1011 + 3 * b1 * b4 * b4 * c.c1002 +
         b2 * b2 * b2 * c.c0300 + 3 * b2 * b2 * b3 * c.c0210 + 3 * b2 * b2 * b4 * c.c0201 +
         3 * b2 * b3 * b3 * c.c0120 + 6 * b2 * b3 * b4 * c.c0111 + 3 * b2 * b4 * b4 * c.c0102 +
         b3 * b3 * b3 * c.c0030 + 3 * b3 * b3 * b4 * c.c0021 + 3 * b3 * b4 * b4 * c.c0012 + b4 * b4 * b4 * c.c0003;
}

std::optional<double> CloughTocherInterpolant::operator()(const Eigen::Vector2d& p) const {
  constexpr double kEps = 1e-12;
  for (std::size_t t = 0; t < patches_.size(); ++t) {
    const Eigen::Vector3d b = tri_.barycentric(static_cast<int>(t), p);
    if (b.minCoeff() >= -kEps) return evaluate(patches_[t], b);
  }
  return std::nullopt;
}

HeightField CloughTocherInterpolant::sample(const GridSpec& grid) const {
  constexpr double kEps = 1e-12;
  HeightField out = HeightField::empty(grid);
  const auto& pts = tri_.vertices();
  for (std::size_t t = 0; t < patches_.size(); ++t) {
    const auto& tri = tri_.triangles()[t];
    Eigen::Vector2d lo = pts[tri[0]].cwiseMin(pts[tri[1]]).cwiseMin(pts[tri[2]]);
    Eigen::Vector2d hi = pts[tri[0]].cwiseMax(pts[tri[1]]).cwiseMax(pts[tri[2]]);
    const int i0 = std::max(0, static_cast<int>(std::floor((lo.x() - grid.origin.x()) / grid.spacing.x())));
    const int j0 = std::max(0, static_cast<int>(std::floor((lo.y() - grid.origin.y()) / grid.spacing.y())));
    const int i1 = std::min(grid.nx - 1, static_cast<int>(std::ceil((hi.x() - grid.origin.x()) / grid.spacing.x())));
    const int j1 = std::min(grid.ny - 1, static_cast<int>(std::ceil((hi.y() - grid.origin.y()) / grid.spacing.y())));
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const std::size_t k = grid.index(i, j);
        if (out.valid_at(k)) continue;
        const Eigen::Vector3d b = tri_.barycentric(static_cast<int>(t), grid.node(i, j));
        if (b.minCoeff() < -kEps) continue;
        out.set(k, evaluate(patches_[t], b.cwiseMax(0.0) / b.cwiseMax(0.0).sum()));
      }
    }
  }
  if (out.valid_count() == 0) throw Error(ErrorCode::EmptyOverlap, "grid does not intersect the hull of the samples");
  return out;
}

HeightField interpolate_scattered(const PointCloud3& points, const GridSpec& target) {
  points.validate();
  target.validate();
  std::vector<Eigen::Vector2d> xy;
  std::vector<double> z;
  xy.reserve(points.size());
  z.reserve(points.size());
  for (const auto& p : points.points) {
    xy.emplace_back(p.x(), p.y());
    z.push_back(p.z());
  }
  const CloughTocherInterpolant ct(xy, z);
  return ct.sample(target);
}

}  // namespace laserplan
