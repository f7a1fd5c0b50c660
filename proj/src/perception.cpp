#include "laserplan/perception.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

#include "laserplan/error.hpp"
#include "laserplan/scattered_interp.hpp"

namespace laserplan {

namespace {

struct CellKey {
  long long x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
    h ^= static_cast<std::size_t>(k.y) * 19349663u;
    h ^= static_cast<std::size_t>(k.z) * 83492791u;
    return h;
  }
};

class SpatialHash {
 public:
  SpatialHash(const std::vector<Eigen::Vector3d>& pts, double cell) : pts_(pts), cell_(cell) {
    for (std::size_t k = 0; k < pts.size(); ++k) cells_[key(pts[k])].push_back(k);
  }

  std::vector<std::size_t> within(std::size_t q, double eps) const {
    std::vector<std::size_t> out;
    const CellKey c = key(pts_[q]);
    const double eps2 = eps * eps;
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        for (long long dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t k : it->second) {
            if ((pts_[k] - pts_[q]).squaredNorm() <= eps2) out.push_back(k);
          }
        }
      }
    }
    return out;
  }

 private:
  CellKey key(const Eigen::Vector3d& p) const {
    return {static_cast<long long>(std::floor(p.x() / cell_)), static_cast<long long>(std::floor(p.y() / cell_)),
            static_cast<long long>(std::floor(p.z() / cell_))};
  }

  const std::vector<Eigen::Vector3d>& pts_;
  double cell_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

}  // namespace

ClusterResult dbscan(const PointCloud3& points, double eps, int min_points) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (min_points < 1) throw Error(ErrorCode::InvalidArgument, "min_points must be >= 1");
  points.validate();
  constexpr int kUnseen = -2;
  ClusterResult out;
  out.labels.assign(points.size(), kUnseen);
  const SpatialHash hash(points.points, eps);
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (out.labels[p] != kUnseen) continue;
    const auto seeds = hash.within(p, eps);
    if (static_cast<int>(seeds.size()) < min_points) {
      out.labels[p] = -1;
      continue;
    }
    const int id = out.cluster_count++;
    out.labels[p] = id;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      if (out.labels[q] == -1) out.labels[q] = id;  // border point
      if (out.labels[q] != kUnseen) continue;
      out.labels[q] = id;
      const auto more = hash.within(q, eps);
      if (static_cast<int>(more.size()) >= min_points) queue.insert(queue.end(), more.begin(), more.end());
    }
  }
  return out;
}

std::vector<Eigen::Vector2d> extract_blob_centroids(const HeightField& image, double threshold) {
  const GridSpec& g = image.grid();
  std::vector<std::uint8_t> on(g.size(), 0);
  bool any = false;
  for (std::size_t k = 0; k < g.size(); ++k) {
    on[k] = image.valid_at(k) && image.at(k) > threshold;
    any = any || on[k];
  }
  if (!any) throw Error(ErrorCode::NoBlobs, "nothing above the threshold");

  // 3x3 opening; pixels beyond the border count as background.
  const auto filter = [&](const std::vector<std::uint8_t>& in, bool erode) {
    std::vector<std::uint8_t> out(in.size(), 0);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        bool all = true, some = false;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const int ii = i + di, jj = j + dj;
            const bool v = ii >= 0 && jj >= 0 && ii < g.nx && jj < g.ny && in[g.index(ii, jj)];
            all = all && v;
            some = some || v;
          }
        }
        out[g.index(i, j)] = erode ? all : some;
      }
    }
    return out;
  };
  const auto opened = filter(filter(on, true), false);

  std::vector<int> label(g.size(), -1);
  std::vector<Eigen::Vector2d> centroids;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t start = g.index(i, j);
      if (!opened[start] || label[start] >= 0) continue;
      const int id = static_cast<int>(centroids.size());
      Eigen::Vector2d acc = Eigen::Vector2d::Zero();
      double mass = 0.0;
      std::deque<std::pair<int, int>> queue{{i, j}};
      label[start] = id;
      while (!queue.empty()) {
        const auto [ci, cj] = queue.front();
        queue.pop_front();
        const double w = image(ci, cj);
        acc += w * g.node(ci, cj);
        mass += w;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const int ii = ci + di, jj = cj + dj;
            if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
            const std::size_t k = g.index(ii, jj);
            if (!opened[k] || label[k] >= 0) continue;
            label[k] = id;
            queue.emplace_back(ii, jj);
          }
        }
      }
      centroids.push_back(acc / mass);
    }
  }
  if (centroids.empty()) throw Error(ErrorCode::NoBlobs, "no blob survived the opening");
  return centroids;
}

ConstraintField constraint_from_cluster(const PointCloud3& points, int label, double clearance, const GridSpec& grid) {
  points.validate();
  if (!points.labels) throw Error(ErrorCode::DegenerateInput, "point cloud carries no labels");
  if (!(clearance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "clearance must be >= 0");
  grid.validate();
  std::map<std::pair<int, int>, std::size_t> top;  // column -> highest point
  for (std::size_t k = 0; k < points.size(); ++k) {
    if ((*points.labels)[k] != label) continue;
    const Eigen::Vector3d& p = points.points[k];
    const auto col = std::make_pair(static_cast<int>(std::lround((p.x() - grid.origin.x()) / grid.spacing.x())),
                                    static_cast<int>(std::lround((p.y() - grid.origin.y()) / grid.spacing.y())));
    const auto it = top.find(col);
    if (it == top.end() || points.points[it->second].z() < p.z()) top[col] = k;
  }
  if (top.size() < 3) throw Error(ErrorCode::DegenerateInput, "cluster spans fewer than 3 columns");
  PointCloud3 cap;
  for (const auto& [col, k] : top) cap.points.push_back(points.points[k]);
  ConstraintField out{interpolate_scattered(cap, grid)};
  for (std::size_t k = 0; k < out.ceiling.size(); ++k) {
    if (out.ceiling.valid_at(k)) out.ceiling.at(k) += clearance;
  }
  return out;
}

}  // namespace laserplan
