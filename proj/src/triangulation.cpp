#include "laserplan/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/polygon/voronoi.hpp>

#include "laserplan/error.hpp"

namespace laserplan {

namespace {

using IPoint = boost::polygon::point_data<int>;

double orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

}  // namespace

Triangulation::Triangulation(std::span<const Eigen::Vector2d> points) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateInput, "triangulation needs at least 3 points");
  Eigen::Vector2d lo = points[0], hi = points[0];
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite point in triangulation input");
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Eigen::Vector2d center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo).maxCoeff();
  if (!(half > 0.0)) throw Error(ErrorCode::DegenerateInput, "all points coincide");

  // The Voronoi builder is exact on integer sites; 2^29 keeps every
  // intermediate well inside its 32-bit input contract.
  const double scale = static_cast<double>(1 << 29) / half;
  std::map<std::pair<int, int>, int> seen;
  std::vector<IPoint> sites;
  site_of_.resize(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Eigen::Vector2d q = (points[k] - center) * scale;
    const std::pair<int, int> key{static_cast<int>(std::lround(q.x())), static_cast<int>(std::lround(q.y()))};
    auto [it, inserted] = seen.emplace(key, static_cast<int>(vertices_.size()));
    if (inserted) {
      vertices_.push_back(points[k]);
      source_of_.push_back(static_cast<int>(k));
      sites.emplace_back(key.first, key.second);
    }
    site_of_[k] = it->second;
  }
  if (vertices_.size() < 3) throw Error(ErrorCode::DegenerateInput, "fewer than 3 distinct points");

  boost::polygon::voronoi_diagram<double> vd;
  boost::polygon::construct_voronoi(sites.begin(), sites.end(), &vd);

  // Each Voronoi vertex is the circumcenter of one Delaunay cell; sites of
  // its incident cells are in rotational order, so a fan covers cocircular
  // groups.
  std::vector<int> ring;
  for (const auto& vertex : vd.vertices()) {
    ring.clear();
    const auto* start = vertex.incident_edge();
    const auto* e = start;
    do {
      ring.push_back(static_cast<int>(e->cell()->source_index()));
      e = e->rot_next();
    } while (e != start);
    for (std::size_t k = 1; k + 1 < ring.size(); ++k) {
      std::array<int, 3> t{ring[0], ring[k], ring[k + 1]};
      const double o = orient(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
      if (o == 0.0) continue;
      if (o < 0.0) std::swap(t[1], t[2]);
      triangles_.push_back(t);
    }
  }
  if (triangles_.empty()) throw Error(ErrorCode::DegenerateInput, "points are collinear");
  build_neighbors();
}

void Triangulation::build_neighbors() {
  neighbors_.assign(triangles_.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, std::pair<int, int>> edge_owner;  // edge -> (triangle, local opposite vertex)
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = triangles_[t][(k + 1) % 3];
      int b = triangles_[t][(k + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_owner.emplace(std::make_pair(a, b), std::make_pair(static_cast<int>(t), k));
      if (!inserted) {
        neighbors_[t][k] = it->second.first;
        neighbors_[it->second.first][it->second.second] = static_cast<int>(t);
      }
    }
  }
}

std::vector<std::vector<int>> Triangulation::vertex_neighbors() const {
  std::vector<std::vector<int>> adj(vertices_.size());
  for (const auto& t : triangles_) {
    for (int k = 0; k < 3; ++k) {
      adj[t[k]].push_back(t[(k + 1) % 3]);
      adj[t[k]].push_back(t[(k + 2) % 3]);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

Eigen::Vector3d Triangulation::barycentric(int t, const Eigen::Vector2d& p) const {
  const auto& tri = triangles_[t];
  const Eigen::Vector2d& a = vertices_[tri[0]];
  const Eigen::Vector2d& b = vertices_[tri[1]];
  const Eigen::Vector2d& c = vertices_[tri[2]];
  const double det = orient(a, b, c);
  const double l1 = orient(p, b, c) / det;
  const double l2 = orient(a, p, c) / det;
  return {l1, l2, 1.0 - l1 - l2};
}

}  // namespace laserplan
