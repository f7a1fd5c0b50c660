#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace laserplan {

/// 2D Delaunay triangulation of a planar point set. Triangles are stored
/// counter-clockwise; neighbors[t][k] is the triangle across the edge
/// opposite vertex k, or -1 on the hull.
class Triangulation {
 public:
  /// Duplicate sites (after quantization to ~1e-9 of the bounding box) are
  /// dropped, keeping the first occurrence; `site_of` maps every input index
  /// to the retained vertex. Throws DegenerateInput when no triangle exists
  /// (fewer than 3 distinct or all collinear points).
  explicit Triangulation(std::span<const Eigen::Vector2d> points);

  const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<std::array<int, 3>>& neighbors() const { return neighbors_; }
  /// Input index -> vertex index.
  const std::vector<int>& site_of() const { return site_of_; }
  /// Vertex index -> first input index that produced it.
  const std::vector<int>& source_of() const { return source_of_; }

  /// Vertex adjacency (sorted, unique) derived from triangle edges.
  std::vector<std::vector<int>> vertex_neighbors() const;

  /// Barycentric coordinates of p in triangle t.
  Eigen::Vector3d barycentric(int t, const Eigen::Vector2d& p) const;

 private:
  void build_neighbors();

  std::vector<Eigen::Vector2d> vertices_;
  std::vector<int> site_of_;
  std::vector<int> source_of_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 3>> neighbors_;
};

}  // namespace laserplan
