#pragma once

#include <vector>

#include <Eigen/Core>

#include "laserplan/constraint.hpp"
#include "laserplan/grid.hpp"
#include "laserplan/point_cloud.hpp"

namespace laserplan {

struct ClusterResult {
  std::vector<int> labels;  // -1 = noise
  int cluster_count = 0;
};

/// Density clustering. A point is core when at least min_points points
/// (itself included) lie within eps. Clusters are numbered in order of their
/// first core point; a border point joins the first cluster that reaches it.
ClusterResult dbscan(const PointCloud3& points, double eps, int min_points);

/// Threshold, 3x3 opening, 8-connected labelling, then intensity-weighted
/// centroids in metric coordinates, in scan order of each blob's first node.
/// Throws NoBlobs if nothing survives.
std::vector<Eigen::Vector2d> extract_blob_centroids(const HeightField& image, double threshold);

/// Ceiling from one labelled cluster: the highest point per grid column,
/// interpolated over the grid and raised by clearance; invalid outside the
/// cluster's hull. Throws DegenerateInput on fewer than 3 non-collinear columns.
ConstraintField constraint_from_cluster(const PointCloud3& points, int label, double clearance, const GridSpec& grid);

}  // namespace laserplan
