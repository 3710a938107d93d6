#pragma once

// Leader-follower clustering shared by palette extraction and codebook
// construction.

#include <vector>

#include "colorwai/color.hpp"

namespace colorwai::colorlab::detail {

struct WeightedLab {
  LabColor lab;
  double weight = 1.0;
};

struct Cluster {
  LabColor centroid;
  double weight = 0.0;
  std::size_t first_seen = 0;
};

/// Assigns each point to the nearest centroid when within `spawn`, else
/// spawns a new cluster. Centroids are running weighted means.
std::vector<Cluster> leader_follower(const std::vector<WeightedLab>& points, double spawn);

/// Repeatedly merges the closest pair while its distance is below `radius`.
void merge_close(std::vector<Cluster>& clusters, double radius);

/// Merges closest pairs until at most `target` clusters remain.
void merge_to_count(std::vector<Cluster>& clusters, std::size_t target);

/// Sorts by descending weight; ties keep first-seen order.
void sort_by_weight(std::vector<Cluster>& clusters);

}  // namespace colorwai::colorlab::detail
