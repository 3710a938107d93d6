#include "clustering.hpp"

#include <algorithm>
#include <limits>

namespace colorwai::colorlab::detail {
namespace {

void absorb(Cluster& into, const LabColor& lab, double weight) {
  const double total = into.weight + weight;
  if (total <= 0.0) return;
  const double t = weight / total;
  into.centroid.l += t * (lab.l - into.centroid.l);
  into.centroid.a += t * (lab.a - into.centroid.a);
  into.centroid.b += t * (lab.b - into.centroid.b);
  into.weight = total;
}

// Closest pair (i < j); returns false when fewer than two clusters.
bool closest_pair(const std::vector<Cluster>& clusters, std::size_t& bi, std::size_t& bj,
                  double& best) {
  best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    for (std::size_t j = i + 1; j < clusters.size(); ++j) {
      const double d = delta_e76(clusters[i].centroid, clusters[j].centroid);
      if (d < best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  return clusters.size() >= 2;
}

void merge_pair(std::vector<Cluster>& clusters, std::size_t i, std::size_t j) {
  absorb(clusters[i], clusters[j].centroid, clusters[j].weight);
  clusters[i].first_seen = std::min(clusters[i].first_seen, clusters[j].first_seen);
  clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
}

}  // namespace

std::vector<Cluster> leader_follower(const std::vector<WeightedLab>& points, double spawn) {
  std::vector<Cluster> clusters;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& pt = points[p];
    if (pt.weight <= 0.0) continue;
    std::size_t best = clusters.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double d = delta_e76(clusters[c].centroid, pt.lab);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best < clusters.size() && best_d <= spawn) {
      absorb(clusters[best], pt.lab, pt.weight);
    } else {
      clusters.push_back({pt.lab, pt.weight, p});
    }
  }
  return clusters;
}

void merge_close(std::vector<Cluster>& clusters, double radius) {
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (closest_pair(clusters, i, j, d) && d < radius) merge_pair(clusters, i, j);
}

void merge_to_count(std::vector<Cluster>& clusters, std::size_t target) {
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (clusters.size() > target && closest_pair(clusters, i, j, d)) merge_pair(clusters, i, j);
}

void sort_by_weight(std::vector<Cluster>& clusters) {
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& x, const Cluster& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    return x.first_seen < y.first_seen;
  });
}

}  // namespace colorwai::colorlab::detail
