#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "clustering.hpp"
#include "colorwai/colorlab.hpp"
#include "colorwai/error.hpp"

namespace colorwai::colorlab {
namespace {

struct HueBucket {
  double center;
  const char* name;
};

constexpr std::array<HueBucket, 8> kHueBuckets{{{0.0, "red"},
                                                {30.0, "orange"},
                                                {58.0, "yellow"},
                                                {120.0, "green"},
                                                {180.0, "cyan"},
                                                {225.0, "blue"},
                                                {275.0, "violet"},
                                                {320.0, "magenta"}}};

std::vector<detail::Cluster> cluster_at(const std::vector<detail::WeightedLab>& points, double threshold) {
  auto clusters = detail::leader_follower(points, threshold);
  detail::merge_close(clusters, threshold / 2.0);
  return clusters;
}

}  // namespace

std::string color_name(const LabColor& lab, const HsvColor& hsv) {
  if (hsv.s < 0.1) {
    if (lab.l < 30.0) return "black";
    if (lab.l > 85.0) return "white";
    return "gray";
  }
  const HueBucket* best = &kHueBuckets[0];
  for (const auto& b : kHueBuckets)
    if (hue_distance(hsv.h, b.center) < hue_distance(hsv.h, best->center)) best = &b;
  return (lab.l < 45.0 ? std::string("dark ") : std::string()) + best->name;
}

const CodebookEntry& ColorCodebook::at(int id) const {
  if (!valid_id(id)) throw ValidationError("invalid color id " + std::to_string(id));
  return entries[static_cast<std::size_t>(id)];
}

bool ColorCodebook::is_chromatic(int id, double achromatic_saturation) const {
  return at(id).hsv.s >= achromatic_saturation;
}

ColorCodebook build_codebook(std::span<const Palette> palettes, int k) {
  if (k < 1) throw ValidationError("codebook size must be at least 1");

  std::vector<detail::WeightedLab> points;
  std::set<std::tuple<double, double, double>> distinct;
  for (const auto& p : palettes) {
    for (const auto& e : p.entries) {
      if (e.share <= 0.0) continue;
      points.push_back({e.lab, e.share});
      distinct.emplace(e.lab.l, e.lab.a, e.lab.b);
    }
  }
  if (distinct.size() < static_cast<std::size_t>(k)) throw ValidationError("degenerate corpus");

  // Cluster counts grow roughly cubically as the threshold shrinks, so find a
  // bracket by halving from a threshold that yields a single cluster, then
  // bisect inside it.
  double hi = 400.0;
  std::vector<detail::Cluster> best = cluster_at(points, hi);
  double lo = hi;
  std::vector<detail::Cluster> lo_clusters = best;
  while (lo_clusters.size() < static_cast<std::size_t>(k) && lo > 1e-9) {
    hi = lo;
    best = lo_clusters;
    lo /= 2.0;
    lo_clusters = cluster_at(points, lo);
  }
  if (lo_clusters.size() == static_cast<std::size_t>(k)) {
    best = lo_clusters;
  } else {
    bool exact = false;
    for (int iter = 0; iter < 60 && !exact; ++iter) {
      const double mid = 0.5 * (lo + hi);
      auto c = cluster_at(points, mid);
      if (c.size() == static_cast<std::size_t>(k)) {
        best = std::move(c);
        exact = true;
      } else if (c.size() > static_cast<std::size_t>(k)) {
        lo = mid;
        lo_clusters = std::move(c);
      } else {
        hi = mid;
      }
    }
    if (!exact) {
      // No threshold yields exactly k; fall back to the finest over-full
      // clustering and merge its closest pairs.
      best = std::move(lo_clusters);
      detail::merge_to_count(best, static_cast<std::size_t>(k));
    }
  }
  detail::sort_by_weight(best);

  ColorCodebook book;
  std::map<std::string, int> name_uses;
  for (std::size_t i = 0; i < best.size(); ++i) {
    CodebookEntry e;
    e.id = static_cast<int>(i);
    e.lab = best[i].centroid;
    e.hsv = rgb_to_hsv(lab_to_rgb(e.lab).rgb);
    e.name = color_name(e.lab, e.hsv);
    const int uses = ++name_uses[e.name];
    if (uses > 1) e.name += " " + std::to_string(uses);
    book.entries.push_back(std::move(e));
  }
  return book;
}

void to_json(nlohmann::json& j, const ColorCodebook& book) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : book.entries) {
    entries.push_back({{"id", e.id},
                       {"name", e.name},
                       {"lab", {e.lab.l, e.lab.a, e.lab.b}},
                       {"hsv", {e.hsv.h, e.hsv.s, e.hsv.v}}});
  }
  j = {{"version", book.version}, {"K", book.entries.size()}, {"entries", std::move(entries)}};
}

void from_json(const nlohmann::json& j, ColorCodebook& book) {
  book = ColorCodebook{};
  book.version = j.at("version").get<int>();
  const auto k = j.at("K").get<std::size_t>();
  for (const auto& e : j.at("entries")) {
    CodebookEntry entry;
    entry.id = e.at("id").get<int>();
    entry.name = e.at("name").get<std::string>();
    const auto& lab = e.at("lab");
    const auto& hsv = e.at("hsv");
    entry.lab = {lab.at(0).get<double>(), lab.at(1).get<double>(), lab.at(2).get<double>()};
    entry.hsv = {hsv.at(0).get<double>(), hsv.at(1).get<double>(), hsv.at(2).get<double>()};
    book.entries.push_back(std::move(entry));
  }
  if (book.entries.size() != k) throw ValidationError("codebook K does not match entry count");
  for (std::size_t i = 0; i < book.entries.size(); ++i)
    if (book.entries[i].id != static_cast<int>(i)) throw ValidationError("codebook ids must be dense 0..K-1");
}

}  // namespace colorwai::colorlab
