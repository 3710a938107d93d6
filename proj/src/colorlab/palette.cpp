#include <cmath>

#include "clustering.hpp"
#include "colorwai/colorlab.hpp"
#include "colorwai/error.hpp"

namespace colorwai::colorlab {

void AnnotationConfig::validate() const {
  if (hue_weight < 0.0 || sat_weight < 0.0 || val_weight < 0.0)
    throw ValidationError("annotation weights must be nonnegative");
  if (std::fabs(hue_weight + sat_weight + val_weight - 1.0) > 1e-9)
    throw ValidationError("annotation weights must sum to 1");
  if (!(palette_spawn_threshold > 0.0)) throw ValidationError("spawn threshold must be positive");
  if (palette_max_colors < 1) throw ValidationError("palette_max_colors must be at least 1");
}

double weighted_hsv_distance(const HsvColor& x, const HsvColor& y, const AnnotationConfig& cfg) {
  const bool both_achromatic = x.s < cfg.achromatic_saturation && y.s < cfg.achromatic_saturation;
  const double hue_term = both_achromatic ? 0.0 : hue_distance(x.h, y.h) / 180.0;
  return cfg.hue_weight * hue_term + cfg.sat_weight * std::fabs(x.s - y.s) +
         cfg.val_weight * std::fabs(x.v - y.v);
}

Palette extract_palette(const ImageBuffer& img, const AnnotationConfig& cfg) {
  if (img.empty()) throw ValidationError("empty input");
  cfg.validate();

  std::vector<detail::WeightedLab> points;
  points.reserve(img.pixel_count());
  RgbColor last{-1.0, -1.0, -1.0};
  LabColor last_lab;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const RgbColor c = img.pixel(y, x);
      if (!(c == last)) {
        last = c;
        last_lab = rgb_to_lab(c);
      }
      points.push_back({last_lab, 1.0});
    }
  }

  auto clusters = detail::leader_follower(points, cfg.palette_spawn_threshold);
  detail::merge_close(clusters, cfg.palette_spawn_threshold / 2.0);
  detail::sort_by_weight(clusters);

  const double total = static_cast<double>(points.size());
  Palette palette;
  for (const auto& c : clusters) {
    if (static_cast<int>(palette.entries.size()) >= cfg.palette_max_colors) break;
    palette.entries.push_back({c.centroid, c.weight / total});
  }
  return palette;
}

}  // namespace colorwai::colorlab
