#include <algorithm>
#include <cmath>
#include <limits>

#include "colorwai/colorlab.hpp"
#include "colorwai/error.hpp"

namespace colorwai::colorlab {

MainColor main_color(const ImageBuffer& img, const AnnotationConfig& cfg) {
  const Palette palette = extract_palette(img, cfg);
  const auto& first = palette.entries.front();
  return {first.lab, rgb_to_hsv(lab_to_rgb(first.lab).rgb), first.share};
}

int quantize(const HsvColor& hsv, const ColorCodebook& book, const AnnotationConfig& cfg) {
  if (book.entries.empty()) throw ValidationError("empty codebook");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& e : book.entries) {
    const double d = weighted_hsv_distance(hsv, e.hsv, cfg);
    if (d < best_d) {
      best_d = d;
      best = e.id;
    }
  }
  return best;
}

int annotate_main_color(const ImageBuffer& img, const ColorCodebook& book, const AnnotationConfig& cfg) {
  if (book.entries.empty()) throw ValidationError("empty codebook");
  return quantize(main_color(img, cfg).hsv, book, cfg);
}

std::vector<HueInterval> hue_range(const ColorCodebook& book, int id, double achromatic_saturation) {
  const auto& target = book.at(id);
  if (target.hsv.s < achromatic_saturation) return {};

  const double h = normalize_hue(target.hsv.h);
  // Counter-clockwise gaps to the nearest other chromatic hue on either side.
  double gap_next = std::numeric_limits<double>::infinity();
  double gap_prev = std::numeric_limits<double>::infinity();
  for (const auto& e : book.entries) {
    if (e.hsv.s < achromatic_saturation) continue;
    const double other = normalize_hue(e.hsv.h);
    if (other == h) continue;
    gap_next = std::min(gap_next, normalize_hue(other - h));
    gap_prev = std::min(gap_prev, normalize_hue(h - other));
  }
  if (!std::isfinite(gap_next)) return {{0.0, 360.0}};

  const double start = normalize_hue(h - gap_prev / 2.0);
  const double end = normalize_hue(h + gap_next / 2.0);
  if (start < end) return {{start, end}};
  std::vector<HueInterval> out;
  if (start < 360.0) out.push_back({start, 360.0});
  if (end > 0.0) out.push_back({0.0, end});
  return out;
}

bool hue_in_range(std::span<const HueInterval> range, double hue) {
  const double h = normalize_hue(hue);
  return std::any_of(range.begin(), range.end(),
                     [h](const HueInterval& r) { return h >= r.start && h < r.end; });
}

double distance_to_range(std::span<const HueInterval> range, double hue) {
  if (range.empty()) throw ValidationError("empty hue range");
  if (hue_in_range(range, hue)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (const auto& r : range) {
    // Borders at 0/360 produced by splitting a wrapping cell are interior.
    if (!(r.start == 0.0 && std::any_of(range.begin(), range.end(), [](const HueInterval& o) { return o.end == 360.0; })))
      d = std::min(d, hue_distance(hue, r.start));
    if (!(r.end == 360.0 && std::any_of(range.begin(), range.end(), [](const HueInterval& o) { return o.start == 0.0; })))
      d = std::min(d, hue_distance(hue, r.end));
  }
  return d;
}

}  // namespace colorwai::colorlab
