#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "colorwai/color.hpp"
#include "colorwai/image.hpp"

namespace colorwai::colorlab {

/// Parameters of palette extraction and main-color quantization.
struct AnnotationConfig {
  double hue_weight = 0.8;
  double sat_weight = 0.1;
  double val_weight = 0.1;
  /// Leader-follower spawn radius in CIE76 units. Clusters closer than half
  /// this value are merged afterwards.
  double palette_spawn_threshold = 20.0;
  int palette_max_colors = 6;
  /// Below this saturation a color is treated as achromatic.
  double achromatic_saturation = 0.1;

  /// Throws ValidationError when weights do not sum to 1 or thresholds are
  /// out of range.
  void validate() const;
  bool operator==(const AnnotationConfig&) const = default;
};

/// score = w_h * hue_distance / 180 + w_s * |ds| + w_v * |dv|, in [0,1].
/// When both colors are achromatic the hue term is dropped.
double weighted_hsv_distance(const HsvColor& x, const HsvColor& y, const AnnotationConfig& cfg);

struct PaletteEntry {
  LabColor lab;
  double share = 0.0;
};

/// Ordered by descending share.
struct Palette {
  std::vector<PaletteEntry> entries;
};

/// Adaptive leader-follower clustering of the image's pixels in Lab.
/// Deterministic for a fixed pixel order.
Palette extract_palette(const ImageBuffer& img, const AnnotationConfig& cfg);

struct CodebookEntry {
  int id = 0;
  std::string name;
  LabColor lab;
  HsvColor hsv;
  bool operator==(const CodebookEntry&) const = default;
};

struct ColorCodebook {
  int version = 1;
  std::vector<CodebookEntry> entries;

  std::size_t size() const { return entries.size(); }
  const CodebookEntry& at(int id) const;
  bool valid_id(int id) const { return id >= 0 && id < static_cast<int>(entries.size()); }
  bool is_chromatic(int id, double achromatic_saturation = 0.1) const;
  bool operator==(const ColorCodebook&) const = default;
};

/// Re-clusters all palette entries (share-weighted) into exactly k colors.
/// Throws ValidationError("degenerate corpus") when fewer than k distinct
/// colors are available.
ColorCodebook build_codebook(std::span<const Palette> palettes, int k);

/// Naming table: three achromatic buckets plus eight hues in a dark and a
/// bright variant.
std::string color_name(const LabColor& lab, const HsvColor& hsv);

/// First palette entry of an image, in both encodings.
struct MainColor {
  LabColor lab;
  HsvColor hsv;
  double share = 0.0;
};

MainColor main_color(const ImageBuffer& img, const AnnotationConfig& cfg);

/// Codebook id nearest to the HSV color; ties go to the lower id.
int quantize(const HsvColor& hsv, const ColorCodebook& book, const AnnotationConfig& cfg);

/// Codebook id of the image's main color.
int annotate_main_color(const ImageBuffer& img, const ColorCodebook& book,
                        const AnnotationConfig& cfg);

/// Half-open interval [start, end) on the hue circle with 0 <= start < end <= 360.
struct HueInterval {
  double start = 0.0;
  double end = 0.0;
  double width() const { return end - start; }
  bool operator==(const HueInterval&) const = default;
};

/// Voronoi cell of the entry's hue among the chromatic codebook hues. Empty
/// for achromatic entries. Wrapping cells are split at 0/360.
std::vector<HueInterval> hue_range(const ColorCodebook& book, int id,
                                   double achromatic_saturation = 0.1);

bool hue_in_range(std::span<const HueInterval> range, double hue);

/// Circular distance in degrees from the hue to the nearest border of the
/// range; 0 when inside.
double distance_to_range(std::span<const HueInterval> range, double hue);

void to_json(nlohmann::json& j, const ColorCodebook& book);
void from_json(const nlohmann::json& j, ColorCodebook& book);

}  // namespace colorwai::colorlab
