#pragma once

// Color encodings and conversions. RGB channels are sRGB-encoded values in
// [0,1]; Lab uses the D65 white point.

namespace colorwai::colorlab {

struct RgbColor {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  bool operator==(const RgbColor&) const = default;
};

/// h in degrees [0,360); s and v in [0,1].
struct HsvColor {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
  bool operator==(const HsvColor&) const = default;
};

/// l in [0,100]; a and b unbounded (typically [-128,127]).
struct LabColor {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
  bool operator==(const LabColor&) const = default;
};

struct LabToRgb {
  RgbColor rgb;
  bool clamped = false;
};

/// Wraps any finite angle into [0,360).
double normalize_hue(double degrees);

HsvColor rgb_to_hsv(const RgbColor& c);
RgbColor hsv_to_rgb(const HsvColor& c);

LabColor rgb_to_lab(const RgbColor& c);
/// Out-of-gamut results are clamped to [0,1] and flagged.
LabToRgb lab_to_rgb(const LabColor& c);

/// CIE76 color difference.
double delta_e76(const LabColor& x, const LabColor& y);

/// Circular hue distance in degrees, always within [0,180].
double hue_distance(double h1, double h2);

/// Interpolates in HSV along the shorter hue arc; t in [0,1].
HsvColor mix_hsv(const HsvColor& from, const HsvColor& to, double t);

}  // namespace colorwai::colorlab
