#include "colorwai/color.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace colorwai::colorlab {
namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// sRGB primaries, D65 (IEC 61966-2-1).
constexpr Mat3 kRgbToXyz{{{0.4124564, 0.3575761, 0.1804375},
                          {0.2126729, 0.7151522, 0.0721750},
                          {0.0193339, 0.1191920, 0.9503041}}};

constexpr Mat3 invert(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return r;
}

constexpr Mat3 kXyzToRgb = invert(kRgbToXyz);

// White point taken as the image of RGB (1,1,1) so that white lands exactly
// on a = b = 0.
constexpr std::array<double, 3> kWhite{
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2]};

constexpr double kDelta = 6.0 / 29.0;

double to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

}  // namespace

double normalize_hue(double degrees) {
  double h = std::fmod(degrees, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h = 0.0;
  return h;
}

HsvColor rgb_to_hsv(const RgbColor& c) {
  const double mx = std::max({c.r, c.g, c.b});
  const double mn = std::min({c.r, c.g, c.b});
  const double delta = mx - mn;
  HsvColor out;
  out.v = mx;
  out.s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) {
    out.h = 0.0;
  } else if (mx == c.r) {
    out.h = 60.0 * std::fmod((c.g - c.b) / delta, 6.0);
  } else if (mx == c.g) {
    out.h = 60.0 * ((c.b - c.r) / delta + 2.0);
  } else {
    out.h = 60.0 * ((c.r - c.g) / delta + 4.0);
  }
  out.h = normalize_hue(out.h);
  return out;
}

RgbColor hsv_to_rgb(const HsvColor& c) {
  const double h = normalize_hue(c.h) / 60.0;
  const double s = std::clamp(c.s, 0.0, 1.0);
  const double v = std::clamp(c.v, 0.0, 1.0);
  const int sector = static_cast<int>(std::floor(h)) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

LabColor rgb_to_lab(const RgbColor& c) {
  const std::array<double, 3> lin{to_linear(c.r), to_linear(c.g), to_linear(c.b)};
  std::array<double, 3> f{};
  for (int i = 0; i < 3; ++i) {
    const double xyz = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
    f[i] = lab_f(xyz / kWhite[i]);
  }
  return {116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
}

LabToRgb lab_to_rgb(const LabColor& c) {
  const double fy = (c.l + 16.0) / 116.0;
  const std::array<double, 3> xyz{kWhite[0] * lab_f_inv(fy + c.a / 500.0), kWhite[1] * lab_f_inv(fy),
                                  kWhite[2] * lab_f_inv(fy - c.b / 200.0)};
  std::array<double, 3> rgb{};
  bool clamped = false;
  for (int i = 0; i < 3; ++i) {
    const double lin = kXyzToRgb[i][0] * xyz[0] + kXyzToRgb[i][1] * xyz[1] + kXyzToRgb[i][2] * xyz[2];
    double v = to_srgb(std::max(lin, 0.0));
    if (lin < -1e-9 || v > 1.0 + 1e-9) clamped = true;
    rgb[i] = std::clamp(v, 0.0, 1.0);
  }
  return {{rgb[0], rgb[1], rgb[2]}, clamped};
}

double delta_e76(const LabColor& x, const LabColor& y) {
  const double dl = x.l - y.l;
  const double da = x.a - y.a;
  const double db = x.b - y.b;
  return std::sqrt(dl * dl + da * da + db * db);
}

double hue_distance(double h1, double h2) {
  const double d = std::fabs(normalize_hue(h1) - normalize_hue(h2));
  return std::min(d, 360.0 - d);
}

HsvColor mix_hsv(const HsvColor& from, const HsvColor& to, double t) {
  double dh = normalize_hue(to.h - from.h);
  if (dh > 180.0) dh -= 360.0;
  return {normalize_hue(from.h + t * dh), from.s + t * (to.s - from.s), from.v + t * (to.v - from.v)};
}

}  // namespace colorwai::colorlab
