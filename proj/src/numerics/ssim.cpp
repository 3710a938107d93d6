#include "colorwai/ssim.hpp"

#include <cmath>
#include <vector>

#include "colorwai/error.hpp"

namespace colorwai::numerics {
namespace {

std::vector<double> gaussian_kernel(int window, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(window));
  const int half = window / 2;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double x = i - half;
    k[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable "valid" filtering of a single-channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h, const std::vector<double>& k) {
  const int win = static_cast<int>(k.size());
  const int ow = w - win + 1;
  const int oh = h - win + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < win; ++i) s += k[static_cast<std::size_t>(i)] * plane[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < win; ++i) s += k[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

void SsimConfig::validate() const {
  if (window < 3 || window % 2 == 0) throw ValidationError("SSIM window must be odd and >= 3");
  if (!(sigma > 0.0)) throw ValidationError("SSIM sigma must be positive");
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw ValidationError("SSIM stabilizers must be positive");
  if (!(dynamic_range > 0.0)) throw ValidationError("SSIM dynamic range must be positive");
}

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimConfig& cfg) {
  cfg.validate();
  if (!a.same_shape(b)) throw ValidationError("shape mismatch");
  const int w = a.width();
  const int h = a.height();
  if (w < cfg.window || h < cfg.window) throw ValidationError("image smaller than SSIM window");

  const auto kernel = gaussian_kernel(cfg.window, cfg.sigma);
  const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
  const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
  const std::size_t n = static_cast<std::size_t>(w) * h;

  double total = 0.0;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int c = 0; c < 3; ++c) {
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = da[i * 3 + static_cast<std::size_t>(c)];
      y[i] = db[i * 3 + static_cast<std::size_t>(c)];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, w, h, kernel);
    const auto my = filter_valid(y, w, h, kernel);
    const auto sxx = filter_valid(xx, w, h, kernel);
    const auto syy = filter_valid(yy, w, h, kernel);
    const auto sxy = filter_valid(xy, w, h, kernel);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / 3.0;
}

}  // namespace colorwai::numerics
