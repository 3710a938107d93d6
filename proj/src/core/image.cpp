#include "colorwai/image.hpp"

#include <cmath>
#include <limits>

#include "colorwai/error.hpp"

namespace colorwai {

ImageBuffer::ImageBuffer(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ValidationError("negative image dimensions");
  data_.assign(static_cast<std::size_t>(width) * height * 3, fill);
}

colorlab::RgbColor ImageBuffer::pixel(int y, int x) const {
  const std::size_t i = index(y, x);
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void ImageBuffer::set_pixel(int y, int x, const colorlab::RgbColor& c) {
  const std::size_t i = index(y, x);
  data_[i] = c.r;
  data_[i + 1] = c.g;
  data_[i + 2] = c.b;
}

colorlab::RgbColor mean_color(const ImageBuffer& img) {
  if (img.empty()) throw ValidationError("empty input");
  double r = 0.0, g = 0.0, b = 0.0;
  const auto d = img.data();
  for (std::size_t i = 0; i < d.size(); i += 3) {
    r += d[i];
    g += d[i + 1];
    b += d[i + 2];
  }
  const double n = static_cast<double>(img.pixel_count());
  return {r / n, g / n, b / n};
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b)) throw ValidationError("shape mismatch");
  if (a.empty()) throw ValidationError("empty input");
  double se = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(da.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace colorwai
