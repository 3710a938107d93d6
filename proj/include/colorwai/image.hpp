#pragma once

#include <span>
#include <vector>

#include "colorwai/color.hpp"

namespace colorwai {

/// H x W x 3 floating-point RGB image, row-major, interleaved channels,
/// values nominally in [0,1].
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  double& at(int y, int x, int c) { return data_[index(y, x) + c]; }
  double at(int y, int x, int c) const { return data_[index(y, x) + c]; }

  colorlab::RgbColor pixel(int y, int x) const;
  void set_pixel(int y, int x, const colorlab::RgbColor& c);

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const ImageBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int y, int x) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Mean RGB over all pixels.
colorlab::RgbColor mean_color(const ImageBuffer& img);

/// Peak signal-to-noise ratio in dB for images in [0,1].
double psnr(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace colorwai
