#pragma once

#include "colorwai/image.hpp"

namespace colorwai::numerics {

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;

  void validate() const;
  bool operator==(const SsimConfig&) const = default;
};

/// Mean local SSIM under a Gaussian window over the fully-covered ("valid")
/// region, averaged across the three channels.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimConfig& cfg = {});

}  // namespace colorwai::numerics
