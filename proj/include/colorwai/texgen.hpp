#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "colorwai/colorlab.hpp"
#include "colorwai/image.hpp"
#include "json.hpp"

namespace colorwai::texgen {

inline constexpr const char* kSpaceTag = "w-analog";

struct LatentCode {
  Eigen::VectorXd coords;
  std::string space_tag = kSpaceTag;
};

enum class Motif { stripes = 0, checks = 1, dots = 2, waves = 3 };

struct PatternParams {
  double base_hue = 0.0;           // degrees [0,360)
  double base_sat = 0.0;           // [0,1]
  double base_val = 0.0;           // [0,1]
  double accent_hue_offset = 0.0;  // degrees
  std::array<double, 4> motif_weights{1.0, 0.0, 0.0, 0.0};  // simplex over Motif
  double frequency = 4.0;          // cycles per image, [2,16]
  double rotation = 0.0;           // degrees
  double phase = 0.0;              // [0,1)
  double contrast = 1.0;           // [0,1]

  void validate() const;
};

struct GeneratorConfig {
  std::uint64_t mapping_seed = 7;
  int latent_dim = 64;
  int resolution = 64;
  bool operator==(const GeneratorConfig&) const = default;
};

void to_json(nlohmann::json& j, const GeneratorConfig& cfg);
void from_json(const nlohmann::json& j, GeneratorConfig& cfg);
void to_json(nlohmann::json& j, const PatternParams& p);
void from_json(const nlohmann::json& j, PatternParams& p);

/// Renders a motif field blended by the motif weights, thresholded into an
/// accent mask scaled by contrast, colored by HSV interpolation between the
/// base color and the accent color.
ImageBuffer render_pattern(const PatternParams& params, int resolution);

/// Procedural textile generator. A fixed, seeded two-layer tanh network maps a
/// latent code to pattern parameters; rendering is a pure function of the
/// latent. Immutable after construction.
class ProceduralGenerator {
 public:
  static constexpr int kHiddenWidth = 32;
  static constexpr int kOutputCount = 13;

  explicit ProceduralGenerator(GeneratorConfig cfg = {});

  const GeneratorConfig& config() const { return cfg_; }
  int latent_dim() const { return cfg_.latent_dim; }
  int resolution() const { return cfg_.resolution; }

  /// D i.i.d. standard normal coordinates.
  LatentCode sample_latent(std::uint64_t seed) const;

  PatternParams map_latent(const LatentCode& z) const;
  PatternParams map_latent(const Eigen::VectorXd& z) const;

  ImageBuffer synthesize(const LatentCode& z) const;
  ImageBuffer synthesize(const Eigen::VectorXd& z) const;
  /// Renders at an explicit resolution (used for the diffusion corpus).
  ImageBuffer synthesize(const Eigen::VectorXd& z, int resolution) const;

 private:
  GeneratorConfig cfg_;
  Eigen::MatrixXd w1_;
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;
  Eigen::VectorXd b2_;
};

/// Unit-length central-difference gradient, with respect to z, of
/// -weighted_hsv_distance(mean image color, codebook color). Throws
/// std::runtime_error("flat oracle at this point") for a zero gradient.
Eigen::VectorXd oracle_color_gradient(const ProceduralGenerator& gen, const Eigen::VectorXd& z, int color_id,
                                      const colorlab::ColorCodebook& book,
                                      const colorlab::AnnotationConfig& cfg, double step = 1e-3);

/// Oracle score before differentiation.
double oracle_color_score(const ProceduralGenerator& gen, const Eigen::VectorXd& z, int color_id,
                          const colorlab::ColorCodebook& book, const colorlab::AnnotationConfig& cfg);

}  // namespace colorwai::texgen
