#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "colorwai/error.hpp"
#include "colorwai/rng.hpp"
#include "colorwai/texgen.hpp"

namespace colorwai::texgen {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Mapping structure: the first kColorUnits hidden units read only a seeded
// subset of kColorDims latent dimensions and drive the color outputs (0..3);
// every other unit sees those dimensions scaled by kColorDimShare. Crosstalk
// between the color and pattern halves is scaled by kLeak.
constexpr int kColorUnits = 12;
constexpr int kColorDims = 12;
constexpr double kColorDimShare = 0.1;
constexpr double kLeak = 0.05;

// Output ranges. Saturation follows the radius of the hue outputs, so a
// pattern near the hue origin is pale and cheap to recolor.
constexpr double kSatLo = 0.1;
constexpr double kSatHi = 0.9;
constexpr double kChromaScale = 0.6;
constexpr double kValLo = 0.5;
constexpr double kValHi = 0.95;
constexpr double kAccentSpread = 30.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

void PatternParams::validate() const {
  double sum = 0.0;
  for (double w : motif_weights) {
    if (w < 0.0) throw ValidationError("motif weights must be nonnegative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw ValidationError("motif weights must sum to 1");
  if (base_sat < 0.0 || base_sat > 1.0 || base_val < 0.0 || base_val > 1.0)
    throw ValidationError("base saturation/value out of [0,1]");
  if (frequency < 2.0 || frequency > 16.0) throw ValidationError("frequency out of [2,16]");
  if (phase < 0.0 || phase >= 1.0) throw ValidationError("phase out of [0,1)");
  if (contrast < 0.0 || contrast > 1.0) throw ValidationError("contrast out of [0,1]");
}

ImageBuffer render_pattern(const PatternParams& p, int resolution) {
  if (resolution < 1) throw ValidationError("resolution must be positive");
  p.validate();
  ImageBuffer img(resolution, resolution);
  const double theta = p.rotation * std::numbers::pi / 180.0;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const colorlab::HsvColor base{colorlab::normalize_hue(p.base_hue), p.base_sat, p.base_val};
  const colorlab::HsvColor accent{colorlab::normalize_hue(p.base_hue + p.accent_hue_offset), p.base_sat,
                                  p.base_val};
  const auto& w = p.motif_weights;
  const double f = p.frequency;

  for (int y = 0; y < resolution; ++y) {
    const double v = (y + 0.5) / resolution;
    for (int x = 0; x < resolution; ++x) {
      const double u = (x + 0.5) / resolution;
      const double s = u * ct + v * st;
      const double t = -u * st + v * ct;
      const double fs = f * s + p.phase;
      const double ft = f * t + p.phase;

      double m = 0.0;
      if (w[0] > 0.0) m += w[0] * (0.5 + 0.5 * std::cos(kTwoPi * fs));
      if (w[1] > 0.0)
        m += w[1] * (0.5 + 0.5 * std::tanh(3.0 * std::sin(kTwoPi * fs)) * std::tanh(3.0 * std::sin(kTwoPi * ft)));
      if (w[2] > 0.0) {
        const double dx = fs - std::floor(fs) - 0.5;
        const double dy = ft - std::floor(ft) - 0.5;
        m += w[2] * (1.0 - smoothstep(0.2, 0.35, std::sqrt(dx * dx + dy * dy)));
      }
      if (w[3] > 0.0) m += w[3] * (0.5 + 0.5 * std::cos(kTwoPi * (fs + 0.35 * std::sin(kTwoPi * 2.0 * t))));

      const double mix = p.contrast * smoothstep(0.5, 0.8, m);
      img.set_pixel(y, x, colorlab::hsv_to_rgb(colorlab::mix_hsv(base, accent, mix)));
    }
  }
  return img;
}

ProceduralGenerator::ProceduralGenerator(GeneratorConfig cfg) : cfg_(cfg) {
  if (cfg_.latent_dim < 1) throw ValidationError("latent_dim must be positive");
  if (cfg_.resolution < 1) throw ValidationError("resolution must be positive");
  Rng rng(mix_seed(cfg_.mapping_seed, 0x3a9));
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(cfg_.latent_dim));
  const double hidden_scale = 1.0 / std::sqrt(static_cast<double>(kHiddenWidth));
  w1_.resize(kHiddenWidth, cfg_.latent_dim);
  b1_.resize(kHiddenWidth);
  w2_.resize(kOutputCount, kHiddenWidth);
  b2_.resize(kOutputCount);
  for (Eigen::Index i = 0; i < w1_.size(); ++i) w1_.data()[i] = rng.normal() * in_scale;
  for (Eigen::Index i = 0; i < b1_.size(); ++i) b1_[i] = 0.3 * rng.normal();
  for (Eigen::Index i = 0; i < w2_.size(); ++i) w2_.data()[i] = rng.normal() * hidden_scale;
  for (Eigen::Index i = 0; i < b2_.size(); ++i) b2_[i] = 0.2 * rng.normal();

  const int cdims = std::min(kColorDims, cfg_.latent_dim);
  std::vector<int> perm(static_cast<std::size_t>(cfg_.latent_dim));
  for (int i = 0; i < cfg_.latent_dim; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < cdims; ++i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(i) + rng.index(static_cast<std::uint64_t>(cfg_.latent_dim - i))]);
  for (int h = kColorUnits; h < kHiddenWidth; ++h)
    for (int i = 0; i < cdims; ++i) w1_(h, perm[static_cast<std::size_t>(i)]) *= kColorDimShare;
  for (int h = 0; h < kColorUnits; ++h) {
    w1_.row(h).setZero();
    for (int i = 0; i < cdims; ++i) w1_(h, perm[static_cast<std::size_t>(i)]) = rng.normal() / std::sqrt(double(cdims));
  }
  for (int o = 0; o < kOutputCount; ++o)
    for (int h = 0; h < kHiddenWidth; ++h) {
      const bool color_out = o < 4, color_unit = h < kColorUnits;
      const double fan = std::sqrt(double(color_unit ? kColorUnits : kHiddenWidth - kColorUnits));
      w2_(o, h) = rng.normal() * (color_out == color_unit ? 1.0 : kLeak) / fan;
    }
  // Keep the hue outputs centered so every hue is reachable.
  b2_[0] = 0.0;
  b2_[1] = 0.0;
}

LatentCode ProceduralGenerator::sample_latent(std::uint64_t seed) const {
  Rng rng(mix_seed(seed, 0x1a7));
  LatentCode z;
  z.coords.resize(cfg_.latent_dim);
  for (int i = 0; i < cfg_.latent_dim; ++i) z.coords[i] = rng.normal();
  return z;
}

PatternParams ProceduralGenerator::map_latent(const LatentCode& z) const {
  if (z.space_tag != kSpaceTag) throw ValidationError("latent space tag mismatch");
  return map_latent(z.coords);
}

PatternParams ProceduralGenerator::map_latent(const Eigen::VectorXd& z) const {
  if (z.size() != cfg_.latent_dim) throw ValidationError("dimension mismatch");
  const Eigen::VectorXd hidden = (w1_ * z + b1_).array().tanh().matrix();
  const Eigen::VectorXd out = w2_ * hidden + b2_;

  PatternParams p;
  p.base_hue = colorlab::normalize_hue(std::atan2(out[1], out[0]) * 180.0 / std::numbers::pi);
  p.base_sat = kSatLo + (kSatHi - kSatLo) * std::tanh(std::hypot(out[0], out[1]) / kChromaScale);
  p.base_val = kValLo + (kValHi - kValLo) * sigmoid(1.5 * out[3] + 0.3);
  p.accent_hue_offset = kAccentSpread * std::tanh(out[4]);
  double norm = 0.0;
  for (int k = 0; k < 4; ++k) {
    p.motif_weights[static_cast<std::size_t>(k)] = std::exp(2.0 * out[5 + k]);
    norm += p.motif_weights[static_cast<std::size_t>(k)];
  }
  for (auto& w : p.motif_weights) w /= norm;
  p.frequency = 2.0 + 14.0 * sigmoid(out[9]);
  p.rotation = 180.0 * sigmoid(out[10]);
  p.phase = sigmoid(out[11]);
  p.contrast = sigmoid(1.5 * out[12] + 0.5);
  return p;
}

ImageBuffer ProceduralGenerator::synthesize(const LatentCode& z) const {
  return render_pattern(map_latent(z), cfg_.resolution);
}

ImageBuffer ProceduralGenerator::synthesize(const Eigen::VectorXd& z) const {
  return render_pattern(map_latent(z), cfg_.resolution);
}

ImageBuffer ProceduralGenerator::synthesize(const Eigen::VectorXd& z, int resolution) const {
  return render_pattern(map_latent(z), resolution);
}

double oracle_color_score(const ProceduralGenerator& gen, const Eigen::VectorXd& z, int color_id,
                          const colorlab::ColorCodebook& book, const colorlab::AnnotationConfig& cfg) {
  const auto hsv = colorlab::rgb_to_hsv(mean_color(gen.synthesize(z)));
  return -colorlab::weighted_hsv_distance(hsv, book.at(color_id).hsv, cfg);
}

Eigen::VectorXd oracle_color_gradient(const ProceduralGenerator& gen, const Eigen::VectorXd& z, int color_id,
                                      const colorlab::ColorCodebook& book,
                                      const colorlab::AnnotationConfig& cfg, double step) {
  if (!(step > 0.0)) throw ValidationError("oracle step must be positive");
  book.at(color_id);
  Eigen::VectorXd grad(z.size());
  Eigen::VectorXd probe = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    probe[i] = z[i] + step;
    const double up = oracle_color_score(gen, probe, color_id, book, cfg);
    probe[i] = z[i] - step;
    const double down = oracle_color_score(gen, probe, color_id, book, cfg);
    probe[i] = z[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  const double norm = grad.norm();
  if (!(norm > 0.0)) throw std::runtime_error("flat oracle at this point");
  return grad / norm;
}

void to_json(nlohmann::json& j, const GeneratorConfig& cfg) {
  j = {{"version", 1}, {"mapping_seed", cfg.mapping_seed}, {"latent_dim", cfg.latent_dim},
       {"resolution", cfg.resolution}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& cfg) {
  cfg.mapping_seed = j.at("mapping_seed").get<std::uint64_t>();
  cfg.latent_dim = j.at("latent_dim").get<int>();
  cfg.resolution = j.at("resolution").get<int>();
}

void to_json(nlohmann::json& j, const PatternParams& p) {
  j = {{"base_hue", p.base_hue},
       {"base_sat", p.base_sat},
       {"base_val", p.base_val},
       {"accent_hue_offset", p.accent_hue_offset},
       {"motif_weights", p.motif_weights},
       {"frequency", p.frequency},
       {"rotation", p.rotation},
       {"phase", p.phase},
       {"contrast", p.contrast}};
}

void from_json(const nlohmann::json& j, PatternParams& p) {
  p.base_hue = j.at("base_hue").get<double>();
  p.base_sat = j.at("base_sat").get<double>();
  p.base_val = j.at("base_val").get<double>();
  p.accent_hue_offset = j.at("accent_hue_offset").get<double>();
  p.motif_weights = j.at("motif_weights").get<std::array<double, 4>>();
  p.frequency = j.at("frequency").get<double>();
  p.rotation = j.at("rotation").get<double>();
  p.phase = j.at("phase").get<double>();
  p.contrast = j.at("contrast").get<double>();
}

}  // namespace colorwai::texgen
