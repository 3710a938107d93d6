#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "colorwai/backend.hpp"
#include "colorwai/colorlab.hpp"
#include "colorwai/direction.hpp"
#include "colorwai/numerics.hpp"
#include "json.hpp"

namespace colorwai::disentangle {

/// Latent codes coupled with main-color annotations.
struct LatentDataset {
  numerics::Matrix codes;
  std::vector<int> color_ids;
  std::vector<std::uint64_t> sample_seeds;
  std::string space_tag;
  std::string backend_id;
  int codebook_version = 1;
  std::uint64_t seed = 0;
  /// Codebook colors with no positive sample.
  std::vector<int> absent_colors;

  std::size_t size() const { return color_ids.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(codes.cols()); }
  /// SHA-256 over codes, annotations and space tag.
  std::string hash() const;
  /// One-vs-rest labeling for a color.
  numerics::LabeledLatentSet one_vs_rest(int color_id) const;
  bool operator==(const LatentDataset& o) const;
};

void to_json(nlohmann::json& j, const LatentDataset& d);
void from_json(const nlohmann::json& j, LatentDataset& d);

/// Draws n seeded samples from the backend and annotates each image.
LatentDataset couple(const EditBackend& backend, const colorlab::ColorCodebook& book,
                     const colorlab::AnnotationConfig& annotation, std::size_t n, std::uint64_t seed);

DirectionSpec fit_interfacegan(const LatentDataset& data, int color_id, numerics::LossKind kind, double c_reg,
                               std::uint64_t seed);

DirectionSpec fit_stylespace(const LatentDataset& data, int color_id, int k);

DirectionSpec fit_shapleyvec(const LatentDataset& data, int color_id, double explanation,
                             numerics::LossKind kind, double c_reg, std::uint64_t seed,
                             numerics::AttributionAudit* audit = nullptr);

/// Minimal prefix of dimensions, sorted by descending importance (ties to the
/// lower index), whose cumulative importance reaches the explanation level.
std::vector<std::uint8_t> explanation_support(const Eigen::VectorXd& importance, double explanation);

struct FitConfig {
  Hyperparams hyperparams;
  std::uint64_t seed = 0;
};

/// One direction per codebook color; colors that cannot be fitted are listed
/// in DirectionSet::missing.
DirectionSet fit_all(const LatentDataset& data, const colorlab::ColorCodebook& book, Method method,
                     const FitConfig& cfg, numerics::AttributionAudit* audit = nullptr);

}  // namespace colorwai::disentangle
