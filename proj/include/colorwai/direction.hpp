#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "colorwai/numerics.hpp"
#include "json.hpp"

namespace colorwai::disentangle {

enum class Method { interfacegan, stylespace, shapleyvec };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct Hyperparams {
  numerics::LossKind kind = numerics::LossKind::logistic;
  double c_reg = 0.1;
  int k = 40;
  double explanation = 0.5;
  bool operator==(const Hyperparams&) const = default;
};

/// One disentangled color direction. The vector has unit L2 norm and is zero
/// outside the support mask.
struct DirectionSpec {
  Method method = Method::interfacegan;
  int color_id = 0;
  Eigen::VectorXd vector;
  std::vector<std::uint8_t> support;
  Hyperparams hyperparams;
  std::optional<double> alpha_optimal;
  std::string space_tag;
  std::uint64_t seed = 0;
  std::string dataset_hash;

  std::size_t dim() const { return static_cast<std::size_t>(vector.size()); }
  std::size_t support_size() const;
  /// Throws ValidationError when the norm or support invariants are violated.
  void validate() const;
  bool operator==(const DirectionSpec& o) const;
};

struct PartialColor {
  int color_id = 0;
  std::string reason;
  bool operator==(const PartialColor&) const = default;
};

struct DirectionSet {
  int version = 1;
  std::string backend;
  std::string space_tag;
  int codebook_version = 1;
  Method method = Method::interfacegan;
  std::vector<DirectionSpec> directions;
  std::vector<PartialColor> missing;

  bool partial() const { return !missing.empty(); }
  const DirectionSpec* find(int color_id) const;
  DirectionSpec* find(int color_id);
  bool operator==(const DirectionSet&) const = default;
};

void to_json(nlohmann::json& j, const DirectionSpec& d);
void from_json(const nlohmann::json& j, DirectionSpec& d);
void to_json(nlohmann::json& j, const DirectionSet& s);
void from_json(const nlohmann::json& j, DirectionSet& s);

/// z + alpha * n. Throws ValidationError on dimension mismatch.
Eigen::VectorXd edit_latent(const Eigen::VectorXd& z, const DirectionSpec& dir, double alpha);

}  // namespace colorwai::disentangle
