#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "colorwai/direction.hpp"
#include "colorwai/image.hpp"

namespace colorwai {

/// One editable item drawn from a backend: its unedited render and renders of
/// edits along a direction.
class EditSubject {
 public:
  virtual ~EditSubject() = default;
  virtual const ImageBuffer& original() const = 0;
  virtual ImageBuffer edited(const disentangle::DirectionSpec& dir, double alpha) const = 0;
};

/// A latent code paired with the image it was coupled to.
struct CoupledSample {
  Eigen::VectorXd code;
  ImageBuffer image;
};

/// Generator backend as seen by coupling, evaluation and the service.
class EditBackend {
 public:
  virtual ~EditBackend() = default;
  virtual std::string id() const = 0;
  virtual std::string space_tag() const = 0;
  virtual std::size_t latent_dim() const = 0;
  /// Seeded draw used for coupling: the code lives in space_tag().
  virtual CoupledSample couple_sample(std::uint64_t seed) const = 0;
  /// Editable state for a seed: the latent a pattern is re-rendered from.
  virtual Eigen::VectorXd state(std::uint64_t seed) const = 0;
  virtual std::unique_ptr<EditSubject> subject_from_state(const Eigen::VectorXd& state) const = 0;
  /// Seeded draw used for evaluation and pattern creation.
  virtual std::unique_ptr<EditSubject> subject(std::uint64_t seed) const { return subject_from_state(state(seed)); }
};

}  // namespace colorwai
