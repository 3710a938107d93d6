#pragma once

#include <functional>
#include <memory>

#include "colorwai/backend.hpp"
#include "colorwai/diffgen.hpp"
#include "colorwai/texgen.hpp"

namespace colorwai {

/// Procedural generator exposed as an editing backend in its mapped latent
/// space.
class TexgenBackend final : public EditBackend {
 public:
  explicit TexgenBackend(std::shared_ptr<const texgen::ProceduralGenerator> gen);

  std::string id() const override { return "texgen"; }
  std::string space_tag() const override { return texgen::kSpaceTag; }
  std::size_t latent_dim() const override { return static_cast<std::size_t>(gen_->latent_dim()); }
  CoupledSample couple_sample(std::uint64_t seed) const override;
  Eigen::VectorXd state(std::uint64_t seed) const override;
  std::unique_ptr<EditSubject> subject_from_state(const Eigen::VectorXd& z) const override;

  const texgen::ProceduralGenerator& generator() const { return *gen_; }

 private:
  std::shared_ptr<const texgen::ProceduralGenerator> gen_;
};

/// Trained denoiser exposed as an editing backend. Images come from a seeded
/// source; codes are bottleneck activations (or noised inputs) at t_mix.
class DiffgenBackend final : public EditBackend {
 public:
  using ImageSource = std::function<ImageBuffer(std::uint64_t seed)>;

  DiffgenBackend(std::shared_ptr<const diffgen::Denoiser> den, ImageSource source, diffgen::MixingConfig mix = {},
                 diffgen::InversionConfig inv = {});

  std::string id() const override { return "diffgen"; }
  std::string space_tag() const override { return diffgen::space_tag(mix_.target); }
  std::size_t latent_dim() const override;
  CoupledSample couple_sample(std::uint64_t seed) const override;
  /// DDIM inversion of the seeded source image up to t_mix.
  Eigen::VectorXd state(std::uint64_t seed) const override;
  std::unique_ptr<EditSubject> subject_from_state(const Eigen::VectorXd& x_mix) const override;
  std::unique_ptr<EditSubject> subject_for(const ImageBuffer& img) const;

  const diffgen::Denoiser& denoiser() const { return *den_; }
  const diffgen::MixingConfig& mixing() const { return mix_; }

 private:
  Eigen::VectorXd invert(const ImageBuffer& img) const;

  std::shared_ptr<const diffgen::Denoiser> den_;
  ImageSource source_;
  diffgen::MixingConfig mix_;
  diffgen::InversionConfig inv_;
  std::vector<int> timesteps_;
  int side_ = 0;
};

}  // namespace colorwai
