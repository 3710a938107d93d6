#include <algorithm>
#include <cmath>

#include "colorwai/backends.hpp"
#include "colorwai/error.hpp"

namespace colorwai {
namespace {

class DiffgenSubject final : public EditSubject {
 public:
  DiffgenSubject(const diffgen::Denoiser& den, const diffgen::MixingConfig& mix, const std::vector<int>& ts,
                 Eigen::VectorXd x_mix, int width, int height)
      : den_(den), mix_(mix), ts_(ts), x_mix_(std::move(x_mix)), width_(width), height_(height),
        original_(diffgen::from_model_space(diffgen::ddim_sample(x_mix_, ts_, den_, den_.schedule()).col(0), width,
                                            height)) {}

  const ImageBuffer& original() const override { return original_; }

  ImageBuffer edited(const disentangle::DirectionSpec& dir, double alpha) const override {
    const double alphas[] = {alpha};
    return diffgen::from_model_space(diffgen::edited_from_mix(x_mix_, dir, alphas, mix_, den_, ts_).col(0), width_,
                                     height_);
  }

 private:
  const diffgen::Denoiser& den_;
  const diffgen::MixingConfig& mix_;
  const std::vector<int>& ts_;
  Eigen::VectorXd x_mix_;
  int width_;
  int height_;
  ImageBuffer original_;
};

}  // namespace

DiffgenBackend::DiffgenBackend(std::shared_ptr<const diffgen::Denoiser> den, ImageSource source,
                               diffgen::MixingConfig mix, diffgen::InversionConfig inv)
    : den_(std::move(den)), source_(std::move(source)), mix_(mix), inv_(inv) {
  if (!den_ || !source_) throw ValidationError("diffusion backend needs a denoiser and an image source");
  mix_.validate(den_->schedule());
  const int include[] = {mix_.t_mix};
  timesteps_ = diffgen::ddim_timesteps(den_->schedule(), inv_.steps, include);
  timesteps_.erase(std::upper_bound(timesteps_.begin(), timesteps_.end(), mix_.t_mix), timesteps_.end());
  side_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(den_->dim()) / 3.0)));
  if (static_cast<Eigen::Index>(side_) * side_ * 3 != den_->dim()) throw ValidationError("denoiser input is not a square RGB image");
}

std::size_t DiffgenBackend::latent_dim() const {
  return static_cast<std::size_t>(mix_.target == diffgen::MixTarget::h_space ? den_->arch().bottleneck
                                                                             : den_->arch().input);
}

Eigen::VectorXd DiffgenBackend::invert(const ImageBuffer& img) const {
  if (static_cast<Eigen::Index>(img.width()) * img.height() * 3 != den_->dim())
    throw ValidationError("image size does not match the denoiser");
  const int include[] = {mix_.t_mix};
  return diffgen::ddim_invert(diffgen::to_model_space(img), *den_, den_->schedule(), inv_, include, mix_.t_mix)
      .states.back()
      .col(0);
}

CoupledSample DiffgenBackend::couple_sample(std::uint64_t seed) const {
  auto img = source_(seed);
  const auto x_mix = invert(img);
  if (mix_.target == diffgen::MixTarget::input_space) return {x_mix, std::move(img)};
  return {den_->h_activation(x_mix, mix_.t_mix).col(0), std::move(img)};
}

Eigen::VectorXd DiffgenBackend::state(std::uint64_t seed) const { return invert(source_(seed)); }

std::unique_ptr<EditSubject> DiffgenBackend::subject_from_state(const Eigen::VectorXd& x_mix) const {
  if (x_mix.size() != den_->dim()) throw ValidationError("dimension mismatch");
  return std::make_unique<DiffgenSubject>(*den_, mix_, timesteps_, x_mix, side_, side_);
}

std::unique_ptr<EditSubject> DiffgenBackend::subject_for(const ImageBuffer& img) const {
  return subject_from_state(invert(img));
}

}  // namespace colorwai
