#include "colorwai/backends.hpp"
#include "colorwai/error.hpp"

namespace colorwai {
namespace {

class TexgenSubject final : public EditSubject {
 public:
  TexgenSubject(const texgen::ProceduralGenerator& gen, Eigen::VectorXd z)
      : gen_(gen), z_(std::move(z)), original_(gen_.synthesize(z_)) {}

  const ImageBuffer& original() const override { return original_; }

  ImageBuffer edited(const disentangle::DirectionSpec& dir, double alpha) const override {
    if (dir.space_tag != texgen::kSpaceTag) throw ValidationError("direction/space mismatch");
    return gen_.synthesize(disentangle::edit_latent(z_, dir, alpha));
  }

 private:
  const texgen::ProceduralGenerator& gen_;
  Eigen::VectorXd z_;
  ImageBuffer original_;
};

}  // namespace

TexgenBackend::TexgenBackend(std::shared_ptr<const texgen::ProceduralGenerator> gen) : gen_(std::move(gen)) {
  if (!gen_) throw ValidationError("null generator");
}

CoupledSample TexgenBackend::couple_sample(std::uint64_t seed) const {
  auto z = gen_->sample_latent(seed);
  auto img = gen_->synthesize(z);
  return {std::move(z.coords), std::move(img)};
}

Eigen::VectorXd TexgenBackend::state(std::uint64_t seed) const { return gen_->sample_latent(seed).coords; }

std::unique_ptr<EditSubject> TexgenBackend::subject_from_state(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) != latent_dim()) throw ValidationError("dimension mismatch");
  return std::make_unique<TexgenSubject>(*gen_, z);
}

}  // namespace colorwai
