#include <algorithm>

#include "colorwai/diffgen.hpp"
#include "colorwai/error.hpp"

namespace colorwai::diffgen {
namespace {

std::vector<int> steps_to_mix(const NoiseSchedule& sched, const MixingConfig& mix, const InversionConfig& inv) {
  const int include[] = {mix.t_mix};
  auto ts = ddim_timesteps(sched, inv.steps, include);
  ts.erase(std::upper_bound(ts.begin(), ts.end(), mix.t_mix), ts.end());
  return ts;
}

Eigen::VectorXd invert_to_mix(const ImageBuffer& x0, const MixingConfig& mix, const Denoiser& den,
                              const InversionConfig& inv) {
  mix.validate(den.schedule());
  const int include[] = {mix.t_mix};
  const auto traj = ddim_invert(to_model_space(x0), den, den.schedule(), inv, include, mix.t_mix);
  return traj.states.back().col(0);
}

}  // namespace

void MixingConfig::validate(const NoiseSchedule& sched) const {
  if (t_mix <= 0 || t_mix >= sched.T) throw ValidationError("t_mix must lie strictly between 0 and T");
}

std::string space_tag(MixTarget target) { return target == MixTarget::h_space ? kHSpaceTag : kInputSpaceTag; }

Eigen::MatrixXd edited_from_mix(const Eigen::VectorXd& x_mix, const disentangle::DirectionSpec& dir,
                                std::span<const double> alphas, const MixingConfig& mix, const Denoiser& den,
                                std::span<const int> timesteps) {
  if (dir.space_tag != space_tag(mix.target)) throw ValidationError("direction/space mismatch");
  const auto expected = mix.target == MixTarget::h_space ? den.arch().bottleneck : den.arch().input;
  if (dir.vector.size() != expected) throw ValidationError("direction/space mismatch");
  if (timesteps.empty() || timesteps.back() != mix.t_mix) throw ValidationError("timesteps must end at t_mix");
  const auto& sched = den.schedule();

  Eigen::MatrixXd out(x_mix.size(), static_cast<Eigen::Index>(alphas.size()));
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    const double alpha = alphas[j];
    Eigen::MatrixXd x = x_mix;
    if (mix.target == MixTarget::input_space) {
      if (alpha != 0.0) x.col(0) += alpha * dir.vector;
      out.col(static_cast<Eigen::Index>(j)) = ddim_sample(x, timesteps, den, sched).col(0);
      continue;
    }
    const Eigen::VectorXd dh = alpha * dir.vector;
    for (std::size_t k = timesteps.size() - 1; k > 0; --k) {
      const int t = timesteps[k];
      const int t_prev = timesteps[k - 1];
      const Eigen::MatrixXd eps = den.predict(x, t);
      if (alpha == 0.0) {
        x = ddim_step(x, t, t_prev, eps, sched);
      } else {
        x = ddim_step_split(x, t, t_prev, den.predict_shifted(x, t, dh), eps, sched);
      }
    }
    out.col(static_cast<Eigen::Index>(j)) = x.col(0);
  }
  return out;
}

ImageBuffer edited_sample(const ImageBuffer& x0, const disentangle::DirectionSpec& dir, double alpha,
                          const MixingConfig& mix, const Denoiser& den, const InversionConfig& inv) {
  if (dir.space_tag != space_tag(mix.target)) throw ValidationError("direction/space mismatch");
  const auto x_mix = invert_to_mix(x0, mix, den, inv);
  const auto ts = steps_to_mix(den.schedule(), mix, inv);
  const double alphas[] = {alpha};
  return from_model_space(edited_from_mix(x_mix, dir, alphas, mix, den, ts).col(0), x0.width(), x0.height());
}

ImageBuffer reconstruct(const ImageBuffer& x0, const MixingConfig& mix, const Denoiser& den,
                        const InversionConfig& inv) {
  const auto x_mix = invert_to_mix(x0, mix, den, inv);
  const auto ts = steps_to_mix(den.schedule(), mix, inv);
  return from_model_space(ddim_sample(x_mix, ts, den, den.schedule()).col(0), x0.width(), x0.height());
}

}  // namespace colorwai::diffgen
