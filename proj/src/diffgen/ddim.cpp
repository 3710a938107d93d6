#include <algorithm>
#include <cmath>

#include "colorwai/diffgen.hpp"
#include "colorwai/error.hpp"

namespace colorwai::diffgen {
namespace {

// x_to = sqrt(a_to) * P + sqrt(1 - a_to) * eps_dir with
// P = (x - sqrt(1 - a) * eps_pred) / sqrt(a).
Eigen::MatrixXd move(const Eigen::MatrixXd& x, int t, int t_to, const Eigen::MatrixXd& eps_pred,
                     const Eigen::MatrixXd& eps_dir, const NoiseSchedule& sched) {
  const double a = sched.alpha_bar_at(t);
  const double a_to = sched.alpha_bar_at(t_to);
  const Eigen::MatrixXd p = (x - std::sqrt(1.0 - a) * eps_pred) / std::sqrt(a);
  return std::sqrt(a_to) * p + std::sqrt(1.0 - a_to) * eps_dir;
}

Eigen::VectorXd predict_column(const EpsilonModel& model, const Eigen::VectorXd& x, int t) {
  return model.predict(x, t).col(0);
}

// Inverse step t -> t_next for one state. The refinement solves
// step(x_next, t_next -> t) == x by fixed-point iteration on eps(x_next).
Eigen::VectorXd invert_step(const Eigen::VectorXd& x, int t, int t_next, const EpsilonModel& model,
                            const NoiseSchedule& sched, const InversionConfig& cfg) {
  const Eigen::VectorXd eps = predict_column(model, x, t);
  Eigen::VectorXd next = move(x, t, t_next, eps, eps, sched);
  const double a = sched.alpha_bar_at(t);
  const double a_next = sched.alpha_bar_at(t_next);
  const double scale = std::sqrt(a_next / a);
  const double c_eps = std::sqrt(1.0 - a_next) - scale * std::sqrt(1.0 - a);
  for (int it = 0; it < cfg.refine_iterations; ++it) {
    const Eigen::VectorXd eps_next = predict_column(model, next, t_next);
    Eigen::VectorXd updated = scale * x + c_eps * eps_next;
    const double change = (updated - next).lpNorm<Eigen::Infinity>();
    next = std::move(updated);
    if (change <= cfg.refine_tolerance) break;
  }
  return next;
}

}  // namespace

NoiseSchedule NoiseSchedule::linear(int T, double beta_min, double beta_max) {
  if (T < 1) throw ValidationError("schedule needs at least one step");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0))
    throw ValidationError("beta range must satisfy 0 < beta_min <= beta_max < 1");
  NoiseSchedule s;
  s.T = T;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.beta.resize(static_cast<std::size_t>(T));
  s.alpha_bar.resize(static_cast<std::size_t>(T));
  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    const double beta = T == 1 ? beta_min : beta_min + (beta_max - beta_min) * i / (T - 1);
    s.beta[static_cast<std::size_t>(i)] = beta;
    prod *= 1.0 - beta;
    s.alpha_bar[static_cast<std::size_t>(i)] = prod;
  }
  for (int i = 1; i < T; ++i) {
    if (!(s.alpha_bar[static_cast<std::size_t>(i)] < s.alpha_bar[static_cast<std::size_t>(i - 1)]))
      throw ValidationError("alpha_bar must be strictly decreasing");
  }
  return s;
}

double NoiseSchedule::alpha_bar_at(int t) const {
  if (t < 0 || t > T) throw ValidationError("timestep out of range");
  return t == 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(t - 1)];
}

Eigen::VectorXd to_model_space(const ImageBuffer& img) {
  const auto px = img.data();
  Eigen::VectorXd x(static_cast<Eigen::Index>(px.size()));
  for (std::size_t i = 0; i < px.size(); ++i) x[static_cast<Eigen::Index>(i)] = 2.0 * px[i] - 1.0;
  return x;
}

ImageBuffer from_model_space(const Eigen::VectorXd& x, int width, int height) {
  if (x.size() != static_cast<Eigen::Index>(width) * height * 3) throw ValidationError("shape mismatch");
  ImageBuffer img(width, height);
  auto px = img.data();
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = std::clamp(0.5 * (x[static_cast<Eigen::Index>(i)] + 1.0), 0.0, 1.0);
  return img;
}

Eigen::VectorXd forward_noise(const Eigen::VectorXd& x0, int t, const Eigen::VectorXd& eps,
                              const NoiseSchedule& sched) {
  if (x0.size() != eps.size()) throw ValidationError("shape mismatch");
  const double a = sched.alpha_bar_at(t);
  return std::sqrt(a) * x0 + std::sqrt(1.0 - a) * eps;
}

ImageBuffer forward_noise(const ImageBuffer& x0, int t, const ImageBuffer& eps, const NoiseSchedule& sched) {
  if (!x0.same_shape(eps)) throw ValidationError("shape mismatch");
  const double a = sched.alpha_bar_at(t);
  ImageBuffer out(x0.width(), x0.height());
  const auto src = x0.data();
  const auto noise = eps.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::sqrt(a) * src[i] + std::sqrt(1.0 - a) * noise[i];
  return out;
}

GaussianOracle::GaussianOracle(const NoiseSchedule& sched, Eigen::VectorXd mean, Eigen::VectorXd variance)
    : sched_(sched), mean_(std::move(mean)), variance_(std::move(variance)) {
  if (mean_.size() != variance_.size()) throw ValidationError("shape mismatch");
  if ((variance_.array() < 0.0).any()) throw ValidationError("variance must be nonnegative");
}

Eigen::MatrixXd GaussianOracle::predict(const Eigen::MatrixXd& x, int t) const {
  if (x.rows() != mean_.size()) throw ValidationError("shape mismatch");
  const double a = sched_.alpha_bar_at(t);
  const Eigen::ArrayXd gain = std::sqrt(1.0 - a) / (a * variance_.array() + (1.0 - a));
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    out.col(j) = (gain * (x.col(j) - std::sqrt(a) * mean_).array()).matrix();
  return out;
}

Eigen::MatrixXd ddim_step(const Eigen::MatrixXd& x_t, int t, int t_prev, const Eigen::MatrixXd& eps,
                          const NoiseSchedule& sched) {
  if (t_prev > t) throw ValidationError("ddim_step requires t_prev <= t");
  if (x_t.rows() != eps.rows() || x_t.cols() != eps.cols()) throw ValidationError("shape mismatch");
  if (t_prev == t) return x_t;
  return move(x_t, t, t_prev, eps, eps, sched);
}

Eigen::MatrixXd ddim_step(const Eigen::MatrixXd& x_t, int t, int t_prev, const EpsilonModel& model,
                          const NoiseSchedule& sched) {
  if (t_prev > t) throw ValidationError("ddim_step requires t_prev <= t");
  if (t_prev == t) return x_t;
  return ddim_step(x_t, t, t_prev, model.predict(x_t, t), sched);
}

Eigen::MatrixXd ddim_step_split(const Eigen::MatrixXd& x_t, int t, int t_prev, const Eigen::MatrixXd& eps_pred,
                                const Eigen::MatrixXd& eps_dir, const NoiseSchedule& sched) {
  if (t_prev > t) throw ValidationError("ddim_step requires t_prev <= t");
  if (t_prev == t) return x_t;
  return move(x_t, t, t_prev, eps_pred, eps_dir, sched);
}

std::vector<int> ddim_timesteps(const NoiseSchedule& sched, int steps, std::span<const int> include) {
  if (steps < 1 || steps > sched.T) throw ValidationError("steps must lie in [1, T]");
  std::vector<int> ts;
  for (int k = 0; k <= steps; ++k)
    ts.push_back(static_cast<int>(std::lround(static_cast<double>(k) * sched.T / steps)));
  for (int t : include) {
    if (t < 0 || t > sched.T) throw ValidationError("timestep out of range");
    ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

const Eigen::MatrixXd& DdimTrajectory::at(int t) const {
  const auto it = std::find(step_indices.begin(), step_indices.end(), t);
  if (it == step_indices.end()) throw NotFoundError("timestep not on trajectory");
  return states[static_cast<std::size_t>(it - step_indices.begin())];
}

DdimTrajectory ddim_invert(const Eigen::MatrixXd& x0, const EpsilonModel& model, const NoiseSchedule& sched,
                           const InversionConfig& cfg, std::span<const int> include, int t_stop) {
  if (x0.rows() != model.dim()) throw ValidationError("shape mismatch");
  if (cfg.refine_iterations < 0) throw ValidationError("refine_iterations must be nonnegative");
  if (t_stop < 0) t_stop = sched.T;
  auto ts = ddim_timesteps(sched, cfg.steps, include);
  if (std::find(ts.begin(), ts.end(), t_stop) == ts.end()) throw ValidationError("t_stop not on the step grid");
  ts.erase(std::upper_bound(ts.begin(), ts.end(), t_stop), ts.end());

  DdimTrajectory traj;
  traj.step_indices = ts;
  traj.states.push_back(x0);
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const auto& prev = traj.states.back();
    Eigen::MatrixXd next(prev.rows(), prev.cols());
    // Columns are inverted independently so a state never depends on which
    // other images share the batch.
    for (Eigen::Index j = 0; j < prev.cols(); ++j)
      next.col(j) = invert_step(prev.col(j), ts[k - 1], ts[k], model, sched, cfg);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Eigen::MatrixXd ddim_sample(const Eigen::MatrixXd& x_top, std::span<const int> timesteps, const EpsilonModel& model,
                            const NoiseSchedule& sched) {
  if (timesteps.empty()) throw ValidationError("empty timestep sequence");
  if (!std::is_sorted(timesteps.begin(), timesteps.end())) throw ValidationError("timesteps must ascend");
  Eigen::MatrixXd x = x_top;
  for (std::size_t k = timesteps.size() - 1; k > 0; --k) x = ddim_step(x, timesteps[k], timesteps[k - 1], model, sched);
  return x;
}

}  // namespace colorwai::diffgen
