#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "colorwai/direction.hpp"
#include "colorwai/image.hpp"

namespace colorwai::diffgen {

inline constexpr const char* kHSpaceTag = "h-analog";
inline constexpr const char* kInputSpaceTag = "xt-analog";

/// Linear beta schedule. Timesteps run 1..T; alpha_bar(0) is defined as 1.
struct NoiseSchedule {
  int T = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  std::vector<double> beta;
  std::vector<double> alpha_bar;

  /// Throws ValidationError unless 0 < beta_min <= beta_max < 1 and T >= 1.
  static NoiseSchedule linear(int T = 1000, double beta_min = 1e-4, double beta_max = 0.02);
  double alpha_bar_at(int t) const;
};

/// Images travel through the model flattened (HWC) and mapped to [-1, 1].
Eigen::VectorXd to_model_space(const ImageBuffer& img);
ImageBuffer from_model_space(const Eigen::VectorXd& x, int width, int height);

/// sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps, on images in [0,1]
/// model space. t in [0, T].
ImageBuffer forward_noise(const ImageBuffer& x0, int t, const ImageBuffer& eps, const NoiseSchedule& sched);
Eigen::VectorXd forward_noise(const Eigen::VectorXd& x0, int t, const Eigen::VectorXd& eps,
                              const NoiseSchedule& sched);

/// Noise predictor. Columns of `x` are independent states at the same t.
class EpsilonModel {
 public:
  virtual ~EpsilonModel() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& x, int t) const = 0;
};

/// Exact posterior-mean noise for data distributed N(mean, diag(variance)).
class GaussianOracle final : public EpsilonModel {
 public:
  GaussianOracle(const NoiseSchedule& sched, Eigen::VectorXd mean, Eigen::VectorXd variance);
  Eigen::Index dim() const override { return mean_.size(); }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, int t) const override;

 private:
  const NoiseSchedule& sched_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd variance_;
};

struct DenoiserArch {
  int input = 3072;
  int hidden = 512;
  int bottleneck = 128;
  int time_features = 64;
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

/// Fully connected encoder/decoder: x(+time embedding) -> hidden -> h -> hidden
/// -> residual noise. The noise estimate is the residual plus the
/// Gaussian-optimal linear term built from the corpus mean and variance, so
/// the network only learns the non-Gaussian part.
class Denoiser final : public EpsilonModel {
 public:
  Denoiser(const NoiseSchedule& sched, DenoiserArch arch, std::uint64_t init_seed);

  Eigen::Index dim() const override { return arch_.input; }
  const DenoiserArch& arch() const { return arch_; }
  const NoiseSchedule& schedule() const { return sched_; }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, int t) const override;
  /// Noise estimate with `dh` added to every column's bottleneck activation.
  Eigen::MatrixXd predict_shifted(const Eigen::MatrixXd& x, int t, const Eigen::VectorXd& dh) const;
  Eigen::MatrixXd h_activation(const Eigen::MatrixXd& x, int t) const;

  /// Sets the corpus statistics used by the linear term.
  void set_data_stats(double mean, double variance);
  double data_mean() const { return data_mean_; }
  double data_variance() const { return data_variance_; }

  /// Mean squared noise error per element on one batch.
  double loss(const Eigen::MatrixXd& x0, const std::vector<int>& ts, const Eigen::MatrixXd& eps) const;

  std::vector<double> loss_history;

  void save(const std::filesystem::path& path) const;
  static Denoiser load(const std::filesystem::path& path);

  bool operator==(const Denoiser& other) const;

 private:
  friend class Trainer;
  struct Cache;
  Eigen::MatrixXf time_features(const std::vector<int>& ts) const;
  Eigen::MatrixXd linear_term(const Eigen::MatrixXd& x, int t) const;
  Eigen::MatrixXf encode(const Eigen::MatrixXf& x, const Eigen::MatrixXf& tf, Cache* cache) const;
  Eigen::MatrixXf decode(const Eigen::MatrixXf& h, Cache* cache) const;

  NoiseSchedule sched_;
  DenoiserArch arch_;
  double data_mean_ = 0.0;
  double data_variance_ = 1.0;
  // Parameters, stored column-major as out x in.
  Eigen::MatrixXf w_in_, w_time_, w_h_, w_up_, w_out_;
  Eigen::VectorXf b_in_, b_h_, b_up_, b_out_;
};

/// Trains on images of identical shape with the standard noise-prediction
/// objective over uniform t. Deterministic for a fixed seed.
Denoiser train_denoiser(std::span<const ImageBuffer> corpus, const NoiseSchedule& sched, const TrainConfig& cfg,
                        DenoiserArch arch = {});

/// One deterministic DDIM update from t to t_prev (either direction). With
/// t_prev == t the state is returned unchanged.
Eigen::MatrixXd ddim_step(const Eigen::MatrixXd& x_t, int t, int t_prev, const Eigen::MatrixXd& eps,
                          const NoiseSchedule& sched);
Eigen::MatrixXd ddim_step(const Eigen::MatrixXd& x_t, int t, int t_prev, const EpsilonModel& model,
                          const NoiseSchedule& sched);
/// Step whose predicted image uses eps_pred while the direction term uses
/// eps_dir. Equal arguments reduce to ddim_step.
Eigen::MatrixXd ddim_step_split(const Eigen::MatrixXd& x_t, int t, int t_prev, const Eigen::MatrixXd& eps_pred,
                                const Eigen::MatrixXd& eps_dir, const NoiseSchedule& sched);

struct InversionConfig {
  int steps = 50;
  /// Fixed-point refinement per inverse step: x_next is corrected until the
  /// forward step from it lands back on x_t. Zero gives plain DDIM inversion.
  int refine_iterations = 20;
  double refine_tolerance = 1e-10;
};

/// Ascending timesteps 0 = t_0 < ... < t_steps = T, with every extra point in
/// `include` inserted.
std::vector<int> ddim_timesteps(const NoiseSchedule& sched, int steps, std::span<const int> include = {});

struct DdimTrajectory {
  std::vector<int> step_indices;
  /// One column block per state; states[k] corresponds to step_indices[k].
  std::vector<Eigen::MatrixXd> states;

  const Eigen::MatrixXd& at(int t) const;
};

/// Runs the inverse recursion from t=0 up to `t_stop` (T when negative).
DdimTrajectory ddim_invert(const Eigen::MatrixXd& x0, const EpsilonModel& model, const NoiseSchedule& sched,
                           const InversionConfig& cfg, std::span<const int> include = {}, int t_stop = -1);

/// Deterministic sampling along `timesteps` (ascending) from the state at
/// timesteps.back() down to timesteps.front().
Eigen::MatrixXd ddim_sample(const Eigen::MatrixXd& x_top, std::span<const int> timesteps, const EpsilonModel& model,
                            const NoiseSchedule& sched);

enum class MixTarget { h_space, input_space };

struct MixingConfig {
  int t_mix = 350;
  MixTarget target = MixTarget::h_space;
  void validate(const NoiseSchedule& sched) const;
};

std::string space_tag(MixTarget target);

/// Samples from x_{t_mix} down to 0 with the edit applied. For the h-space
/// target every step at t <= t_mix predicts the image from the shifted
/// bottleneck while the direction term keeps the unshifted noise; for the
/// input space x_{t_mix} moves once by alpha * n. One column per alpha.
Eigen::MatrixXd edited_from_mix(const Eigen::VectorXd& x_mix, const disentangle::DirectionSpec& dir,
                                std::span<const double> alphas, const MixingConfig& mix, const Denoiser& den,
                                std::span<const int> timesteps);

/// Full edit of an image: invert to t_mix, then edited_from_mix.
ImageBuffer edited_sample(const ImageBuffer& x0, const disentangle::DirectionSpec& dir, double alpha,
                          const MixingConfig& mix, const Denoiser& den, const InversionConfig& inv = {});

/// Invert-then-sample reconstruction through t_mix.
ImageBuffer reconstruct(const ImageBuffer& x0, const MixingConfig& mix, const Denoiser& den,
                        const InversionConfig& inv = {});

}  // namespace colorwai::diffgen
