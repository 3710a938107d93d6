#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace colorwai::numerics {

using Vector = Eigen::VectorXd;
/// Row-major sample matrix: one latent code per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LabeledLatentSet {
  Matrix codes;
  std::vector<std::uint8_t> labels;  // 1 = target class
  std::string space_tag;

  std::size_t size() const { return static_cast<std::size_t>(codes.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(codes.cols()); }
  std::size_t positives() const;

  /// Throws ValidationError on NaN/inf entries, label count mismatch or N < 2.
  void validate() const;
};

enum class LossKind { logistic, hinge };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& s);

struct LinearClassifier {
  Vector weights;
  double bias = 0.0;
  LossKind kind = LossKind::logistic;
  double c_reg = 0.1;
  int iterations = 0;
  double final_gradient_norm = 0.0;
};

struct TrainOptions {
  int max_iterations = 5000;
  double gradient_tolerance = 1e-6;
};

/// Full-batch accelerated gradient descent on
///   (1/n) sum loss(y_i (w.x_i + b)) + 1/(2 c_reg n) |w|^2
/// after seeded subsampling of the majority class down to the minority count.
/// `hinge` uses the squared hinge so that the objective stays smooth. An
/// infinite c_reg disables the penalty.
LinearClassifier train_linear_classifier(const LabeledLatentSet& data, LossKind kind, double c_reg,
                                         std::uint64_t seed, const TrainOptions& options = {});

/// w.x + b.
double decision_value(const LinearClassifier& clf, const Vector& x);

struct ShapleyAttribution {
  Vector phi;
  Vector background;
};

/// Exact Shapley values of the linear value function: phi_i = w_i (x_i - bg_i).
ShapleyAttribution shapley_linear(const LinearClassifier& clf, const Vector& x, const Vector& background);

using ValueFunction = std::function<double(const Vector&)>;

/// Shapley values by enumerating all 2^D coalitions; absent features take the
/// background value. D is limited to 12.
Vector shapley_exact(const ValueFunction& value, const Vector& x, const Vector& background);

/// Running record of how well the efficiency axiom held across attributions.
struct AttributionAudit {
  std::size_t attributions = 0;
  double max_efficiency_error = 0.0;
  void record(double error);
};

/// importance_i = mean_j |phi_ij| with the dataset mean as background,
/// normalized to sum to 1. Throws ValidationError("no variance") when every
/// attribution is zero.
Vector mean_abs_importance(const LinearClassifier& clf, const LabeledLatentSet& data,
                           AttributionAudit* audit = nullptr);

}  // namespace colorwai::numerics
