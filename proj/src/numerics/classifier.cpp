#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "colorwai/error.hpp"
#include "colorwai/numerics.hpp"
#include "colorwai/rng.hpp"

namespace colorwai::numerics {
namespace {

// Rows chosen for training: all of the minority class plus an equally sized
// seeded subsample of the majority class, in ascending row order.
std::vector<Eigen::Index> balanced_rows(const LabeledLatentSet& data, std::uint64_t seed) {
  std::vector<Eigen::Index> pos, neg;
  for (std::size_t i = 0; i < data.labels.size(); ++i)
    (data.labels[i] ? pos : neg).push_back(static_cast<Eigen::Index>(i));
  auto& major = pos.size() > neg.size() ? pos : neg;
  const auto& minor = pos.size() > neg.size() ? neg : pos;
  if (major.size() > minor.size()) {
    Rng rng(mix_seed(seed, 0xba1a));
    for (std::size_t i = 0; i < minor.size(); ++i) {
      const auto j = i + static_cast<std::size_t>(rng.index(major.size() - i));
      std::swap(major[i], major[j]);
    }
    major.resize(minor.size());
  }
  std::vector<Eigen::Index> rows(pos);
  rows.insert(rows.end(), neg.begin(), neg.end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

// Largest eigenvalue of A^T A / n for the bias-augmented design matrix A.
double gram_spectral_norm(const Eigen::MatrixXd& a) {
  const double n = static_cast<double>(a.rows());
  Eigen::MatrixXd gram = a.rows() < a.cols() ? Eigen::MatrixXd(a * a.transpose())
                                             : Eigen::MatrixXd(a.transpose() * a);
  gram /= n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  return std::max(solver.eigenvalues().maxCoeff(), 1e-12);
}

struct Objective {
  const Eigen::MatrixXd& a;  // n x (D+1), last column all ones
  const Eigen::VectorXd& y;  // +-1
  LossKind kind;
  double lambda;

  // Gradient with respect to theta = (w, b); the bias is not penalized.
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd margin = y.cwiseProduct(a * theta);
    Eigen::VectorXd dm(margin.size());
    for (Eigen::Index i = 0; i < margin.size(); ++i) {
      if (kind == LossKind::logistic) {
        dm[i] = -y[i] / (1.0 + std::exp(margin[i]));
      } else {
        dm[i] = -2.0 * y[i] * std::max(0.0, 1.0 - margin[i]);
      }
    }
    Eigen::VectorXd g = a.transpose() * dm / static_cast<double>(a.rows());
    g.head(g.size() - 1) += lambda * theta.head(theta.size() - 1);
    return g;
  }
};

}  // namespace

std::size_t LabeledLatentSet::positives() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; }));
}

void LabeledLatentSet::validate() const {
  if (static_cast<std::size_t>(codes.rows()) != labels.size())
    throw ValidationError("label count does not match code rows");
  if (codes.rows() < 2) throw ValidationError("at least two samples required");
  if (!codes.allFinite()) throw ValidationError("non-finite latent coordinates");
}

std::string to_string(LossKind kind) { return kind == LossKind::logistic ? "logistic" : "hinge"; }

LossKind parse_loss_kind(const std::string& s) {
  if (s == "logistic" || s == "lr") return LossKind::logistic;
  if (s == "hinge" || s == "svm") return LossKind::hinge;
  throw ValidationError("unknown classifier kind '" + s + "'");
}

LinearClassifier train_linear_classifier(const LabeledLatentSet& data, LossKind kind, double c_reg,
                                         std::uint64_t seed, const TrainOptions& options) {
  data.validate();
  const std::size_t pos = data.positives();
  if (pos == 0 || pos == data.size()) throw ValidationError("degenerate labels");
  if (!(c_reg > 0.0)) throw ValidationError("c_reg must be positive");

  const auto rows = balanced_rows(data, seed);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(data.dim());
  Eigen::MatrixXd a(n, d + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.row(i).head(d) = data.codes.row(rows[static_cast<std::size_t>(i)]);
    a(i, d) = 1.0;
    y[i] = data.labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] ? 1.0 : -1.0;
  }

  const double lambda = std::isinf(c_reg) ? 0.0 : 1.0 / (c_reg * static_cast<double>(n));
  const double curvature = kind == LossKind::logistic ? 0.25 : 2.0;
  const double lipschitz = curvature * gram_spectral_norm(a) + lambda;
  const double step = 1.0 / lipschitz;

  Objective obj{a, y, kind, lambda};
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd momentum_point = theta;
  double t = 1.0;
  LinearClassifier clf;
  clf.kind = kind;
  clf.c_reg = c_reg;

  Eigen::VectorXd g = obj.gradient(theta);
  int iter = 0;
  for (; iter < options.max_iterations && g.norm() >= options.gradient_tolerance; ++iter) {
    const Eigen::VectorXd g_y = obj.gradient(momentum_point);
    Eigen::VectorXd next = momentum_point - step * g_y;
    // Adaptive restart when the momentum opposes descent.
    if (g_y.dot(next - theta) > 0.0) {
      t = 1.0;
      next = theta - step * g;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    momentum_point = next + ((t - 1.0) / t_next) * (next - theta);
    theta = std::move(next);
    t = t_next;
    g = obj.gradient(theta);
  }

  if (!theta.allFinite()) throw std::runtime_error("classifier training diverged");
  clf.weights = theta.head(d);
  clf.bias = theta[d];
  clf.iterations = iter;
  clf.final_gradient_norm = g.norm();
  return clf;
}

double decision_value(const LinearClassifier& clf, const Vector& x) {
  if (x.size() != clf.weights.size()) throw ValidationError("dimension mismatch");
  return clf.weights.dot(x) + clf.bias;
}

}  // namespace colorwai::numerics
