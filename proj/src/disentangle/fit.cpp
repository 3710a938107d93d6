#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "colorwai/disentangle.hpp"
#include "colorwai/error.hpp"

namespace colorwai::disentangle {
namespace {

// Flips the direction so positives project above negatives on average.
void orient_toward_class(Eigen::VectorXd& v, const numerics::LabeledLatentSet& set) {
  double pos = 0.0, neg = 0.0;
  std::size_t np = 0, nn = 0;
  for (Eigen::Index r = 0; r < set.codes.rows(); ++r) {
    const double p = set.codes.row(r).dot(v);
    if (set.labels[static_cast<std::size_t>(r)]) {
      pos += p;
      ++np;
    } else {
      neg += p;
      ++nn;
    }
  }
  if (np > 0 && nn > 0 && pos / static_cast<double>(np) - neg / static_cast<double>(nn) < 0.0) v = -v;
}

Eigen::VectorXd unit(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("degenerate direction");
  return v / n;
}

void require_both_classes(const numerics::LabeledLatentSet& set) {
  const auto pos = set.positives();
  if (pos == 0 || pos == set.size()) throw ValidationError("degenerate labels");
}

}  // namespace

DirectionSpec fit_interfacegan(const LatentDataset& data, int color_id, numerics::LossKind kind, double c_reg,
                               std::uint64_t seed) {
  const auto set = data.one_vs_rest(color_id);
  require_both_classes(set);
  const auto clf = numerics::train_linear_classifier(set, kind, c_reg, seed);

  DirectionSpec d;
  d.method = Method::interfacegan;
  d.color_id = color_id;
  d.vector = unit(clf.weights);
  orient_toward_class(d.vector, set);
  d.support.assign(data.dim(), 1);
  d.hyperparams.kind = kind;
  d.hyperparams.c_reg = c_reg;
  d.space_tag = data.space_tag;
  d.seed = seed;
  d.dataset_hash = data.hash();
  return d;
}

DirectionSpec fit_stylespace(const LatentDataset& data, int color_id, int k) {
  if (k < 1) throw ValidationError("stylespace needs k >= 1");
  const auto set = data.one_vs_rest(color_id);
  set.validate();
  require_both_classes(set);

  const Eigen::Index dim = set.codes.cols();
  const Eigen::VectorXd mean = set.codes.colwise().mean().transpose();
  Eigen::VectorXd mean_c = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index r = 0; r < set.codes.rows(); ++r)
    if (set.labels[static_cast<std::size_t>(r)]) mean_c += set.codes.row(r).transpose();
  mean_c /= static_cast<double>(set.positives());
  const Eigen::VectorXd std_dev =
      ((set.codes.rowwise() - mean.transpose()).array().square().colwise().mean()).sqrt().transpose();

  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (std_dev[i] > 0.0) {
      order.push_back(i);
    } else {
      spdlog::warn("stylespace: dimension {} has zero variance and is excluded", i);
    }
  }
  const Eigen::VectorXd deviation = mean_c - mean;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::fabs(deviation[a]) / std_dev[a] > std::fabs(deviation[b]) / std_dev[b];
  });
  order.resize(std::min(order.size(), static_cast<std::size_t>(k)));

  DirectionSpec d;
  d.method = Method::stylespace;
  d.color_id = color_id;
  d.support.assign(static_cast<std::size_t>(dim), 0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  for (auto i : order) {
    d.support[static_cast<std::size_t>(i)] = 1;
    v[i] = deviation[i];
  }
  d.vector = unit(v);
  d.hyperparams.k = k;
  d.space_tag = data.space_tag;
  d.dataset_hash = data.hash();
  return d;
}

std::vector<std::uint8_t> explanation_support(const Eigen::VectorXd& importance, double explanation) {
  if (!(explanation > 0.0 && explanation < 1.0)) throw ValidationError("explanation must lie in (0,1)");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(importance.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return importance[a] > importance[b]; });
  std::vector<std::uint8_t> support(order.size(), 0);
  double cumulative = 0.0;
  for (auto i : order) {
    if (cumulative >= explanation - 1e-12) break;
    if (!(importance[i] > 0.0)) break;
    support[static_cast<std::size_t>(i)] = 1;
    cumulative += importance[i];
  }
  return support;
}

DirectionSpec fit_shapleyvec(const LatentDataset& data, int color_id, double explanation,
                             numerics::LossKind kind, double c_reg, std::uint64_t seed,
                             numerics::AttributionAudit* audit) {
  if (!(explanation > 0.0 && explanation < 1.0)) throw ValidationError("explanation must lie in (0,1)");
  const auto set = data.one_vs_rest(color_id);
  require_both_classes(set);

  const auto first = numerics::train_linear_classifier(set, kind, c_reg, seed);
  const Eigen::VectorXd importance = numerics::mean_abs_importance(first, set, audit);
  const auto support = explanation_support(importance, explanation);
  if (std::none_of(support.begin(), support.end(), [](auto s) { return s != 0; }))
    throw ValidationError("explanation support collapsed to zero dimensions");

  numerics::LabeledLatentSet masked = set;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (!support[i]) masked.codes.col(static_cast<Eigen::Index>(i)).setZero();
  const auto second = numerics::train_linear_classifier(masked, kind, c_reg, seed);

  Eigen::VectorXd v = second.weights;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (!support[i]) v[static_cast<Eigen::Index>(i)] = 0.0;

  DirectionSpec d;
  d.method = Method::shapleyvec;
  d.color_id = color_id;
  d.vector = unit(v);
  orient_toward_class(d.vector, set);
  d.support = support;
  d.hyperparams.kind = kind;
  d.hyperparams.c_reg = c_reg;
  d.hyperparams.explanation = explanation;
  d.space_tag = data.space_tag;
  d.seed = seed;
  d.dataset_hash = data.hash();
  return d;
}

DirectionSet fit_all(const LatentDataset& data, const colorlab::ColorCodebook& book, Method method,
                     const FitConfig& cfg, numerics::AttributionAudit* audit) {
  DirectionSet set;
  set.backend = data.backend_id;
  set.space_tag = data.space_tag;
  set.codebook_version = book.version;
  set.method = method;
  const auto& h = cfg.hyperparams;
  for (const auto& entry : book.entries) {
    try {
      DirectionSpec d;
      switch (method) {
        case Method::interfacegan:
          d = fit_interfacegan(data, entry.id, h.kind, h.c_reg, cfg.seed);
          break;
        case Method::stylespace:
          d = fit_stylespace(data, entry.id, h.k);
          d.seed = cfg.seed;
          break;
        case Method::shapleyvec:
          d = fit_shapleyvec(data, entry.id, h.explanation, h.kind, h.c_reg, cfg.seed, audit);
          break;
      }
      d.hyperparams = h;
      set.directions.push_back(std::move(d));
    } catch (const ValidationError& e) {
      set.missing.push_back({entry.id, e.what()});
    }
  }
  return set;
}

}  // namespace colorwai::disentangle
