#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include "colorwai/error.hpp"
#include "colorwai/numerics.hpp"

namespace colorwai::numerics {

ShapleyAttribution shapley_linear(const LinearClassifier& clf, const Vector& x, const Vector& background) {
  if (x.size() != clf.weights.size() || background.size() != clf.weights.size())
    throw ValidationError("dimension mismatch");
  return {clf.weights.cwiseProduct(x - background), background};
}

Vector shapley_exact(const ValueFunction& value, const Vector& x, const Vector& background) {
  if (x.size() != background.size()) throw ValidationError("dimension mismatch");
  const auto d = static_cast<int>(x.size());
  if (d > 12) throw ValidationError("enumeration too large");

  const std::size_t coalitions = std::size_t{1} << d;
  std::vector<double> f(coalitions);
  Vector probe(d);
  for (std::size_t mask = 0; mask < coalitions; ++mask) {
    for (int i = 0; i < d; ++i) probe[i] = (mask >> i) & 1U ? x[i] : background[i];
    f[mask] = value(probe);
  }

  // weight[s] = s! (d - s - 1)! / d!
  std::vector<double> weight(static_cast<std::size_t>(std::max(d, 1)));
  for (int s = 0; s < d; ++s)
    weight[static_cast<std::size_t>(s)] = std::exp(std::lgamma(s + 1.0) + std::lgamma(d - s + 0.0) - std::lgamma(d + 1.0));

  Vector phi = Vector::Zero(d);
  for (int i = 0; i < d; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < coalitions; ++mask) {
      if (mask & bit) continue;
      const int size = std::popcount(mask);
      phi[i] += weight[static_cast<std::size_t>(size)] * (f[mask | bit] - f[mask]);
    }
  }
  return phi;
}

void AttributionAudit::record(double error) {
  ++attributions;
  max_efficiency_error = std::max(max_efficiency_error, std::fabs(error));
}

Vector mean_abs_importance(const LinearClassifier& clf, const LabeledLatentSet& data, AttributionAudit* audit) {
  data.validate();
  if (data.dim() != static_cast<std::size_t>(clf.weights.size())) throw ValidationError("dimension mismatch");

  const Vector background = data.codes.colwise().mean().transpose();
  const double f_background = decision_value(clf, background);
  Vector total = Vector::Zero(clf.weights.size());
  for (Eigen::Index r = 0; r < data.codes.rows(); ++r) {
    const Vector x = data.codes.row(r).transpose();
    const auto attribution = shapley_linear(clf, x, background);
    if (audit) audit->record(attribution.phi.sum() - (decision_value(clf, x) - f_background));
    total += attribution.phi.cwiseAbs();
  }
  const double sum = total.sum();
  if (!(sum > 0.0)) throw ValidationError("no variance");
  return total / sum;
}

}  // namespace colorwai::numerics
