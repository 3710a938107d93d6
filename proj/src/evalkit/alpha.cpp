#include <cmath>

#include "colorwai/error.hpp"
#include "colorwai/evalkit.hpp"
#include "colorwai/rng.hpp"

namespace colorwai::evalkit {

void EvalConfig::validate() const {
  if (!(ssim_ratio > 0.0 && ssim_ratio <= 1.0)) throw ValidationError("ssim_ratio must lie in (0,1]");
  if (!(alpha_step > 0.0)) throw ValidationError("alpha grid step must be positive");
  if (!(alpha_max >= 0.0)) throw ValidationError("alpha grid max must be nonnegative");
  if (n_alpha_samples < 1) throw ValidationError("n_alpha_samples must be at least 1");
  if (m_eval_samples < 1) throw ValidationError("m_eval_samples must be at least 1");
  ssim.validate();
  annotation.validate();
}

std::vector<double> EvalConfig::alpha_grid() const {
  const auto steps = static_cast<int>(std::floor(alpha_max / alpha_step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) grid.push_back(i * alpha_step);
  return grid;
}

double find_alpha_star(const EditSubject& subject, const disentangle::DirectionSpec& dir, const EvalConfig& cfg,
                       SsimGuard* guard) {
  const auto& original = subject.original();
  const double threshold = cfg.ssim_ratio * numerics::ssim(original, original, cfg.ssim);
  const auto grid = cfg.alpha_grid();
  double best = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (numerics::ssim(original, subject.edited(dir, grid[i]), cfg.ssim) >= threshold) best = grid[i];
  }
  if (guard) {
    const double s = numerics::ssim(original, subject.edited(dir, best), cfg.ssim);
    ++guard->samples;
    if (!(s >= threshold)) ++guard->violations;
    guard->min_ssim = std::min(guard->min_ssim, s);
  }
  return best;
}

double alpha_optimal(const EditBackend& backend, const disentangle::DirectionSpec& dir, const EvalConfig& cfg,
                     SsimGuard* guard) {
  cfg.validate();
  double sum = 0.0;
  for (int i = 0; i < cfg.n_alpha_samples; ++i) {
    const auto subject = backend.subject(mix_seed(cfg.seed ^ 0xA1FAULL, static_cast<std::uint64_t>(i)));
    sum += find_alpha_star(*subject, dir, cfg, guard);
  }
  return sum / cfg.n_alpha_samples;
}

}  // namespace colorwai::evalkit
