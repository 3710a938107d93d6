#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "colorwai/backend.hpp"
#include "colorwai/colorlab.hpp"
#include "colorwai/direction.hpp"
#include "colorwai/ssim.hpp"
#include "json.hpp"

namespace colorwai::evalkit {

struct EvalConfig {
  double ssim_ratio = 0.75;
  double alpha_max = 3.0;
  double alpha_step = 0.05;
  int n_alpha_samples = 32;
  int m_eval_samples = 100;
  std::uint64_t seed = 2024;
  numerics::SsimConfig ssim;
  colorlab::AnnotationConfig annotation;

  void validate() const;
  /// 0, step, 2*step, ... up to alpha_max inclusive.
  std::vector<double> alpha_grid() const;
  bool operator==(const EvalConfig&) const = default;
};

/// Counts how often the SSIM floor held for the alpha* picked per sample.
struct SsimGuard {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_ssim = 1.0;
  bool operator==(const SsimGuard&) const = default;
};

/// Largest grid alpha whose edited render keeps SSIM to the original at or
/// above ssim_ratio * SSIM(original, original). Returns 0 when no positive
/// grid point qualifies.
double find_alpha_star(const EditSubject& subject, const disentangle::DirectionSpec& dir, const EvalConfig& cfg,
                       SsimGuard* guard = nullptr);

/// Mean alpha* over n_alpha_samples seeded subjects.
double alpha_optimal(const EditBackend& backend, const disentangle::DirectionSpec& dir, const EvalConfig& cfg,
                     SsimGuard* guard = nullptr);

struct Accuracy {
  double value = 0.0;
  std::size_t n_used = 0;
};

/// Fraction of edited samples (already-c removed) whose main color is c.
/// Requires dir.alpha_optimal. Throws ValidationError("no eligible samples").
Accuracy pseudo_accuracy(const EditBackend& backend, const colorlab::ColorCodebook& book,
                         const disentangle::DirectionSpec& dir, const EvalConfig& cfg);

/// Mean per-sample hue score: 1 inside the target hue range, otherwise
/// max(0, 1 - d/100) with d the distance in degrees to the nearest border.
Accuracy relaxed_accuracy(const EditBackend& backend, const colorlab::ColorCodebook& book,
                          const disentangle::DirectionSpec& dir, const EvalConfig& cfg);

double relaxed_score(std::span<const colorlab::HueInterval> range, double hue);

using CountMatrix = std::vector<std::vector<std::size_t>>;

/// Entry (i, j): samples edited toward color i (already-i removed) that end
/// annotated j.
CountMatrix confusion_matrix(const EditBackend& backend, const colorlab::ColorCodebook& book,
                             const disentangle::DirectionSet& set, const EvalConfig& cfg);

struct ColorRow {
  int color_id = 0;
  double alpha_optimal = 0.0;
  double p_acc = 0.0;
  std::optional<double> relaxed_acc;
  std::size_t n_used = 0;
  std::string note;
  bool operator==(const ColorRow&) const = default;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
  bool operator==(const Aggregate&) const = default;
};

struct EvalReport {
  int version = 1;
  std::string backend;
  std::string method;
  EvalConfig config;
  std::vector<ColorRow> rows;
  Aggregate p_acc;
  Aggregate relaxed_acc;
  CountMatrix confusion;
  SsimGuard ssim_guard;
  std::vector<disentangle::PartialColor> skipped;
  bool operator==(const EvalReport&) const = default;
};

/// Runs alpha-optimal search, stores the result into each direction of `set`,
/// then scores every direction on one shared pool of m evaluation samples.
EvalReport evaluate(const EditBackend& backend, const colorlab::ColorCodebook& book,
                    disentangle::DirectionSet& set, const EvalConfig& cfg);

struct RepresentationReport {
  int version = 1;
  std::vector<int> color_ids;
  std::vector<std::vector<double>> cosine;
  std::vector<std::vector<std::size_t>> overlap;
  std::vector<std::size_t> support_sizes;
  bool operator==(const RepresentationReport&) const = default;
};

/// Pairwise direction cosines and shared-support counts. Throws
/// ValidationError when directions come from different spaces.
RepresentationReport representation_report(const disentangle::DirectionSet& set);

void to_json(nlohmann::json& j, const EvalConfig& c);
void from_json(const nlohmann::json& j, EvalConfig& c);
void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);
void to_json(nlohmann::json& j, const RepresentationReport& r);
void from_json(const nlohmann::json& j, RepresentationReport& r);

std::string rows_csv(const EvalReport& r);
std::string matrix_csv(const CountMatrix& m);
std::string matrix_csv(const std::vector<std::vector<double>>& m);

}  // namespace colorwai::evalkit
