#include <algorithm>
#include <cmath>
#include <memory>

#include "colorwai/error.hpp"
#include "colorwai/evalkit.hpp"
#include "colorwai/rng.hpp"

namespace colorwai::evalkit {
namespace {

struct EvalSample {
  std::unique_ptr<EditSubject> subject;
  int original_id = 0;
};

std::vector<EvalSample> eval_pool(const EditBackend& backend, const colorlab::ColorCodebook& book,
                                  const EvalConfig& cfg) {
  std::vector<EvalSample> pool;
  pool.reserve(static_cast<std::size_t>(cfg.m_eval_samples));
  for (int i = 0; i < cfg.m_eval_samples; ++i) {
    EvalSample s;
    s.subject = backend.subject(mix_seed(cfg.seed ^ 0xE7A1ULL, static_cast<std::uint64_t>(i)));
    s.original_id = colorlab::annotate_main_color(s.subject->original(), book, cfg.annotation);
    pool.push_back(std::move(s));
  }
  return pool;
}

struct Outcome {
  int final_id = 0;
  double final_hue = 0.0;
};

std::vector<Outcome> edit_outcomes(const std::vector<EvalSample>& pool, const colorlab::ColorCodebook& book,
                                   const disentangle::DirectionSpec& dir, const EvalConfig& cfg) {
  if (!dir.alpha_optimal) throw ValidationError("direction has no alpha_optimal");
  std::vector<Outcome> out;
  for (const auto& s : pool) {
    if (s.original_id == dir.color_id) continue;
    const auto img = s.subject->edited(dir, *dir.alpha_optimal);
    const auto main = colorlab::main_color(img, cfg.annotation);
    out.push_back({colorlab::quantize(main.hsv, book, cfg.annotation), main.hsv.h});
  }
  return out;
}

Accuracy p_acc_of(const std::vector<Outcome>& outcomes, int color_id) {
  if (outcomes.empty()) throw ValidationError("no eligible samples");
  const auto hits = std::count_if(outcomes.begin(), outcomes.end(), [&](const Outcome& o) { return o.final_id == color_id; });
  return {static_cast<double>(hits) / static_cast<double>(outcomes.size()), outcomes.size()};
}

Accuracy relaxed_of(const std::vector<Outcome>& outcomes, const std::vector<colorlab::HueInterval>& range) {
  if (outcomes.empty()) throw ValidationError("no eligible samples");
  double sum = 0.0;
  for (const auto& o : outcomes) sum += relaxed_score(range, o.final_hue);
  return {sum / static_cast<double>(outcomes.size()), outcomes.size()};
}

std::vector<colorlab::HueInterval> chromatic_range(const colorlab::ColorCodebook& book, int color_id,
                                                   const EvalConfig& cfg) {
  auto range = colorlab::hue_range(book, color_id, cfg.annotation.achromatic_saturation);
  if (range.empty()) throw ValidationError("relaxed metric undefined for achromatic color");
  return range;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  for (double v : values) a.std += (v - a.mean) * (v - a.mean);
  a.std = std::sqrt(a.std / static_cast<double>(values.size()));
  return a;
}

}  // namespace

double relaxed_score(std::span<const colorlab::HueInterval> range, double hue) {
  if (colorlab::hue_in_range(range, hue)) return 1.0;
  return std::max(0.0, 1.0 - std::fabs(colorlab::distance_to_range(range, hue) / 100.0));
}

Accuracy pseudo_accuracy(const EditBackend& backend, const colorlab::ColorCodebook& book,
                         const disentangle::DirectionSpec& dir, const EvalConfig& cfg) {
  cfg.validate();
  const auto pool = eval_pool(backend, book, cfg);
  return p_acc_of(edit_outcomes(pool, book, dir, cfg), dir.color_id);
}

Accuracy relaxed_accuracy(const EditBackend& backend, const colorlab::ColorCodebook& book,
                          const disentangle::DirectionSpec& dir, const EvalConfig& cfg) {
  cfg.validate();
  const auto range = chromatic_range(book, dir.color_id, cfg);
  const auto pool = eval_pool(backend, book, cfg);
  return relaxed_of(edit_outcomes(pool, book, dir, cfg), range);
}

CountMatrix confusion_matrix(const EditBackend& backend, const colorlab::ColorCodebook& book,
                             const disentangle::DirectionSet& set, const EvalConfig& cfg) {
  cfg.validate();
  const auto pool = eval_pool(backend, book, cfg);
  CountMatrix m(book.size(), std::vector<std::size_t>(book.size(), 0));
  for (const auto& dir : set.directions) {
    if (!book.valid_id(dir.color_id)) continue;
    for (const auto& o : edit_outcomes(pool, book, dir, cfg))
      ++m[static_cast<std::size_t>(dir.color_id)][static_cast<std::size_t>(o.final_id)];
  }
  return m;
}

EvalReport evaluate(const EditBackend& backend, const colorlab::ColorCodebook& book, disentangle::DirectionSet& set,
                    const EvalConfig& cfg) {
  cfg.validate();
  EvalReport report;
  report.backend = backend.id();
  report.method = disentangle::to_string(set.method);
  report.config = cfg;
  report.skipped = set.missing;
  report.confusion.assign(book.size(), std::vector<std::size_t>(book.size(), 0));

  std::vector<std::unique_ptr<EditSubject>> alpha_subjects;
  for (int i = 0; i < cfg.n_alpha_samples; ++i)
    alpha_subjects.push_back(backend.subject(mix_seed(cfg.seed ^ 0xA1FAULL, static_cast<std::uint64_t>(i))));
  const auto pool = eval_pool(backend, book, cfg);

  std::vector<double> p_values, relaxed_values;
  for (auto& dir : set.directions) {
    if (dir.space_tag != backend.space_tag()) throw ValidationError("direction/space mismatch");
    double sum = 0.0;
    for (const auto& s : alpha_subjects) sum += find_alpha_star(*s, dir, cfg, &report.ssim_guard);
    dir.alpha_optimal = sum / static_cast<double>(alpha_subjects.size());

    ColorRow row;
    row.color_id = dir.color_id;
    row.alpha_optimal = *dir.alpha_optimal;
    const auto outcomes = edit_outcomes(pool, book, dir, cfg);
    row.n_used = outcomes.size();
    if (outcomes.empty()) {
      row.note = "no eligible samples";
      report.rows.push_back(std::move(row));
      continue;
    }
    row.p_acc = p_acc_of(outcomes, dir.color_id).value;
    p_values.push_back(row.p_acc);
    try {
      row.relaxed_acc = relaxed_of(outcomes, chromatic_range(book, dir.color_id, cfg)).value;
      relaxed_values.push_back(*row.relaxed_acc);
    } catch (const ValidationError& e) {
      row.note = e.what();
    }
    for (const auto& o : outcomes)
      ++report.confusion[static_cast<std::size_t>(dir.color_id)][static_cast<std::size_t>(o.final_id)];
    report.rows.push_back(std::move(row));
  }
  report.p_acc = aggregate(p_values);
  report.relaxed_acc = aggregate(relaxed_values);
  return report;
}

}  // namespace colorwai::evalkit
