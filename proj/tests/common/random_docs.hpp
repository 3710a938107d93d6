#pragma once

// Random instances of every persisted document type, for store round trips.

#include <string>

#include "colorwai/colorlab.hpp"
#include "colorwai/direction.hpp"
#include "colorwai/disentangle.hpp"
#include "colorwai/evalkit.hpp"
#include "colorwai/rng.hpp"
#include "colorwai/store.hpp"
#include "colorwai/studio.hpp"

namespace random_docs {

using colorwai::Rng;

inline std::string text(Rng& rng, std::size_t max_len = 24) {
  static const std::string alphabet = "abcXYZ019 _-\"\\/{}[]:,\n\t\xc3\xa9";
  std::string s;
  const auto n = rng.index(max_len + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = rng.index(alphabet.size() - 1);
    // Keep the two-byte sequence intact.
    if (alphabet[k] == '\xc3') s += "\xc3\xa9";
    else if (alphabet[k] != '\xa9') s += alphabet[k];
  }
  return s;
}

inline double real(Rng& rng) { return rng.normal() * std::pow(10.0, static_cast<double>(rng.index(13)) - 6.0); }

inline colorwai::colorlab::ColorCodebook codebook(Rng& rng) {
  colorwai::colorlab::ColorCodebook b;
  b.version = 1 + static_cast<int>(rng.index(50));
  const auto k = 1 + rng.index(25);
  for (std::size_t i = 0; i < k; ++i) {
    colorwai::colorlab::CodebookEntry e;
    e.id = static_cast<int>(i);
    e.name = text(rng);
    e.lab = {rng.uniform(0, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)};
    e.hsv = {rng.uniform(0, 360), rng.uniform(), rng.uniform()};
    b.entries.push_back(e);
  }
  return b;
}

inline colorwai::disentangle::DirectionSpec direction(Rng& rng, std::size_t dim, const std::string& space) {
  using namespace colorwai::disentangle;
  DirectionSpec d;
  d.method = static_cast<Method>(rng.index(3));
  d.color_id = static_cast<int>(rng.index(19));
  d.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  d.support.assign(dim, 0);
  for (std::size_t i = 0; i < dim; ++i)
    if (rng.uniform() < 0.5 || i == 0) {
      d.support[i] = 1;
      d.vector[static_cast<Eigen::Index>(i)] = rng.normal();
    }
  d.vector.normalize();
  d.hyperparams.kind = rng.index(2) ? colorwai::numerics::LossKind::hinge : colorwai::numerics::LossKind::logistic;
  d.hyperparams.c_reg = rng.index(5) == 0 ? std::numeric_limits<double>::infinity() : rng.uniform(1e-3, 10);
  d.hyperparams.k = 1 + static_cast<int>(rng.index(64));
  d.hyperparams.explanation = rng.uniform(0.01, 0.99);
  if (rng.index(2)) d.alpha_optimal = rng.uniform(0, 3);
  d.space_tag = space;
  d.seed = rng.next_u64();
  d.dataset_hash = text(rng, 64);
  return d;
}

inline colorwai::disentangle::DirectionSet direction_set(Rng& rng) {
  using namespace colorwai::disentangle;
  DirectionSet s;
  s.version = 1 + static_cast<int>(rng.index(100));
  s.backend = text(rng, 10);
  s.space_tag = text(rng, 10);
  s.codebook_version = 1 + static_cast<int>(rng.index(10));
  s.method = static_cast<Method>(rng.index(3));
  const auto dim = 1 + rng.index(70);
  const auto n = rng.index(6);
  for (std::size_t i = 0; i < n; ++i) s.directions.push_back(direction(rng, dim, s.space_tag));
  for (std::size_t i = rng.index(3); i > 0; --i) s.missing.push_back({static_cast<int>(rng.index(19)), text(rng)});
  return s;
}

inline colorwai::disentangle::LatentDataset dataset(Rng& rng) {
  colorwai::disentangle::LatentDataset d;
  const auto n = static_cast<Eigen::Index>(1 + rng.index(40));
  const auto dim = static_cast<Eigen::Index>(1 + rng.index(20));
  d.codes.resize(n, dim);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) d.codes(r, c) = real(rng);
    d.color_ids.push_back(static_cast<int>(rng.index(19)));
    d.sample_seeds.push_back(rng.next_u64());
  }
  d.space_tag = text(rng, 10);
  d.backend_id = text(rng, 10);
  d.codebook_version = 1 + static_cast<int>(rng.index(10));
  d.seed = rng.next_u64();
  for (std::size_t i = rng.index(4); i > 0; --i) d.absent_colors.push_back(static_cast<int>(rng.index(19)));
  return d;
}

inline colorwai::studio::PatternRecord pattern(Rng& rng) {
  colorwai::studio::PatternRecord r;
  r.backend_id = text(rng, 10);
  if (rng.index(2)) r.seed = rng.next_u64();
  if (rng.index(2)) r.parent_id = text(rng, 24);
  for (std::size_t i = rng.index(80); i > 0; --i) r.latent.push_back(real(rng));
  if (rng.index(2))
    r.edit = colorwai::studio::EditRef{text(rng, 12), static_cast<int>(rng.index(9)), static_cast<int>(rng.index(19)),
                                       rng.uniform(-3, 3)};
  r.image = text(rng, 64);
  r.color_id = static_cast<int>(rng.index(19));
  r.created_at = text(rng, 20);
  if (rng.index(2)) r.request = {{"color_id", rng.index(19)}, {"alpha", real(rng)}, {"note", text(rng)}};
  r.id = colorwai::studio::pattern_id(r);
  return r;
}

inline colorwai::studio::Board board(Rng& rng) {
  colorwai::studio::Board b;
  b.id = text(rng, 16);
  b.name = text(rng, 40);
  for (std::size_t i = rng.index(25); i > 0; --i) {
    colorwai::studio::BoardItem item{text(rng, 24), nullptr};
    if (rng.index(2)) item.request = {{"color_id", rng.index(19)}, {"method", text(rng, 8)}};
    b.pinned.push_back(item);
  }
  b.created_at = text(rng, 20);
  b.updated_at = text(rng, 20);
  return b;
}

inline colorwai::evalkit::EvalReport report(Rng& rng) {
  using namespace colorwai::evalkit;
  EvalReport r;
  r.backend = text(rng, 10);
  r.method = text(rng, 10);
  r.config.ssim_ratio = rng.uniform();
  r.config.alpha_max = rng.uniform(0.5, 5);
  r.config.seed = rng.next_u64();
  const auto k = rng.index(20);
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < k; ++i) {
    ColorRow row;
    row.color_id = static_cast<int>(i);
    row.alpha_optimal = rng.uniform(0, 3);
    row.p_acc = rng.uniform();
    if (rng.index(2)) row.relaxed_acc = rng.uniform();
    row.n_used = rng.index(200);
    row.note = text(rng);
    r.rows.push_back(row);
    for (auto& v : r.confusion[i]) v = rng.index(100);
  }
  r.p_acc = {rng.uniform(), rng.uniform(), k};
  r.relaxed_acc = {rng.uniform(), rng.uniform(), rng.index(20)};
  r.ssim_guard = {rng.index(1000), rng.index(3), rng.uniform()};
  for (std::size_t i = rng.index(3); i > 0; --i) r.skipped.push_back({static_cast<int>(rng.index(19)), text(rng)});
  return r;
}

/// Writes `doc` under `rel` and checks that a fresh store reads back an equal
/// value. Returns false on any mismatch.
template <typename T>
bool round_trips(colorwai::studio::WorkspaceStore& store, const std::string& rel, const T& doc) {
  store.write(rel, nlohmann::json(doc));
  colorwai::studio::WorkspaceStore reopened(store.root());
  return reopened.read(rel).get<T>() == doc;
}

}  // namespace random_docs
