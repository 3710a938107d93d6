#pragma once

#include <memory>

#include "colorwai/backends.hpp"
#include "colorwai/colorlab.hpp"
#include "colorwai/disentangle.hpp"
#include "colorwai/rng.hpp"

namespace fixtures {

/// Default texgen pipeline state: a 19-color codebook built from 1000 renders
/// and a 1000-sample coupled dataset.
struct Texgen {
  std::shared_ptr<const colorwai::texgen::ProceduralGenerator> gen;
  std::shared_ptr<colorwai::TexgenBackend> backend;
  colorwai::colorlab::ColorCodebook book;
  colorwai::disentangle::LatentDataset data;
};

inline colorwai::colorlab::ColorCodebook texgen_codebook(const colorwai::texgen::ProceduralGenerator& gen,
                                                         std::size_t n = 1000, std::uint64_t seed = 11) {
  const colorwai::colorlab::AnnotationConfig ann;
  std::vector<colorwai::colorlab::Palette> palettes;
  for (std::size_t i = 0; i < n; ++i)
    palettes.push_back(colorwai::colorlab::extract_palette(gen.synthesize(gen.sample_latent(colorwai::mix_seed(seed, i))), ann));
  return colorwai::colorlab::build_codebook(palettes, 19);
}

inline const Texgen& texgen() {
  static const Texgen fx = [] {
    Texgen t;
    t.gen = std::make_shared<const colorwai::texgen::ProceduralGenerator>();
    t.backend = std::make_shared<colorwai::TexgenBackend>(t.gen);
    t.book = texgen_codebook(*t.gen);
    t.data = colorwai::disentangle::couple(*t.backend, t.book, {}, 1000, 1);
    return t;
  }();
  return fx;
}

}  // namespace fixtures
