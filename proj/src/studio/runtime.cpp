#include "colorwai/runtime.hpp"

#include <spdlog/spdlog.h>

#include "colorwai/backends.hpp"
#include "colorwai/rng.hpp"

namespace colorwai::studio {

std::filesystem::path denoiser_path(const std::filesystem::path& root) { return root / "diffusion" / "denoiser.bin"; }

texgen::GeneratorConfig load_generator_config(const WorkspaceStore& store) {
  if (const auto doc = store.try_read("generator.json")) return doc->get<texgen::GeneratorConfig>();
  return {};
}

ImageBuffer diffusion_image(const texgen::ProceduralGenerator& gen, std::uint64_t seed) {
  return gen.synthesize(gen.sample_latent(seed).coords, kDiffusionResolution);
}

std::vector<ImageBuffer> diffusion_corpus(const texgen::ProceduralGenerator& gen, std::size_t n, std::uint64_t seed) {
  std::vector<ImageBuffer> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(diffusion_image(gen, mix_seed(seed, i)));
  return out;
}

Runtime open_runtime(const std::filesystem::path& root, StudioConfig cfg) {
  Runtime rt;
  rt.store = std::make_unique<WorkspaceStore>(root);
  rt.studio = std::make_unique<Studio>(*rt.store, std::move(cfg));
  auto gen = std::make_shared<const texgen::ProceduralGenerator>(load_generator_config(*rt.store));
  rt.studio->register_backend(std::make_shared<TexgenBackend>(gen));
  const auto weights = denoiser_path(root);
  if (std::filesystem::exists(weights)) {
    auto den = std::make_shared<const diffgen::Denoiser>(diffgen::Denoiser::load(weights));
    rt.studio->register_backend(std::make_shared<DiffgenBackend>(
        den, [gen](std::uint64_t seed) { return diffusion_image(*gen, seed); }));
  } else {
    spdlog::debug("no denoiser at {}, diffgen disabled", weights.string());
  }
  return rt;
}

}  // namespace colorwai::studio
