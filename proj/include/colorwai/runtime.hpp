#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "colorwai/studio.hpp"
#include "colorwai/texgen.hpp"

namespace colorwai::studio {

/// Side length of the diffusion backend's images.
inline constexpr int kDiffusionResolution = 32;

std::filesystem::path denoiser_path(const std::filesystem::path& root);

/// Generator config stored in the workspace, or the default one.
texgen::GeneratorConfig load_generator_config(const WorkspaceStore& store);

/// Texgen render of the seeded latent at the diffusion resolution.
ImageBuffer diffusion_image(const texgen::ProceduralGenerator& gen, std::uint64_t seed);
std::vector<ImageBuffer> diffusion_corpus(const texgen::ProceduralGenerator& gen, std::size_t n, std::uint64_t seed);

/// A store plus a studio with texgen registered, and diffgen too when trained
/// weights are present.
struct Runtime {
  std::unique_ptr<WorkspaceStore> store;
  std::unique_ptr<Studio> studio;
};

Runtime open_runtime(const std::filesystem::path& root, StudioConfig cfg = {});

}  // namespace colorwai::studio
