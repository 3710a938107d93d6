#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "colorwai/image.hpp"

namespace colorwai {

/// 8-bit RGB PNG. Channels are quantized with round-half-up after clamping
/// to [0,1].
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes);

void write_png(const std::filesystem::path& path, const ImageBuffer& img);
ImageBuffer read_png(const std::filesystem::path& path);

/// Tiles images left to right, top to bottom with `columns` per row and a
/// `gap`-pixel background margin. All images must share one shape.
ImageBuffer contact_sheet(const std::vector<ImageBuffer>& images, int columns, int gap = 4);

}  // namespace colorwai
