#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <png.h>

#include "colorwai/error.hpp"
#include "colorwai/png_io.hpp"

namespace colorwai {

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  if (img.width() < 1 || img.height() < 1) throw ValidationError("cannot encode an empty image");
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(img.width()) * img.height() * 3);
  const auto src = img.data();
  for (std::size_t i = 0; i < pixels.size(); ++i)
    pixels[i] = static_cast<std::uint8_t>(std::floor(std::clamp(src[i], 0.0, 1.0) * 255.0 + 0.5));

  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr))
    throw std::runtime_error(std::string("png encode failed: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr))
    throw std::runtime_error(std::string("png encode failed: ") + image.message);
  out.resize(size);
  return out;
}

ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw ValidationError(std::string("not a readable png: ") + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ValidationError(std::string("png decode failed: ") + image.message);
  }
  ImageBuffer img(static_cast<int>(image.width), static_cast<int>(image.height));
  auto dst = img.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = pixels[i] / 255.0;
  return img;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

ImageBuffer read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("no image at " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

ImageBuffer contact_sheet(const std::vector<ImageBuffer>& images, int columns, int gap) {
  if (images.empty()) throw ValidationError("contact sheet needs at least one image");
  if (columns < 1 || gap < 0) throw ValidationError("invalid contact sheet layout");
  const int w = images.front().width();
  const int h = images.front().height();
  for (const auto& img : images) {
    if (!img.same_shape(images.front())) throw ValidationError("contact sheet images differ in shape");
  }
  const int cols = std::min(columns, static_cast<int>(images.size()));
  const int rows = (static_cast<int>(images.size()) + cols - 1) / cols;
  ImageBuffer sheet(gap + cols * (w + gap), gap + rows * (h + gap), 1.0);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const int ox = gap + static_cast<int>(i % static_cast<std::size_t>(cols)) * (w + gap);
    const int oy = gap + static_cast<int>(i / static_cast<std::size_t>(cols)) * (h + gap);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) sheet.set_pixel(oy + y, ox + x, images[i].pixel(y, x));
  }
  return sheet;
}

}  // namespace colorwai
