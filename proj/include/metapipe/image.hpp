#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace metapipe {

/// 8-bit RGB image, pixels row-major with R,G,B interleaved.
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Decodes a PNG to 8-bit RGB. Grayscale and palette images are expanded and
/// 16-bit samples reduced. Images with an alpha channel are rejected.
RgbImage read_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace metapipe
