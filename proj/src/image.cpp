#include "metapipe/image.hpp"

#include <png.h>

#include <cstring>
#include <string>

#include "metapipe/core.hpp"

namespace metapipe {

RgbImage read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw Error(path.string() + ": " + png.message);
  if ((png.format & PNG_FORMAT_FLAG_ALPHA) != 0) {
    png_image_free(&png);
    throw Error(path.string() + ": alpha channel not supported");
  }
  png.format = PNG_FORMAT_RGB;
  RgbImage img;
  img.height = png.height;
  img.width = png.width;
  img.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr))
    throw Error(path.string() + ": " + png.message);
  return img;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  if (image.height == 0 || image.width == 0) throw Error("write_png: empty image");
  if (image.pixels.size() != image.height * image.width * 3)
    throw Error("write_png: pixel buffer does not match dimensions");
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(), 0, nullptr))
    throw Error(path.string() + ": " + png.message);
}

}  // namespace metapipe
