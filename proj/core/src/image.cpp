#include "l2ot/image.hpp"

#include <png.h>

#include <cmath>
#include <cstring>

#include "l2ot/errors.hpp"

namespace l2ot {

ImageBuffer read_png(const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;

  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw ParseError("cannot read PNG '" + path + "': " + png.message);
  }

  const bool alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  png.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  const int channels = alpha ? 4 : 3;

  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&png);
    throw ParseError("cannot decode PNG '" + path + "': " + png.message);
  }

  ImageBuffer img;
  img.width = static_cast<int>(png.width);
  img.height = static_cast<int>(png.height);
  img.has_alpha = alpha;
  img.rgb.resize(img.pixel_count() * 3);
  if (alpha) img.alpha.resize(img.pixel_count());

  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      img.rgb[p * 3 + c] = bytes[p * channels + c] / 255.0;
    }
    if (alpha) img.alpha[p] = bytes[p * channels + 3];
  }
  return img;
}

void write_png(const std::string& path, const ImageBuffer& img) {
  if (img.width < 1 || img.height < 1 ||
      img.rgb.size() != img.pixel_count() * 3 ||
      (img.has_alpha && img.alpha.size() != img.pixel_count())) {
    throw std::invalid_argument("write_png: inconsistent image buffer");
  }
  const int channels = img.has_alpha ? 4 : 3;
  std::vector<std::uint8_t> bytes(img.pixel_count() * channels);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      double v = img.rgb[p * 3 + c];
      v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      bytes[p * channels + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    if (img.has_alpha) bytes[p * channels + 3] = img.alpha[p];
  }

  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;

  if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw ParseError("cannot write PNG '" + path + "': " + png.message);
  }
}

}  // namespace l2ot
