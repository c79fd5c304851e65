#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace l2ot {

/// 8-bit RGB(A) raster with channels normalised to [0, 1]. Alpha, when
/// present, is carried as raw bytes and passed through untouched by the
/// recolouring pipeline.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  bool has_alpha = false;
  std::vector<double> rgb;          // width * height * 3, row-major
  std::vector<std::uint8_t> alpha;  // width * height when has_alpha

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  double& at(int x, int y, int channel) {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
  }
  double at(int x, int y, int channel) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
  }
};

/// Reads an 8-bit PNG; throws ParseError on decode failure.
ImageBuffer read_png(const std::string& path);

/// Writes an 8-bit PNG with fixed encoder settings, so identical buffers
/// produce byte-identical files. Channels are clamped to [0, 1] and rounded.
void write_png(const std::string& path, const ImageBuffer& img);

}  // namespace l2ot
