#pragma once

#include <string>
#include <vector>

#include "gmcfuse/image.hpp"

namespace gmcfuse {

/// A decoded image file: one plane (grayscale) or three (RGB), values in [0,1].
struct Raster {
  std::vector<Image> channels;
  int bit_depth = 8;

  bool is_color() const noexcept { return channels.size() == 3; }
  int width() const { return channels.front().width(); }
  int height() const { return channels.front().height(); }
};

/// Reads PNG (8/16-bit, gray or RGB; alpha discarded) or binary/ASCII
/// PGM/PPM, chosen by file content. 8-bit values are divided by 255, 16-bit
/// by 65535.
Raster load_image(const std::string& path);

/// Writes PNG or PGM/PPM depending on the extension (.png, .pgm, .ppm, .pnm).
/// Values are clipped to [0,1] and quantized with round-half-up.
void save_image(const std::string& path, const Raster& raster);

void save_image(const std::string& path, const Image& gray, int bit_depth = 8);

/// Luma of a raster: the single plane for grayscale, BT.601 Y for color.
Image luma(const Raster& raster);

}  // namespace gmcfuse
