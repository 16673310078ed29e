#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ordirs/image.hpp"

namespace ordirs::img {

/// PNG codecs backed by libpng. Depth maps use 16-bit grayscale PNG where a
/// stored sample v means normalized depth v / 65535.

std::vector<std::uint8_t> encode_png_rgb8(const ImageRgb8& image);
ImageRgb8 decode_png_rgb8(const std::uint8_t* data, std::size_t size);

std::vector<std::uint8_t> encode_png_gray16(const DepthMap& depth);
DepthMap decode_png_gray16(const std::uint8_t* data, std::size_t size);

void save_png_rgb8(const std::filesystem::path& path, const ImageRgb8& image);
ImageRgb8 load_png_rgb8(const std::filesystem::path& path);

void save_png_gray16(const std::filesystem::path& path, const DepthMap& depth);
DepthMap load_png_gray16(const std::filesystem::path& path);

}  // namespace ordirs::img
