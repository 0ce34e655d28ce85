#pragma once

#include <filesystem>

#include "turbsim/raster.hpp"

namespace turbsim {

struct PngInfo {
    int width = 0;
    int height = 0;
};

/// Reads a PNG as 8/16-bit gray or 8-bit RGB. Palette and sub-byte gray are
/// expanded to 8 bits, alpha is dropped, 16-bit RGB is reduced to 8 bits.
/// Throws LoadError(Kind::Image).
RasterImage read_png(const std::filesystem::path& path);

/// Header-only read; throws LoadError(Kind::Image).
PngInfo read_png_info(const std::filesystem::path& path);

/// Writes with fixed compression settings and no timestamp chunk, so equal
/// images produce equal bytes. Throws WriteError.
void write_png(const std::filesystem::path& path, const RasterImage& image);

}  // namespace turbsim
