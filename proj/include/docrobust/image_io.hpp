#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "docrobust/raster.hpp"

namespace docrobust {

/// Decode an 8-bit gray / RGB PNG (palette and alpha are flattened to gray or
/// RGB on white) or a baseline JPEG, chosen by file signature.
RasterImage read_image(const std::filesystem::path& path);

/// Deterministic PNG encoding (fixed compression settings, no timestamps).
void write_png(const std::filesystem::path& path, const RasterImage& img);
std::vector<unsigned char> encode_png(const RasterImage& img);
RasterImage decode_png(const std::vector<unsigned char>& bytes);

/// Lower-case hex SHA-256 of a byte buffer or of a file's contents.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_file(const std::filesystem::path& path);

} // namespace docrobust
