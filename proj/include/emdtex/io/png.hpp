#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "emdtex/field.hpp"

namespace emdtex::io {

struct PngInfo {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;  // 1 (gray) or 3 (RGB); alpha is dropped
  int bit_depth = 8;         // 8 or 16 after expansion
};

// Decodes to a [0,1] field: value / 255 or value / 65535. Palette and
// sub-byte gray are expanded to 8 bits. Throws kIo / kFormat.
MultiChannelField decode_png(std::span<const std::byte> bytes, PngInfo* info = nullptr);
MultiChannelField read_png(const std::filesystem::path& path, PngInfo* info = nullptr);

// Encodes a 1- or 3-channel field, clamping to [0,1] and rounding to the
// nearest code. bit_depth is 8 or 16.
std::vector<std::byte> encode_png(const MultiChannelField& field, int bit_depth = 8);
void write_png(const std::filesystem::path& path, const MultiChannelField& field,
               int bit_depth = 8);

}  // namespace emdtex::io
