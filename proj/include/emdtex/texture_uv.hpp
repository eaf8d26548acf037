#pragma once

// UV-space shape and texture maps, texture sampling from a source image and
// the alpha-weighted fusion of BIMFs and residue.

#include <cstddef>
#include <string>
#include <vector>

#include "emdtex/field.hpp"

namespace emdtex::uv {

// Per-texel validity; 1 where the face model covers the texel.
struct ValidityMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<unsigned char> values;

  static ValidityMask all_valid(std::size_t height, std::size_t width);
  bool operator()(std::size_t row, std::size_t col) const { return values[row * width + col] != 0; }
  bool operator==(const ValidityMask&) const = default;
};

struct ImageDims {
  std::size_t height = 0;
  std::size_t width = 0;
};

// P(u, v) = (x, y, z): x, y in source-image pixels (column, row), z relative depth.
struct UVPositionMap {
  ScalarField x;
  ScalarField y;
  ScalarField z;
  ValidityMask mask;

  std::size_t height() const noexcept { return x.height(); }
  std::size_t width() const noexcept { return x.width(); }
  bool operator==(const UVPositionMap&) const = default;
};

// T(u, v) = (R, G, B) in [0, 1]; invalid texels hold 0.
struct TextureMap {
  MultiChannelField grid;
  ValidityMask mask;
};

struct FusionInput {
  MultiChannelField sigma_c;
  MultiChannelField residue;
  double alpha = 1.0;
};

enum class ViolationKind { kXOutOfBounds, kYOutOfBounds, kNonFinite, kShape };

struct Violation {
  std::size_t row = 0;  // v
  std::size_t col = 0;  // u
  ViolationKind kind = ViolationKind::kShape;
  std::string message;
};

// Position map whose texel (v, u) points at pixel (u*(W-1)/(Wuv-1), v*(H-1)/(Huv-1)).
UVPositionMap identity_position_map(std::size_t uv_height, std::size_t uv_width, ImageDims image);

// Empty iff every valid texel is finite with 0 <= x < width and 0 <= y < height.
// Masked-invalid texels are exempt.
std::vector<Violation> validate_position_map(const UVPositionMap& p, ImageDims image);

// Bilinear sample at (x, y); indices clamp to the last row/column.
double sample_bilinear(const ScalarField& image, double x, double y);

// Throws kOutOfBounds if validation fails.
TextureMap extract_texture(const MultiChannelField& image, const UVPositionMap& p);

// alpha * sigma_c + residue. Throws kShapeMismatch or kInvalidArgument (non-finite alpha).
MultiChannelField fuse(const FusionInput& in);

}  // namespace emdtex::uv
