#include "emdtex/texture_uv.hpp"

#include <algorithm>
#include <cmath>

#include "emdtex/error.hpp"

namespace emdtex::uv {

ValidityMask ValidityMask::all_valid(std::size_t height, std::size_t width) {
  return {height, width, std::vector<unsigned char>(height * width, 1)};
}

UVPositionMap identity_position_map(std::size_t uv_height, std::size_t uv_width, ImageDims image) {
  if (uv_height < 2 || uv_width < 2) {
    throw Error(ErrorCode::kInvalidArgument, "UV grid must be at least 2x2");
  }
  UVPositionMap p{ScalarField(uv_height, uv_width), ScalarField(uv_height, uv_width),
                  ScalarField(uv_height, uv_width), ValidityMask::all_valid(uv_height, uv_width)};
  const double sx = static_cast<double>(image.width - 1) / static_cast<double>(uv_width - 1);
  const double sy = static_cast<double>(image.height - 1) / static_cast<double>(uv_height - 1);
  for (std::size_t v = 0; v < uv_height; ++v) {
    for (std::size_t u = 0; u < uv_width; ++u) {
      p.x(v, u) = static_cast<double>(u) * sx;
      p.y(v, u) = static_cast<double>(v) * sy;
    }
  }
  return p;
}

std::vector<Violation> validate_position_map(const UVPositionMap& p, ImageDims image) {
  std::vector<Violation> out;
  const std::size_t h = p.height();
  const std::size_t w = p.width();
  if (!p.y.same_shape(p.x) || !p.z.same_shape(p.x) || p.mask.height != h || p.mask.width != w ||
      p.mask.values.size() != h * w) {
    out.push_back({0, 0, ViolationKind::kShape, "position planes and mask differ in shape"});
    return out;
  }
  const auto width = static_cast<double>(image.width);
  const auto height = static_cast<double>(image.height);
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      if (!p.mask(v, u)) continue;
      const double x = p.x(v, u);
      const double y = p.y(v, u);
      const std::string where = "texel (v=" + std::to_string(v) + ", u=" + std::to_string(u) + ")";
      if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(p.z(v, u))) {
        out.push_back({v, u, ViolationKind::kNonFinite, where + ": non-finite coordinate"});
        continue;
      }
      if (!(x >= 0.0 && x < width)) {
        out.push_back({v, u, ViolationKind::kXOutOfBounds,
                       where + ": x=" + std::to_string(x) + " outside [0, " +
                           std::to_string(image.width) + ")"});
      }
      if (!(y >= 0.0 && y < height)) {
        out.push_back({v, u, ViolationKind::kYOutOfBounds,
                       where + ": y=" + std::to_string(y) + " outside [0, " +
                           std::to_string(image.height) + ")"});
      }
    }
  }
  return out;
}

double sample_bilinear(const ScalarField& image, double x, double y) {
  const std::size_t last_col = image.width() - 1;
  const std::size_t last_row = image.height() - 1;
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto c0 = std::min(static_cast<std::size_t>(std::max(fx, 0.0)), last_col);
  const auto r0 = std::min(static_cast<std::size_t>(std::max(fy, 0.0)), last_row);
  const std::size_t c1 = std::min(c0 + 1, last_col);
  const std::size_t r1 = std::min(r0 + 1, last_row);
  const double tx = std::clamp(x - static_cast<double>(c0), 0.0, 1.0);
  const double ty = std::clamp(y - static_cast<double>(r0), 0.0, 1.0);
  if (tx == 0.0 && ty == 0.0) return image(r0, c0);
  const double top = image(r0, c0) + tx * (image(r0, c1) - image(r0, c0));
  const double bottom = image(r1, c0) + tx * (image(r1, c1) - image(r1, c0));
  return top + ty * (bottom - top);
}

TextureMap extract_texture(const MultiChannelField& image, const UVPositionMap& p) {
  const ImageDims dims{image.height(), image.width()};
  if (const auto violations = validate_position_map(p, dims); !violations.empty()) {
    throw Error(ErrorCode::kOutOfBounds, std::to_string(violations.size()) +
                                             " position-map violation(s); first: " +
                                             violations.front().message);
  }
  TextureMap t{MultiChannelField(p.height(), p.width(), image.num_channels(), image.range()),
               p.mask};
  for (std::size_t c = 0; c < image.num_channels(); ++c) {
    const ScalarField& src = image.channel(c);
    ScalarField& dst = t.grid.channel(c);
    for (std::size_t v = 0; v < p.height(); ++v) {
      for (std::size_t u = 0; u < p.width(); ++u) {
        dst(v, u) = p.mask(v, u) ? sample_bilinear(src, p.x(v, u), p.y(v, u)) : 0.0;
      }
    }
  }
  return t;
}

MultiChannelField fuse(const FusionInput& in) {
  if (!in.sigma_c.same_shape(in.residue)) {
    throw Error(ErrorCode::kShapeMismatch, "sigma_c and residue differ in shape");
  }
  if (!std::isfinite(in.alpha)) throw Error(ErrorCode::kInvalidArgument, "alpha must be finite");
  MultiChannelField out = in.residue;
  for (std::size_t c = 0; c < out.num_channels(); ++c) {
    auto dst = out.channel(c).values();
    const auto hi = in.sigma_c.channel(c).values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = in.alpha * hi[i] + dst[i];
  }
  out.set_range(in.residue.range());
  return out;
}

}  // namespace emdtex::uv
