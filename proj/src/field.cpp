#include "emdtex/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emdtex/error.hpp"

namespace emdtex {

ScalarField::ScalarField(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), values_(height * width, fill) {}

ScalarField::ScalarField(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != height * width) {
    throw Error(ErrorCode::kShapeMismatch,
                "field of " + std::to_string(height) + "x" + std::to_string(width) +
                    " given " + std::to_string(values_.size()) + " values");
  }
}

std::string_view to_string(ValueRange range) {
  switch (range) {
    case ValueRange::kUnit: return "unit";
    case ValueRange::kSymmetricUnit: return "symmetric_unit";
    case ValueRange::kUnbounded: return "unbounded";
  }
  return "unbounded";
}

ValueRange value_range_from_string(std::string_view name) {
  if (name == "unit") return ValueRange::kUnit;
  if (name == "symmetric_unit") return ValueRange::kSymmetricUnit;
  if (name == "unbounded" || name == "none") return ValueRange::kUnbounded;
  throw Error(ErrorCode::kFormat, "unknown value range '" + std::string(name) + "'");
}

MultiChannelField::MultiChannelField(std::size_t height, std::size_t width,
                                     std::size_t channels, ValueRange range)
    : height_(height), width_(width), channels_(channels, ScalarField(height, width)),
      range_(range) {}

MultiChannelField::MultiChannelField(std::vector<ScalarField> channels, ValueRange range)
    : channels_(std::move(channels)), range_(range) {
  if (!channels_.empty()) {
    height_ = channels_.front().height();
    width_ = channels_.front().width();
  }
  for (const auto& ch : channels_) {
    if (!ch.same_shape(channels_.front())) {
      throw Error(ErrorCode::kShapeMismatch, "channels differ in shape");
    }
  }
}

bool all_finite(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double value_span(std::span<const double> values) noexcept {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

namespace {

MultiChannelField affine(const MultiChannelField& in, double scale, double offset,
                         ValueRange out_range) {
  MultiChannelField out = in;
  out.set_range(out_range);
  for (std::size_t c = 0; c < out.num_channels(); ++c) {
    for (double& v : out.channel(c).values()) v = v * scale + offset;
  }
  return out;
}

}  // namespace

MultiChannelField to_symmetric_unit(const MultiChannelField& unit_field) {
  if (unit_field.range() != ValueRange::kUnit) {
    throw Error(ErrorCode::kInvalidArgument, "expected a [0,1] field");
  }
  return affine(unit_field, 2.0, -1.0, ValueRange::kSymmetricUnit);
}

MultiChannelField to_unit(const MultiChannelField& symmetric_field) {
  if (symmetric_field.range() != ValueRange::kSymmetricUnit) {
    throw Error(ErrorCode::kInvalidArgument, "expected a [-1,1] field");
  }
  return affine(symmetric_field, 0.5, 0.5, ValueRange::kUnit);
}

}  // namespace emdtex
