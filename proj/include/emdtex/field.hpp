#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace emdtex {

// H x W grid of doubles, row-major.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(std::size_t height, std::size_t width, double fill = 0.0);
  ScalarField(std::size_t height, std::size_t width, std::vector<double> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const ScalarField& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  bool operator==(const ScalarField&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

// Declared storage range of a multi-channel field.
enum class ValueRange {
  kUnit,           // [0, 1]
  kSymmetricUnit,  // [-1, 1]
  kUnbounded,
};

std::string_view to_string(ValueRange range);
ValueRange value_range_from_string(std::string_view name);

// H x W x C grid stored as C planar channels.
class MultiChannelField {
 public:
  MultiChannelField() = default;
  MultiChannelField(std::size_t height, std::size_t width, std::size_t channels,
                    ValueRange range = ValueRange::kUnbounded);
  MultiChannelField(std::vector<ScalarField> channels, ValueRange range);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t num_channels() const noexcept { return channels_.size(); }
  ValueRange range() const noexcept { return range_; }
  void set_range(ValueRange range) noexcept { range_ = range; }

  ScalarField& channel(std::size_t c) { return channels_[c]; }
  const ScalarField& channel(std::size_t c) const { return channels_[c]; }
  const std::vector<ScalarField>& channels() const noexcept { return channels_; }

  double& operator()(std::size_t row, std::size_t col, std::size_t c) { return channels_[c](row, col); }
  double operator()(std::size_t row, std::size_t col, std::size_t c) const { return channels_[c](row, col); }

  bool same_shape(const MultiChannelField& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_.size() == other.channels_.size();
  }

  bool operator==(const MultiChannelField&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<ScalarField> channels_;
  ValueRange range_ = ValueRange::kUnbounded;
};

bool all_finite(std::span<const double> values) noexcept;

// max - min; 0 for empty input.
double value_span(std::span<const double> values) noexcept;

// [0,1] -> [-1,1] and back. Throws kInvalidArgument if the declared range does not match.
MultiChannelField to_symmetric_unit(const MultiChannelField& unit_field);
MultiChannelField to_unit(const MultiChannelField& symmetric_field);

}  // namespace emdtex
