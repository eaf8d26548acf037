#pragma once

// One-dimensional empirical mode decomposition: extrema, cubic-spline
// envelopes, sifting and full decomposition into IMFs plus a residue.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace emdtex::emd1d {

using Signal = std::vector<double>;

struct SiftConfig {
  double sd_threshold = 0.2;
  int max_sift_iterations = 50;
  std::size_t max_imfs = std::numeric_limits<std::size_t>::max();

  // Throws kInvalidArgument on sd_threshold <= 0 or max_sift_iterations < 1.
  void validate() const;
};

struct Extrema {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};

enum class EnvelopeKind { kUpper, kLower };

enum class BoundaryMode {
  kNone,    // spline through the given knots, linear extrapolation outside them
  kMirror,  // two nearest extrema reflected across each end before fitting
};

struct Decomposition {
  std::vector<Signal> imfs;  // index 0 = highest frequency
  Signal residue;
  std::vector<int> sift_iterations;  // per IMF
  bool hit_max_imfs = false;
};

// Strict local extrema. A plateau flanked by strictly smaller (larger) values
// counts once, at its centre index rounded left. Endpoints are never extrema.
Extrema find_extrema(std::span<const double> s);

// Natural cubic spline through (x, y) knots with strictly increasing x.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double at) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> second_;  // second derivatives at the knots
};

// Spline envelope through s at the given indices, evaluated at every sample.
// Throws kTooFewExtrema if fewer than two indices are supplied.
Signal envelope(std::span<const double> s, std::span<const std::size_t> extrema,
                EnvelopeKind kind, BoundaryMode mode = BoundaryMode::kNone);

struct SiftResult {
  Signal imf;
  int iterations = 0;
};

// Repeats h <- h - (upper + lower) / 2 until the Cauchy SD criterion
// sum((h_prev - h)^2) / sum(h_prev^2) < sd_threshold or the iteration cap.
// Throws kTooFewExtrema when s itself lacks two maxima and two minima; if a
// later iterate loses its extrema, sifting stops and that iterate is returned.
SiftResult sift_detailed(std::span<const double> s, const SiftConfig& cfg);
Signal sift(std::span<const double> s, const SiftConfig& cfg);

// Throws kSignalTooShort for fewer than four samples and kInvalidArgument for
// non-finite input.
Decomposition decompose(std::span<const double> s, const SiftConfig& cfg = {});

// Sign changes between consecutive samples; exact zeros carry the previous sign.
std::size_t zero_crossings(std::span<const double> s) noexcept;

}  // namespace emdtex::emd1d
