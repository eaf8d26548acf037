#include "emdtex/bemd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "emdtex/digest.hpp"
#include "emdtex/error.hpp"
#include "emdtex/parallel.hpp"

namespace emdtex::bemd {

std::size_t ExtremaMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), 1));
}

std::string_view to_string(WindowRule rule) {
  switch (rule) {
    case WindowRule::kMinAdjacentDistance: return "min_adjacent_extrema_distance";
    case WindowRule::kMaxAdjacentDistance: return "max_adjacent_extrema_distance";
  }
  return "min_adjacent_extrema_distance";
}

WindowRule window_rule_from_string(std::string_view name) {
  if (name == "min_adjacent_extrema_distance" || name == "min" || name == "type1") {
    return WindowRule::kMinAdjacentDistance;
  }
  if (name == "max_adjacent_extrema_distance" || name == "max") {
    return WindowRule::kMaxAdjacentDistance;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown window rule '" + std::string(name) + "'");
}

std::string_view to_string(Normalization n) {
  return n == Normalization::kSymmetricUnit ? "symmetric_unit" : "none";
}

Normalization normalization_from_string(std::string_view name) {
  if (name == "symmetric_unit") return Normalization::kSymmetricUnit;
  if (name == "none") return Normalization::kNone;
  throw Error(ErrorCode::kFormat, "unknown normalization '" + std::string(name) + "'");
}

void BemdConfig::validate() const {
  if (n_bimfs < 1) throw Error(ErrorCode::kInvalidArgument, "n_bimfs must be >= 1");
  if (fixed_window && (*fixed_window < 3 || *fixed_window % 2 == 0)) {
    throw Error(ErrorCode::kBadWindow, "fixed window must be odd and >= 3");
  }
}

ScalarField Decomposition2D::reconstruct() const {
  ScalarField out = residue;
  for (const auto& bimf : bimfs) {
    auto dst = out.values();
    auto src = bimf.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return out;
}

ExtremaMasks local_extrema(const ScalarField& f, Connectivity connectivity) {
  const std::size_t h = f.height();
  const std::size_t w = f.width();
  if (h < 3 || w < 3) {
    throw Error(ErrorCode::kFieldTooSmall, "extrema detection needs at least 3x3");
  }
  ExtremaMasks masks{{h, w, std::vector<unsigned char>(h * w, 0)},
                     {h, w, std::vector<unsigned char>(h * w, 0)}};
  const auto rows = static_cast<std::ptrdiff_t>(h);
  const auto cols = static_cast<std::ptrdiff_t>(w);
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      const double v = f(r, c);
      bool is_max = true;
      bool is_min = true;
      for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
        for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (connectivity == Connectivity::kFour && dr != 0 && dc != 0) continue;
          const std::ptrdiff_t rr = r + dr;
          const std::ptrdiff_t cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          const double n = f(rr, cc);
          if (!(v > n)) is_max = false;
          if (!(v < n)) is_min = false;
        }
      }
      masks.maxima.values[r * cols + c] = is_max;
      masks.minima.values[r * cols + c] = is_min;
    }
  }
  return masks;
}

std::vector<double> nearest_neighbor_distances(const ExtremaMask& mask) {
  const auto rows = static_cast<std::ptrdiff_t>(mask.height);
  const auto cols = static_cast<std::ptrdiff_t>(mask.width);
  if (mask.count() < 2) {
    throw Error(ErrorCode::kTooFewExtrema, "nearest-neighbour distance needs two extrema");
  }
  auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    return r >= 0 && r < rows && c >= 0 && c < cols && mask.values[r * cols + c] != 0;
  };

  std::vector<double> out;
  const std::ptrdiff_t max_radius = std::max(rows, cols);
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      if (!at(r, c)) continue;
      // Square rings of growing Chebyshev radius; a ring at radius k holds no
      // point closer than k, so stop once the best squared distance <= (k+1)^2.
      std::ptrdiff_t best = std::numeric_limits<std::ptrdiff_t>::max();
      for (std::ptrdiff_t k = 1; k <= max_radius; ++k) {
        for (std::ptrdiff_t d = -k; d <= k; ++d) {
          const std::ptrdiff_t edge = k * k + d * d;
          if (edge >= best) continue;
          if (at(r - k, c + d) || at(r + k, c + d) || at(r + d, c - k) || at(r + d, c + k)) {
            best = edge;
          }
        }
        if (best <= (k + 1) * (k + 1)) break;
      }
      out.push_back(std::sqrt(static_cast<double>(best)));
    }
  }
  return out;
}

int window_size(const ExtremaMasks& masks, WindowRule rule) {
  if (masks.maxima.count() < 2 || masks.minima.count() < 2) {
    throw Error(ErrorCode::kTooFewExtrema, "window selection needs two maxima and two minima");
  }
  const auto dmax = nearest_neighbor_distances(masks.maxima);
  const auto dmin = nearest_neighbor_distances(masks.minima);
  double d = 0.0;
  if (rule == WindowRule::kMinAdjacentDistance) {
    d = std::min(*std::min_element(dmax.begin(), dmax.end()),
                 *std::min_element(dmin.begin(), dmin.end()));
  } else {
    d = std::max(*std::max_element(dmax.begin(), dmax.end()),
                 *std::max_element(dmin.begin(), dmin.end()));
  }
  int w = static_cast<int>(std::floor(d));
  if (w % 2 == 0) ++w;
  return std::max(w, 3);
}

namespace {

void check_window(int w) {
  if (w < 3 || w % 2 == 0) {
    throw Error(ErrorCode::kBadWindow, "window must be odd and >= 3, got " + std::to_string(w));
  }
}

// Running extremum over [i - radius, i + radius] clamped to the line, which
// equals the edge-replicated window. `better(a, b)` is true when a beats b.
template <typename Better>
void sliding_extremum_line(const double* in, double* out, std::size_t n, std::size_t stride,
                           std::ptrdiff_t radius, std::vector<std::ptrdiff_t>& queue,
                           Better better) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  const auto s = static_cast<std::ptrdiff_t>(stride);
  queue.clear();
  std::size_t head = 0;
  std::ptrdiff_t pushed = 0;
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    const std::ptrdiff_t hi = std::min(i + radius, len - 1);
    for (; pushed <= hi; ++pushed) {
      while (queue.size() > head && !better(in[queue.back() * s], in[pushed * s])) {
        queue.pop_back();
      }
      queue.push_back(pushed);
    }
    while (queue[head] < i - radius) ++head;
    out[i * s] = in[queue[head] * s];
  }
}

template <typename Better>
ScalarField separable_extremum(const ScalarField& f, int w, Better better) {
  check_window(w);
  const std::ptrdiff_t radius = w / 2;
  const std::size_t h = f.height();
  const std::size_t cols = f.width();
  ScalarField tmp(h, cols);
  ScalarField out(h, cols);
  std::vector<std::ptrdiff_t> queue;
  queue.reserve(std::max(h, cols));
  for (std::size_t r = 0; r < h; ++r) {
    sliding_extremum_line(f.values().data() + r * cols, tmp.values().data() + r * cols, cols, 1,
                          radius, queue, better);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    sliding_extremum_line(tmp.values().data() + c, out.values().data() + c, h, cols, radius,
                          queue, better);
  }
  return out;
}

void mean_line(const double* in, double* out, std::size_t n, std::size_t stride,
               std::ptrdiff_t radius) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  const auto s = static_cast<std::ptrdiff_t>(stride);
  const double scale = 1.0 / static_cast<double>(2 * radius + 1);
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (std::ptrdiff_t k = i - radius; k <= i + radius; ++k) {
      sum += in[std::clamp<std::ptrdiff_t>(k, 0, len - 1) * s];
    }
    out[i * s] = sum * scale;
  }
}

}  // namespace

ScalarField max_filter(const ScalarField& f, int w) {
  return separable_extremum(f, w, std::greater<>{});
}

ScalarField min_filter(const ScalarField& f, int w) {
  return separable_extremum(f, w, std::less<>{});
}

ScalarField mean_filter(const ScalarField& f, int w) {
  check_window(w);
  const std::ptrdiff_t radius = w / 2;
  const std::size_t h = f.height();
  const std::size_t cols = f.width();
  ScalarField tmp(h, cols);
  ScalarField out(h, cols);
  for (std::size_t r = 0; r < h; ++r) {
    mean_line(f.values().data() + r * cols, tmp.values().data() + r * cols, cols, 1, radius);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    mean_line(tmp.values().data() + c, out.values().data() + c, h, cols, radius);
  }
  return out;
}

Envelopes os_filter_envelopes(const ScalarField& f, int w, bool smoothing) {
  check_window(w);
  Envelopes env{max_filter(f, w), min_filter(f, w)};
  if (smoothing) {
    env.upper = mean_filter(env.upper, w);
    env.lower = mean_filter(env.lower, w);
  }
  return env;
}

BimfStep extract_bimf(const ScalarField& f, const BemdConfig& cfg, int min_window) {
  cfg.validate();
  const ExtremaMasks masks = local_extrema(f, cfg.connectivity);
  if (masks.maxima.count() < 2 || masks.minima.count() < 2) {
    throw Error(ErrorCode::kTooFewExtrema,
                "BIMF extraction needs two maxima and two minima, got " +
                    std::to_string(masks.maxima.count()) + " and " +
                    std::to_string(masks.minima.count()));
  }
  int w = cfg.fixed_window ? *cfg.fixed_window : window_size(masks, cfg.window_rule);
  if (w < min_window) w = min_window;
  if (w % 2 == 0) ++w;

  const Envelopes env = os_filter_envelopes(f, w, cfg.smoothing);
  BimfStep step{ScalarField(f.height(), f.width()), ScalarField(f.height(), f.width()), w};
  const auto src = f.values();
  const auto up = env.upper.values();
  const auto lo = env.lower.values();
  auto bimf = step.bimf.values();
  auto rem = step.remainder.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double mean = 0.5 * (up[i] + lo[i]);
    rem[i] = mean;
    bimf[i] = src[i] - mean;
  }
  return step;
}

Decomposition2D decompose(const ScalarField& f, const BemdConfig& cfg) {
  cfg.validate();
  if (f.height() < 8 || f.width() < 8) {
    throw Error(ErrorCode::kFieldTooSmall, "decomposition needs at least 8x8, got " +
                                               std::to_string(f.height()) + "x" +
                                               std::to_string(f.width()));
  }
  if (!all_finite(f.values())) throw Error(ErrorCode::kInvalidArgument, "field contains NaN/Inf");

  Decomposition2D out;
  out.meta.n_bimfs_requested = cfg.n_bimfs;
  out.meta.source_hash = content_hash(f);
  ScalarField current = f;
  int previous_window = 3;
  while (out.bimfs.size() < cfg.n_bimfs) {
    BimfStep step;
    try {
      step = extract_bimf(current, cfg, previous_window);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTooFewExtrema) throw;
      out.meta.stopped_early = true;
      break;
    }
    previous_window = step.window;
    out.meta.window_sizes.push_back(step.window);
    out.bimfs.push_back(std::move(step.bimf));
    current = std::move(step.remainder);
  }
  out.residue = std::move(current);
  return out;
}

TextureDecomposition decompose_texture(const MultiChannelField& texture, const BemdConfig& cfg,
                                       int jobs) {
  if (texture.range() != ValueRange::kUnit) {
    throw Error(ErrorCode::kInvalidArgument, "texture must be declared in [0,1]");
  }
  for (const auto& ch : texture.channels()) {
    for (double v : ch.values()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "texture value outside [0,1]");
      }
    }
  }
  const MultiChannelField normalized = to_symmetric_unit(texture);
  const std::size_t nc = normalized.num_channels();

  TextureDecomposition out;
  out.channels.resize(nc);
  parallel_for(nc, jobs, [&](std::size_t c) {
    out.channels[c] = decompose(normalized.channel(c), cfg);
    out.channels[c].meta.normalization = Normalization::kSymmetricUnit;
  });

  out.sigma_c = MultiChannelField(texture.height(), texture.width(), nc,
                                  ValueRange::kUnbounded);
  out.residue = MultiChannelField(texture.height(), texture.width(), nc,
                                  ValueRange::kUnbounded);
  for (std::size_t c = 0; c < nc; ++c) {
    auto sum = out.sigma_c.channel(c).values();
    for (const auto& bimf : out.channels[c].bimfs) {
      const auto src = bimf.values();
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += src[i];
    }
    out.residue.channel(c) = out.channels[c].residue;
  }
  return out;
}

std::string content_hash(const ScalarField& f) {
  std::vector<std::byte> bytes;
  bytes.reserve(f.size() * sizeof(double));
  for (double v : f.values()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::byte>((bits >> (8 * b)) & 0xFF));
  }
  return "sha256:" + sha256_hex(bytes);
}

}  // namespace emdtex::bemd
