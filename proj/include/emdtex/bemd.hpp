#pragma once

// Fast and adaptive bidimensional EMD. Envelopes come from sliding max/min
// (order-statistics) filters followed by an optional mean filter of the same
// width; each BIMF is produced by a single sifting pass.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emdtex/field.hpp"

namespace emdtex::bemd {

// Boolean H x W grid, row-major, 0/1 bytes.
struct ExtremaMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<unsigned char> values;

  bool operator()(std::size_t row, std::size_t col) const { return values[row * width + col] != 0; }
  std::size_t count() const noexcept;
};

struct ExtremaMasks {
  ExtremaMask maxima;
  ExtremaMask minima;
};

enum class Connectivity {
  kEight,  // all eight neighbours of the 3x3 window
  kFour,   // edge-adjacent neighbours only
};

enum class WindowRule {
  kMinAdjacentDistance,  // "Type-1": smallest nearest-neighbour distance
  kMaxAdjacentDistance,  // largest nearest-neighbour distance
};

std::string_view to_string(WindowRule rule);
WindowRule window_rule_from_string(std::string_view name);

struct BemdConfig {
  std::size_t n_bimfs = 3;
  WindowRule window_rule = WindowRule::kMinAdjacentDistance;
  bool smoothing = true;
  Connectivity connectivity = Connectivity::kEight;
  // Pins every BIMF to this odd window instead of the adaptive rule.
  std::optional<int> fixed_window;

  void validate() const;
};

enum class Normalization { kNone, kSymmetricUnit };

std::string_view to_string(Normalization n);
Normalization normalization_from_string(std::string_view name);

struct DecompMeta {
  std::size_t n_bimfs_requested = 0;
  std::vector<int> window_sizes;  // one per produced BIMF, non-decreasing
  Normalization normalization = Normalization::kNone;
  std::string source_hash;        // "sha256:<hex>" over the input values
  bool stopped_early = false;     // fewer BIMFs than requested (extrema ran out)

  bool operator==(const DecompMeta&) const = default;
};

struct Decomposition2D {
  std::vector<ScalarField> bimfs;  // C_1 (finest) ... C_N
  ScalarField residue;
  DecompMeta meta;

  ScalarField reconstruct() const;
  bool operator==(const Decomposition2D&) const = default;
};

// Strict local extrema over the 3x3 neighbourhood (or its four edge
// neighbours); border pixels compare against the neighbours they have.
// Throws kFieldTooSmall below 3x3.
ExtremaMasks local_extrema(const ScalarField& f, Connectivity connectivity = Connectivity::kEight);

// Euclidean distance from each true pixel to its nearest other true pixel,
// in row-major order of the true pixels. Needs at least two true pixels.
std::vector<double> nearest_neighbor_distances(const ExtremaMask& mask);

// Odd window width (>= 3) from the adjacent-extrema distances.
// Throws kTooFewExtrema if either mask has fewer than two entries.
int window_size(const ExtremaMasks& masks, WindowRule rule);

// Sliding w x w maximum / minimum with edge replication. Separable monotonic
// deque passes, O(H*W) independent of w.
ScalarField max_filter(const ScalarField& f, int w);
ScalarField min_filter(const ScalarField& f, int w);
// w x w arithmetic mean with edge replication.
ScalarField mean_filter(const ScalarField& f, int w);

struct Envelopes {
  ScalarField upper;
  ScalarField lower;
};

// Throws kBadWindow if w is even or below 3.
Envelopes os_filter_envelopes(const ScalarField& f, int w, bool smoothing);

struct BimfStep {
  ScalarField bimf;
  ScalarField remainder;  // the mean envelope
  int window = 0;
};

// One FABEMD sifting pass. The adaptive window is raised to min_window when
// smaller. Throws kTooFewExtrema when f lacks two maxima and two minima.
BimfStep extract_bimf(const ScalarField& f, const BemdConfig& cfg, int min_window = 3);

// Throws kFieldTooSmall below 8x8 and kInvalidArgument on non-finite input.
Decomposition2D decompose(const ScalarField& f, const BemdConfig& cfg = {});

struct TextureDecomposition {
  std::vector<Decomposition2D> channels;
  MultiChannelField sigma_c;   // per-channel sum of BIMFs, [-1,1] space
  MultiChannelField residue;   // per-channel residue, [-1,1] space
};

// Maps a [0,1] texture to [-1,1] and decomposes each channel independently,
// on up to `jobs` threads. Results do not depend on `jobs`.
TextureDecomposition decompose_texture(const MultiChannelField& texture,
                                       const BemdConfig& cfg = {}, int jobs = 1);

// Hex SHA-256 of the little-endian IEEE-754 doubles, prefixed "sha256:".
std::string content_hash(const ScalarField& f);

}  // namespace emdtex::bemd
