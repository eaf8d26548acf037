#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "emdtex/bemd.hpp"
#include "emdtex/error.hpp"
#include "oracles.hpp"

using namespace emdtex;
using namespace emdtex::bemd;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an emdtex::Error");
  return ErrorCode::kInvalidArgument;
}

ScalarField checkerboard(std::size_t n) {
  ScalarField f(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) f(i, j) = static_cast<double>((i + j) % 2);
  return f;
}

ExtremaMask mask_with(std::size_t h, std::size_t w,
                      std::initializer_list<std::pair<std::size_t, std::size_t>> pts) {
  ExtremaMask m{h, w, std::vector<unsigned char>(h * w, 0)};
  for (auto [r, c] : pts) m.values[r * w + c] = 1;
  return m;
}

// Smallest pairwise distance, all pairs.
double brute_min_nn(const ExtremaMask& m) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t r = 0; r < m.height; ++r)
    for (std::size_t c = 0; c < m.width; ++c)
      if (m(r, c)) pts.emplace_back(static_cast<double>(r), static_cast<double>(c));
  double best = 1e300;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      best = std::min(best, std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second));
  return best;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

ScalarField two_tone_2d(std::size_t n, double hi, double lo) {
  ScalarField f(n, n);
  const double k = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = static_cast<double>(j), y = static_cast<double>(i);
      f(i, j) = std::sin(k * hi * x) + std::sin(k * hi * y) + std::sin(k * lo * x) + std::sin(k * lo * y);
    }
  return f;
}

}  // namespace

TEST_CASE("local_extrema: single peak, constant field") {
  ScalarField f(3, 3, 0.0);
  f(1, 1) = 5.0;
  const auto m = local_extrema(f);
  CHECK(m.maxima.count() == 1);
  CHECK(m.maxima(1, 1));
  CHECK(m.minima.count() == 0);  // zeros tie with each other

  const auto c = local_extrema(ScalarField(10, 10, 3.0));
  CHECK(c.maxima.count() == 0);
  CHECK(c.minima.count() == 0);
}

TEST_CASE("local_extrema: matches exhaustive scan on random fields") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto f = oracle::random_field(5 + seed % 20, 4 + (seed * 7) % 25, seed);
    const auto m = local_extrema(f);
    const auto o = oracle::brute_extrema(f);
    CHECK(m.maxima.values == o.maxima);
    CHECK(m.minima.values == o.minima);
  }
}

TEST_CASE("local_extrema: checkerboard") {
  const auto f = checkerboard(64);
  // Diagonal neighbours share the value, so nothing is strict under 8-connectivity.
  const auto eight = local_extrema(f, Connectivity::kEight);
  const auto o = oracle::brute_extrema(f);
  CHECK(eight.maxima.values == o.maxima);
  CHECK(eight.maxima.count() == 0);
  CHECK(eight.minima.count() == 0);

  const auto four = local_extrema(f, Connectivity::kFour);
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) {
      CHECK(four.maxima(i, j) == (f(i, j) == 1.0));
      CHECK(four.minima(i, j) == (f(i, j) == 0.0));
    }
}

TEST_CASE("local_extrema: too small") {
  CHECK(code_of([] { (void)local_extrema(ScalarField(2, 5)); }) == ErrorCode::kFieldTooSmall);
}

TEST_CASE("window_size: distance rules") {
  ExtremaMasks a{mask_with(20, 20, {{2, 2}, {2, 7}}), mask_with(20, 20, {{10, 2}, {10, 9}})};
  CHECK(window_size(a, WindowRule::kMinAdjacentDistance) == 5);
  CHECK(window_size(a, WindowRule::kMaxAdjacentDistance) == 7);

  ExtremaMasks b{mask_with(20, 20, {{0, 0}, {3, 3}}), mask_with(20, 20, {{0, 10}, {0, 17}})};
  CHECK(brute_min_nn(b.maxima) == doctest::Approx(std::sqrt(18.0)));  // 4.24
  CHECK(window_size(b, WindowRule::kMinAdjacentDistance) == 5);

  ExtremaMasks tight{mask_with(9, 9, {{0, 0}, {0, 1}}), mask_with(9, 9, {{5, 5}, {8, 8}})};
  CHECK(window_size(tight, WindowRule::kMinAdjacentDistance) == 3);

  ExtremaMasks lone{mask_with(9, 9, {{0, 0}}), mask_with(9, 9, {{5, 5}, {8, 8}})};
  CHECK(code_of([&] { (void)window_size(lone, WindowRule::kMinAdjacentDistance); }) ==
        ErrorCode::kTooFewExtrema);
}

TEST_CASE("window_size: checkerboard against exhaustive nearest neighbour") {
  const auto m = local_extrema(checkerboard(64), Connectivity::kFour);
  const double d = std::min(brute_min_nn(m.maxima), brute_min_nn(m.minima));
  CHECK(d == doctest::Approx(std::sqrt(2.0)));
  CHECK(window_size(m, WindowRule::kMinAdjacentDistance) == 3);
}

TEST_CASE("nearest_neighbor_distances: ring search equals all pairs") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto f = oracle::random_field(24, 31, seed);
    const auto m = local_extrema(f);
    const auto d = nearest_neighbor_distances(m.maxima);
    CHECK(*std::min_element(d.begin(), d.end()) == doctest::Approx(brute_min_nn(m.maxima)));
  }
}

TEST_CASE("order-statistics filters equal brute force") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto f = oracle::random_field(1 + seed % 32, 1 + (seed * 13) % 32, seed);
    for (int w : {3, 5, 9}) {
      CHECK(max_filter(f, w) == oracle::brute_window(f, w, true));
      CHECK(min_filter(f, w) == oracle::brute_window(f, w, false));
      CHECK(max_abs_diff(mean_filter(f, w), oracle::brute_mean(f, w)) <= 1e-12);
    }
  }
  const auto f = oracle::random_field(16, 16, 77);
  const auto env = os_filter_envelopes(f, 5, false);
  CHECK(env.upper == oracle::brute_window(f, 5, true));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(env.upper.values()[i] >= f.values()[i]);
}

TEST_CASE("os_filter_envelopes: constant and impulse") {
  const ScalarField c(12, 9, 0.25);
  for (int w : {3, 7}) {
    for (bool smooth : {false, true}) {
      const auto env = os_filter_envelopes(c, w, smooth);
      CHECK(max_abs_diff(env.upper, c) <= 1e-15);
      CHECK(max_abs_diff(env.lower, c) <= 1e-15);
    }
  }
  ScalarField imp(9, 9, 0.0);
  imp(4, 4) = 1.0;
  const auto env = os_filter_envelopes(imp, 3, false);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      const bool inside = i >= 3 && i <= 5 && j >= 3 && j <= 5;
      CHECK(env.upper(i, j) == (inside ? 1.0 : 0.0));
    }
  CHECK(code_of([&] { (void)os_filter_envelopes(imp, 4, true); }) == ErrorCode::kBadWindow);
  CHECK(code_of([&] { (void)os_filter_envelopes(imp, 1, true); }) == ErrorCode::kBadWindow);
}

TEST_CASE("extract_bimf: identity and constant field") {
  const auto f = oracle::random_field(32, 32, 9);
  const auto step = extract_bimf(f, BemdConfig{});
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(step.bimf.values()[i] + step.remainder.values()[i] == doctest::Approx(f.values()[i]).epsilon(1e-15));
  }
  CHECK(step.window % 2 == 1);
  CHECK(step.window >= 3);
  CHECK(code_of([] { (void)extract_bimf(ScalarField(16, 16, 1.0), BemdConfig{}); }) ==
        ErrorCode::kTooFewExtrema);
}

TEST_CASE("extract_bimf: checkerboard over a gradient") {
  const std::size_t n = 64;
  ScalarField f(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      f(i, j) = static_cast<double>((i + j) % 2) + 0.02 * static_cast<double>(i) + 0.01 * static_cast<double>(j);
  BemdConfig cfg;
  cfg.fixed_window = 3;
  cfg.smoothing = false;
  cfg.connectivity = Connectivity::kFour;
  const auto step = extract_bimf(f, cfg);
  CHECK(step.window == 3);
  std::size_t match = 0, total = 0;
  for (std::size_t i = 1; i + 1 < n; ++i)
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const double truth = static_cast<double>((i + j) % 2) - 0.5;
      match += (step.bimf(i, j) > 0.0) == (truth > 0.0);
      ++total;
    }
  CHECK(static_cast<double>(match) >= 0.95 * static_cast<double>(total));
}

TEST_CASE("decompose: three BIMFs, reconstruction, ordering") {
  const auto f = oracle::random_field(64, 64, 1234);
  const auto d = decompose(f);
  CHECK(d.bimfs.size() == 3);
  CHECK(d.meta.n_bimfs_requested == 3);
  CHECK(d.meta.window_sizes.size() == 3);
  CHECK(std::is_sorted(d.meta.window_sizes.begin(), d.meta.window_sizes.end()));
  CHECK_FALSE(d.meta.stopped_early);
  CHECK(max_abs_diff(d.reconstruct(), f) <= 1e-6 * value_span(f.values()));
  for (std::size_t k = 0; k + 1 < d.bimfs.size(); ++k) {
    CHECK(oracle::strict_extrema_count(d.bimfs[k]) >= oracle::strict_extrema_count(d.bimfs[k + 1]));
  }
  CHECK(d.meta.source_hash == content_hash(f));
  CHECK(d.meta.source_hash.rfind("sha256:", 0) == 0);
  CHECK(d.meta.source_hash.size() == 7 + 64);
}

TEST_CASE("decompose: constant field is pure residue") {
  const ScalarField c(16, 16, 0.5);
  const auto d = decompose(c);
  CHECK(d.bimfs.empty());
  CHECK(d.residue == c);
  CHECK(d.meta.stopped_early);
}

TEST_CASE("decompose: errors and config validation") {
  CHECK(code_of([] { (void)decompose(ScalarField(7, 20)); }) == ErrorCode::kFieldTooSmall);
  BemdConfig cfg;
  cfg.n_bimfs = 0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::kInvalidArgument);
  cfg = {};
  cfg.fixed_window = 4;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::kBadWindow);
  ScalarField nanf(8, 8, 0.0);
  nanf(2, 2) = std::nan("");
  CHECK(code_of([&] { (void)decompose(nanf); }) == ErrorCode::kInvalidArgument);
  CHECK(window_rule_from_string("type1") == WindowRule::kMinAdjacentDistance);
  CHECK(code_of([] { (void)window_rule_from_string("median"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("decompose: two 2D tones split by frequency") {
  const std::size_t n = 256;
  const double hi = 32.0, lo = 4.0;
  const auto f = two_tone_2d(n, hi, lo);
  BemdConfig cfg;
  cfg.n_bimfs = 2;
  const auto d = decompose(f, cfg);
  REQUIRE(d.bimfs.size() >= 1);
  const double cutoff = std::sqrt(hi * lo);
  CHECK(oracle::high_band_fraction(d.bimfs[0], cutoff) >= 0.70);
  ScalarField rest(n, n);
  for (std::size_t i = 0; i < rest.size(); ++i) rest.values()[i] = f.values()[i] - d.bimfs[0].values()[i];
  CHECK(1.0 - oracle::high_band_fraction(rest, cutoff) >= 0.70);
}

TEST_CASE("decompose: shift covariance with pinned windows") {
  const std::size_t n = 64;
  const auto f = oracle::random_field(n, n, 4242);
  ScalarField g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = f(i, (j + n - 1) % n);

  for (std::size_t nb : {std::size_t{1}, std::size_t{3}}) {
    BemdConfig cfg;
    cfg.n_bimfs = nb;
    cfg.fixed_window = 5;
    const auto df = decompose(f, cfg);
    const auto dg = decompose(g, cfg);
    REQUIRE(df.bimfs.size() == nb);
    REQUIRE(dg.bimfs.size() == nb);
    // Boundary influence grows by one window per stage.
    std::size_t margin = 0;
    for (int w : df.meta.window_sizes) margin += static_cast<std::size_t>(w);
    double worst = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      for (std::size_t i = margin; i < n - margin; ++i)
        for (std::size_t j = margin; j < n - margin; ++j)
          worst = std::max(worst, std::abs(dg.bimfs[k](i, j) - df.bimfs[k](i, j - 1)));
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("decompose: deterministic") {
  const auto f = oracle::random_field(48, 40, 31);
  CHECK(decompose(f) == decompose(f));
}

TEST_CASE("decompose_texture: round trip, equal channels, parallel determinism") {
  const std::size_t n = 48;
  MultiChannelField t(n, n, 3, ValueRange::kUnit);
  const auto base = oracle::random_field(n, n, 8, 0.0, 1.0);
  for (std::size_t c = 0; c < 3; ++c) t.channel(c) = base;
  const auto td = decompose_texture(t);
  REQUIRE(td.channels.size() == 3);
  CHECK(td.channels[0] == td.channels[1]);
  CHECK(td.channels[1] == td.channels[2]);
  for (const auto& ch : td.channels) {
    CHECK(ch.bimfs.size() == 3);
    CHECK(ch.meta.normalization == Normalization::kSymmetricUnit);
  }

  MultiChannelField rgb(n, n, 3, ValueRange::kUnit);
  for (std::size_t c = 0; c < 3; ++c) rgb.channel(c) = oracle::random_field(n, n, 50 + c, 0.0, 1.0);
  const auto a = decompose_texture(rgb, BemdConfig{}, 1);
  const auto b = decompose_texture(rgb, BemdConfig{}, 4);
  CHECK(a.channels == b.channels);
  CHECK(a.sigma_c == b.sigma_c);
  CHECK(a.residue == b.residue);

  MultiChannelField sum(n, n, 3, ValueRange::kSymmetricUnit);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n * n; ++i)
      sum.channel(c).values()[i] = a.sigma_c.channel(c).values()[i] + a.residue.channel(c).values()[i];
  const auto back = to_unit(sum);
  for (std::size_t c = 0; c < 3; ++c) CHECK(max_abs_diff(back.channel(c), rgb.channel(c)) <= 1e-6);

  MultiChannelField wrong = rgb;
  wrong.set_range(ValueRange::kUnbounded);
  CHECK(code_of([&] { (void)decompose_texture(wrong); }) == ErrorCode::kInvalidArgument);
  MultiChannelField over = rgb;
  over(0, 0, 0) = 1.5;
  CHECK(code_of([&] { (void)decompose_texture(over); }) == ErrorCode::kInvalidArgument);
}
