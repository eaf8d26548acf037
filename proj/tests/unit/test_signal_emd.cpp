#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "emdtex/error.hpp"
#include "emdtex/signal_emd.hpp"
#include "oracles.hpp"

using namespace emdtex;
using namespace emdtex::emd1d;

namespace {

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

double max_reconstruction_error(const std::vector<double>& s, const Decomposition& d) {
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double sum = d.residue[i];
    for (const auto& imf : d.imfs) sum += imf[i];
    err = std::max(err, std::abs(sum - s[i]));
  }
  return err;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an emdtex::Error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("find_extrema: alternating and constant") {
  const std::vector<double> s{0, 1, 0, 1, 0};
  const auto ex = find_extrema(s);
  CHECK(ex.maxima == std::vector<std::size_t>{1, 3});
  CHECK(ex.minima == std::vector<std::size_t>{2});

  const std::vector<double> c{5, 5, 5, 5};
  const auto ec = find_extrema(c);
  CHECK(ec.maxima.empty());
  CHECK(ec.minima.empty());
}

TEST_CASE("find_extrema: plateau centre rounds left, endpoints excluded") {
  const std::vector<double> s{0, 2, 2, 2, 2, 0, -1, -1, 0};
  const auto ex = find_extrema(s);
  CHECK(ex.maxima == std::vector<std::size_t>{2});  // run 1..4, centre 2.5 -> 2
  CHECK(ex.minima == std::vector<std::size_t>{6});  // run 6..7 -> 6
  // monotone ramp and its endpoints
  const std::vector<double> ramp{3, 2, 1, 0};
  CHECK(find_extrema(ramp).maxima.empty());
  CHECK(find_extrema(ramp).minima.empty());
  // step plateau is not an extremum
  const std::vector<double> step{0, 1, 1, 2};
  CHECK(find_extrema(step).maxima.empty());
}

TEST_CASE("find_extrema: four-cycle sine matches brute-force scan") {
  const auto s = oracle::tone(256, 4.0);
  const auto ex = find_extrema(s);
  CHECK(ex.maxima.size() == oracle::count_strict_maxima(s));
  CHECK(ex.minima.size() == oracle::count_strict_minima(s));
  CHECK(ex.maxima.size() == 4);
  CHECK(ex.minima.size() == 4);
  CHECK(ex.maxima == std::vector<std::size_t>{16, 80, 144, 208});
  CHECK(ex.minima == std::vector<std::size_t>{48, 112, 176, 240});
}

TEST_CASE("find_extrema: random signals agree with brute force") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(200);
    for (double& v : s) v = dist(rng);
    const auto ex = find_extrema(s);
    CHECK(ex.maxima.size() == oracle::count_strict_maxima(s));
    CHECK(ex.minima.size() == oracle::count_strict_minima(s));
    CHECK(std::is_sorted(ex.maxima.begin(), ex.maxima.end()));
  }
}

TEST_CASE("envelope: two knots give a straight line") {
  std::vector<double> s(11, 0.0);
  s[10] = 10.0;
  const std::vector<std::size_t> knots{0, 10};
  const auto env = envelope(s, knots, EnvelopeKind::kUpper);
  CHECK(env[5] == doctest::Approx(5.0).epsilon(1e-15));
  for (std::size_t i = 0; i <= 10; ++i) CHECK(env[i] == doctest::Approx(static_cast<double>(i)));
}

TEST_CASE("envelope: equal knots give a constant segment") {
  const std::vector<double> s{0, 1, 0, 1, 0};
  const std::vector<std::size_t> maxima{1, 3};
  const auto env = envelope(s, maxima, EnvelopeKind::kUpper);
  for (std::size_t i = 1; i <= 3; ++i) CHECK(env[i] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("envelope: passes through every knot") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  std::vector<double> s(300);
  for (double& v : s) v = dist(rng);
  const auto ex = find_extrema(s);
  for (auto mode : {BoundaryMode::kNone, BoundaryMode::kMirror}) {
    const auto up = envelope(s, ex.maxima, EnvelopeKind::kUpper, mode);
    for (std::size_t i : ex.maxima) CHECK(up[i] == doctest::Approx(s[i]).epsilon(1e-12));
  }
}

TEST_CASE("envelope: sine maxima envelope near 1 against dense spline oracle") {
  const auto s = oracle::tone(256, 4.0);
  const auto ex = find_extrema(s);
  std::vector<double> kx, ky;
  for (std::size_t i : ex.maxima) {
    kx.push_back(static_cast<double>(i));
    ky.push_back(s[i]);
  }
  const oracle::DenseSpline dense(kx, ky);
  const NaturalCubicSpline spline(kx, ky);
  // 10x resolution over the knot span
  for (double t = kx.front(); t <= kx.back(); t += 0.1) {
    CHECK(std::abs(dense(t) - 1.0) <= 0.05);
    CHECK(spline(t) == doctest::Approx(dense(t)).epsilon(1e-12));
  }
  const auto env = envelope(s, ex.maxima, EnvelopeKind::kUpper, BoundaryMode::kMirror);
  for (std::size_t i = 16; i <= 240; ++i) CHECK(std::abs(env[i] - 1.0) <= 0.05);
}

TEST_CASE("NaturalCubicSpline agrees with dense solve on irregular knots") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> gap(0.5, 4.0), val(-3.0, 3.0);
  std::vector<double> x{0.0}, y{val(rng)};
  for (int i = 0; i < 30; ++i) {
    x.push_back(x.back() + gap(rng));
    y.push_back(val(rng));
  }
  const oracle::DenseSpline dense(x, y);
  const NaturalCubicSpline spline(x, y);
  for (double t = x.front(); t <= x.back(); t += 0.05) {
    CHECK(std::abs(spline(t) - dense(t)) <= 1e-10);
  }
}

TEST_CASE("envelope errors") {
  const std::vector<double> s{0, 1, 0, 1, 0};
  const std::vector<std::size_t> one{1};
  CHECK(code_of([&] { (void)envelope(s, one, EnvelopeKind::kUpper); }) == ErrorCode::kTooFewExtrema);
  const std::vector<std::size_t> bad{1, 9};
  CHECK(code_of([&] { (void)envelope(s, bad, EnvelopeKind::kUpper); }) == ErrorCode::kOutOfBounds);
}

TEST_CASE("sift: pure tone is already an IMF") {
  const auto s = oracle::tone(512, 8.0);
  const auto h = sift(s, SiftConfig{});
  CHECK(oracle::pearson(h, s, 0, s.size()) >= 0.99);
}

TEST_CASE("sift: single iteration subtracts one envelope mean") {
  const auto s = add(oracle::tone(400, 10.0), oracle::tone(400, 3.0, 0.7));
  SiftConfig cfg;
  cfg.max_sift_iterations = 1;
  const auto res = sift_detailed(s, cfg);
  CHECK(res.iterations == 1);
  const auto ex = find_extrema(s);
  const auto up = envelope(s, ex.maxima, EnvelopeKind::kUpper, BoundaryMode::kMirror);
  const auto lo = envelope(s, ex.minima, EnvelopeKind::kLower, BoundaryMode::kMirror);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(res.imf[i] == s[i] - 0.5 * (up[i] + lo[i]));
}

TEST_CASE("sift: first IMF of a two-tone signal is a fixed point") {
  const auto s = add(oracle::tone(1024, 32.0), oracle::tone(1024, 4.0));
  const auto d = decompose(s);
  REQUIRE(!d.imfs.empty());
  const SiftConfig cfg;
  const auto again = sift(d.imfs[0], cfg);
  double change = 0.0, energy = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    change += (again[i] - d.imfs[0][i]) * (again[i] - d.imfs[0][i]);
    energy += d.imfs[0][i] * d.imfs[0][i];
  }
  CHECK(change / energy < cfg.sd_threshold);
}

TEST_CASE("sift: too few extrema") {
  const std::vector<double> ramp{0, 1, 2, 3, 4, 5};
  CHECK(code_of([&] { (void)sift(ramp, SiftConfig{}); }) == ErrorCode::kTooFewExtrema);
  const std::vector<double> one_min{0, 1, 0, 1, 0};
  CHECK(code_of([&] { (void)sift(one_min, SiftConfig{}); }) == ErrorCode::kTooFewExtrema);
}

TEST_CASE("SiftConfig validation") {
  SiftConfig cfg;
  cfg.sd_threshold = 0.0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::kInvalidArgument);
  cfg = {};
  cfg.max_sift_iterations = 0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::kInvalidArgument);
  cfg = {};
  cfg.max_imfs = 0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("decompose: constant and ramp give no IMFs") {
  const std::vector<double> c(64, 2.5);
  const auto dc = decompose(c);
  CHECK(dc.imfs.empty());
  CHECK(dc.residue == c);

  std::vector<double> ramp(64);
  std::iota(ramp.begin(), ramp.end(), -10.0);
  const auto dr = decompose(ramp);
  CHECK(dr.imfs.empty());
  CHECK(dr.residue == ramp);
}

TEST_CASE("decompose: two tones separate") {
  const std::size_t n = 1024;
  const auto hi = oracle::tone(n, 32.0);
  const auto lo = oracle::tone(n, 4.0);
  const auto s = add(hi, lo);
  const auto d = decompose(s);
  REQUIRE(d.imfs.size() >= 2);
  const std::size_t b = n / 10, e = n - n / 10;
  CHECK(oracle::pearson(d.imfs[0], hi, b, e) >= 0.95);
  CHECK(oracle::pearson(d.imfs[1], lo, b, e) >= 0.95);
}

TEST_CASE("decompose: reconstruction, ordering and termination on random signals") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(512);
    for (double& v : s) v = dist(rng);
    const auto d = decompose(s);
    double peak = 0.0;
    for (double v : s) peak = std::max(peak, std::abs(v));
    CHECK(max_reconstruction_error(s, d) <= 1e-9 * peak);
    const auto ex = find_extrema(d.residue);
    CHECK((ex.maxima.size() < 2 || ex.minima.size() < 2 || d.hit_max_imfs));
    CHECK(d.sift_iterations.size() == d.imfs.size());
    for (int it : d.sift_iterations) CHECK((it >= 1 && it <= 50));
  }
}

TEST_CASE("decompose: max_imfs caps and flags") {
  const auto s = add(add(oracle::tone(1024, 64.0), oracle::tone(1024, 16.0)), oracle::tone(1024, 4.0));
  SiftConfig cfg;
  cfg.max_imfs = 1;
  const auto d = decompose(s, cfg);
  CHECK(d.imfs.size() == 1);
  CHECK(d.hit_max_imfs);
  CHECK(max_reconstruction_error(s, d) <= 1e-9 * 3.0);
}

TEST_CASE("decompose: errors") {
  const std::vector<double> shortsig{1, 2, 3};
  CHECK(code_of([&] { (void)decompose(shortsig); }) == ErrorCode::kSignalTooShort);
  std::vector<double> bad(16, 0.0);
  bad[3] = std::nan("");
  CHECK(code_of([&] { (void)decompose(bad); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("decompose: deterministic") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist;
  std::vector<double> s(700);
  for (double& v : s) v = dist(rng);
  const auto a = decompose(s);
  const auto b = decompose(s);
  CHECK(a.imfs == b.imfs);
  CHECK(a.residue == b.residue);
}

TEST_CASE("zero_crossings") {
  CHECK(zero_crossings(std::vector<double>{1, -1, 1, -1}) == 3);
  CHECK(zero_crossings(std::vector<double>{1, 0, -1}) == 1);
  CHECK(zero_crossings(std::vector<double>{0, 0, 0}) == 0);
  CHECK(zero_crossings(oracle::tone(256, 4.0)) == 7);
}
