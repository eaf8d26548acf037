#include "emdtex/signal_emd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emdtex/error.hpp"
#include "emdtex/field.hpp"

namespace emdtex::emd1d {

void SiftConfig::validate() const {
  if (!(sd_threshold > 0.0) || !std::isfinite(sd_threshold)) {
    throw Error(ErrorCode::kInvalidArgument, "sd_threshold must be > 0");
  }
  if (max_sift_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_sift_iterations must be >= 1");
  }
  if (max_imfs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_imfs must be >= 1");
  }
}

Extrema find_extrema(std::span<const double> s) {
  Extrema out;
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && s[j + 1] == s[i]) ++j;
    if (i > 0 && j + 1 < n) {
      const double left = s[i - 1];
      const double right = s[j + 1];
      const std::size_t centre = i + (j - i) / 2;
      if (left < s[i] && right < s[i]) {
        out.maxima.push_back(centre);
      } else if (left > s[i] && right > s[i]) {
        out.minima.push_back(centre);
      }
    }
    i = j + 1;
  }
  return out;
}

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n != y_.size()) throw Error(ErrorCode::kShapeMismatch, "spline x/y sizes differ");
  if (n < 2) throw Error(ErrorCode::kTooFewExtrema, "spline needs at least two knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "spline knots must be strictly increasing");
    }
  }

  // Thomas algorithm on the interior second derivatives; natural ends M0 = Mn = 0.
  second_.assign(n, 0.0);
  if (n == 2) return;
  const std::size_t m = n - 2;
  std::vector<double> diag(m), upper(m), rhs(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    diag[k] = 2.0 * (h0 + h1);
    upper[k] = h1;
    rhs[k] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (std::size_t k = 1; k < m; ++k) {
    const double lower = x_[k + 1] - x_[k];  // h_{i-1} for row i = k + 1
    const double w = lower / diag[k - 1];
    diag[k] -= w * upper[k - 1];
    rhs[k] -= w * rhs[k - 1];
  }
  second_[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) {
    second_[k + 1] = (rhs[k] - upper[k] * second_[k + 2]) / diag[k];
  }
}

double NaturalCubicSpline::operator()(double at) const {
  const std::size_t n = x_.size();
  if (at <= x_.front()) {
    const double h = x_[1] - x_[0];
    const double slope = (y_[1] - y_[0]) / h - h * (2.0 * second_[0] + second_[1]) / 6.0;
    return y_[0] + slope * (at - x_[0]);
  }
  if (at >= x_.back()) {
    const double h = x_[n - 1] - x_[n - 2];
    const double slope =
        (y_[n - 1] - y_[n - 2]) / h + h * (second_[n - 2] + 2.0 * second_[n - 1]) / 6.0;
    return y_[n - 1] + slope * (at - x_[n - 1]);
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), at);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - at) / h;
  const double b = (at - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
}

Signal envelope(std::span<const double> s, std::span<const std::size_t> extrema,
                EnvelopeKind kind, BoundaryMode mode) {
  if (extrema.size() < 2) {
    throw Error(ErrorCode::kTooFewExtrema,
                std::string(kind == EnvelopeKind::kUpper ? "upper" : "lower") +
                    " envelope needs at least two extrema, got " +
                    std::to_string(extrema.size()));
  }
  if (*std::max_element(extrema.begin(), extrema.end()) >= s.size()) {
    throw Error(ErrorCode::kOutOfBounds, "extremum index beyond signal end");
  }
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(extrema.size() + 4);
  y.reserve(extrema.size() + 4);

  const double last = static_cast<double>(s.size() - 1);
  if (mode == BoundaryMode::kMirror) {
    for (std::size_t k : {std::size_t{1}, std::size_t{0}}) {
      if (extrema[k] == 0) continue;
      x.push_back(-static_cast<double>(extrema[k]));
      y.push_back(s[extrema[k]]);
    }
  }
  for (std::size_t idx : extrema) {
    x.push_back(static_cast<double>(idx));
    y.push_back(s[idx]);
  }
  if (mode == BoundaryMode::kMirror) {
    const std::size_t n = extrema.size();
    for (std::size_t k : {n - 1, n - 2}) {
      if (static_cast<double>(extrema[k]) == last) continue;
      x.push_back(2.0 * last - static_cast<double>(extrema[k]));
      y.push_back(s[extrema[k]]);
    }
  }

  const NaturalCubicSpline spline(std::move(x), std::move(y));
  Signal out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = spline(static_cast<double>(i));
  return out;
}

SiftResult sift_detailed(std::span<const double> s, const SiftConfig& cfg) {
  cfg.validate();
  SiftResult result;
  result.imf.assign(s.begin(), s.end());
  Signal& h = result.imf;

  for (int iter = 0; iter < cfg.max_sift_iterations; ++iter) {
    const Extrema ex = find_extrema(h);
    if (ex.maxima.size() < 2 || ex.minima.size() < 2) {
      if (iter == 0) {
        throw Error(ErrorCode::kTooFewExtrema,
                    "sifting needs two maxima and two minima, got " +
                        std::to_string(ex.maxima.size()) + " and " +
                        std::to_string(ex.minima.size()));
      }
      break;
    }
    const Signal upper = envelope(h, ex.maxima, EnvelopeKind::kUpper, BoundaryMode::kMirror);
    const Signal lower = envelope(h, ex.minima, EnvelopeKind::kLower, BoundaryMode::kMirror);

    double change = 0.0;
    double energy = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double mean = 0.5 * (upper[i] + lower[i]);
      energy += h[i] * h[i];
      change += mean * mean;
      h[i] -= mean;
    }
    result.iterations = iter + 1;
    if (energy == 0.0 || change / energy < cfg.sd_threshold) break;
  }
  return result;
}

Signal sift(std::span<const double> s, const SiftConfig& cfg) {
  return sift_detailed(s, cfg).imf;
}

Decomposition decompose(std::span<const double> s, const SiftConfig& cfg) {
  cfg.validate();
  if (s.size() < 4) {
    throw Error(ErrorCode::kSignalTooShort,
                "decomposition needs at least 4 samples, got " + std::to_string(s.size()));
  }
  if (!all_finite(s)) throw Error(ErrorCode::kInvalidArgument, "signal contains NaN/Inf");

  Decomposition out;
  out.residue.assign(s.begin(), s.end());
  while (true) {
    const Extrema ex = find_extrema(out.residue);
    if (ex.maxima.size() < 2 || ex.minima.size() < 2) break;
    if (out.imfs.size() >= cfg.max_imfs) {
      out.hit_max_imfs = true;
      break;
    }
    SiftResult sr = sift_detailed(out.residue, cfg);
    if (std::all_of(sr.imf.begin(), sr.imf.end(), [](double v) { return v == 0.0; })) break;
    for (std::size_t i = 0; i < out.residue.size(); ++i) out.residue[i] -= sr.imf[i];
    out.imfs.push_back(std::move(sr.imf));
    out.sift_iterations.push_back(sr.iterations);
  }
  return out;
}

std::size_t zero_crossings(std::span<const double> s) noexcept {
  std::size_t count = 0;
  int prev = 0;
  for (double v : s) {
    const int sign = (v > 0.0) - (v < 0.0);
    if (sign == 0) continue;
    if (prev != 0 && sign != prev) ++count;
    prev = sign;
  }
  return count;
}

}  // namespace emdtex::emd1d
