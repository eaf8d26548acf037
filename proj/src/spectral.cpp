#include "emdtex/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "emdtex/error.hpp"
#include "emdtex/parallel.hpp"

namespace emdtex::spectral {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

using Spectrum = std::vector<std::complex<double>>;

void accumulate(Spectrum& into, const Spectrum& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

// Binary-counter cascade: merging equal-sized partial sums reproduces the
// pairwise summation tree for a given count, independent of thread timing.
class PairwiseAccumulator {
 public:
  void add(Spectrum s) {
    std::size_t level = 0;
    while (!stack_.empty() && stack_.back().second == level) {
      accumulate(stack_.back().first, s);
      s = std::move(stack_.back().first);
      stack_.pop_back();
      ++level;
    }
    stack_.emplace_back(std::move(s), level);
  }

  Spectrum total() && {
    Spectrum sum = std::move(stack_.back().first);
    stack_.pop_back();
    while (!stack_.empty()) {
      accumulate(sum, stack_.back().first);
      stack_.pop_back();
    }
    return sum;
  }

 private:
  std::vector<std::pair<Spectrum, std::size_t>> stack_;
};

}  // namespace

std::vector<std::complex<double>> dft2d(const ScalarField& image) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  if (h == 0 || w == 0) throw Error(ErrorCode::kShapeMismatch, "empty image");
  Spectrum in(h * w);
  Spectrum out(h * w);
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = image.values()[i];

  auto* in_ptr = reinterpret_cast<fftw_complex*>(in.data());
  auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan = nullptr;
  {
    const std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), in_ptr, out_ptr,
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error(ErrorCode::kInvalidArgument, "FFTW planning failed");
  fftw_execute(plan);
  {
    const std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

SpectrumStats mean_spectrum(std::size_t count,
                            const std::function<ScalarField(std::size_t)>& load,
                            std::size_t height, std::size_t width, int jobs) {
  if (count == 0) throw Error(ErrorCode::kEmptySet, "mean spectrum of an empty image set");

  PairwiseAccumulator acc;
  const std::size_t batch = static_cast<std::size_t>(std::max(jobs, 1));
  std::vector<Spectrum> spectra(batch);
  for (std::size_t start = 0; start < count; start += batch) {
    const std::size_t n = std::min(batch, count - start);
    parallel_for(n, jobs, [&](std::size_t k) {
      const ScalarField image = load(start + k);
      if (image.height() != height || image.width() != width) {
        throw Error(ErrorCode::kShapeMismatch,
                    "image " + std::to_string(start + k) + " is " +
                        std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                        ", expected " + std::to_string(height) + "x" + std::to_string(width));
      }
      spectra[k] = dft2d(image);
    });
    for (std::size_t k = 0; k < n; ++k) acc.add(std::move(spectra[k]));
  }

  SpectrumStats stats;
  stats.height = height;
  stats.width = width;
  stats.n_images = count;
  stats.mean_spectrum = std::move(acc).total();
  const double inv = 1.0 / static_cast<double>(count);
  stats.magnitude = ScalarField(height, width);
  for (std::size_t i = 0; i < stats.mean_spectrum.size(); ++i) {
    stats.mean_spectrum[i] *= inv;
    stats.magnitude.values()[i] = std::abs(stats.mean_spectrum[i]);
  }
  return stats;
}

SpectrumStats mean_spectrum(std::span<const ScalarField> images, std::size_t height,
                            std::size_t width, int jobs) {
  return mean_spectrum(
      images.size(), [&](std::size_t i) { return images[i]; }, height, width, jobs);
}

ScalarField magnitude_difference(const SpectrumStats& gen, const SpectrumStats& real) {
  if (gen.height != real.height || gen.width != real.width) {
    throw Error(ErrorCode::kShapeMismatch, "spectra differ in shape");
  }
  ScalarField out(gen.height, gen.width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = gen.magnitude.values()[i] - real.magnitude.values()[i];
    out.values()[i] = d * d;
  }
  return out;
}

double spectral_difference(const SpectrumStats& gen, const SpectrumStats& real) {
  const ScalarField sq = magnitude_difference(gen, real);
  double sum = 0.0;
  for (double v : sq.values()) sum += v;
  return sum / static_cast<double>(sq.size());
}

ScalarField color_to_scalar(const MultiChannelField& image) {
  if (image.num_channels() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "luma conversion needs 3 channels, got " +
                                               std::to_string(image.num_channels()));
  }
  ScalarField out(image.height(), image.width());
  const auto r = image.channel(0).values();
  const auto g = image.channel(1).values();
  const auto b = image.channel(2).values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values()[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  }
  return out;
}

}  // namespace emdtex::spectral
