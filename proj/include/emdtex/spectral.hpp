#pragma once

// Distribution gap between two image sets in the frequency domain: average
// the unnormalized 2D DFTs of each set, take magnitudes, compare the two
// magnitude grids by mean squared difference.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "emdtex/field.hpp"

namespace emdtex::spectral {

struct SpectrumStats {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::complex<double>> mean_spectrum;  // row-major, E[F(x)]
  ScalarField magnitude;                            // |E[F(x)]|
  std::size_t n_images = 0;
};

// Unnormalized forward DFT, row-major, FFTW sign convention (exp(-2*pi*i*...)).
std::vector<std::complex<double>> dft2d(const ScalarField& image);

// Loads image i on demand so large sets need not sit in memory. DFTs run on up
// to `jobs` threads; the reduction is a fixed pairwise tree over image index,
// so results are bit-identical for any `jobs`.
// Throws kEmptySet for count 0 and kShapeMismatch for a wrong-sized image.
SpectrumStats mean_spectrum(std::size_t count,
                            const std::function<ScalarField(std::size_t)>& load,
                            std::size_t height, std::size_t width, int jobs = 1);

SpectrumStats mean_spectrum(std::span<const ScalarField> images, std::size_t height,
                            std::size_t width, int jobs = 1);

// (1/XY) * sum over bins of (|gen| - |real|)^2. Throws kShapeMismatch.
double spectral_difference(const SpectrumStats& gen, const SpectrumStats& real);

// Per-bin squared magnitude difference, the summand of spectral_difference.
ScalarField magnitude_difference(const SpectrumStats& gen, const SpectrumStats& real);

// Rec.601 luma 0.299 R + 0.587 G + 0.114 B. Throws kShapeMismatch unless 3 channels.
ScalarField color_to_scalar(const MultiChannelField& image);

}  // namespace emdtex::spectral
