#pragma once

#include <complex>
#include <span>

#include "nisr/grid.hpp"

namespace nisr::fft {

// Thin wrappers over FFTW. Plans are cached per shape; transforms are
// unnormalized (inverse(forward(x)) == N * x).

void forward_2d(ComplexGrid& data);
void inverse_2d(ComplexGrid& data);

ComplexGrid forward_2d(const RealGrid& data);

/// In-place transform of a dense depth x rows x cols volume.
void forward_3d(std::span<std::complex<double>> data, int depth, int rows, int cols);
void inverse_3d(std::span<std::complex<double>> data, int depth, int rows, int cols);

/// Signed frequency (cycles per sample) of DFT bin `k` for an `n`-point transform.
double frequency(int k, int n);

}  // namespace nisr::fft
