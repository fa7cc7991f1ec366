#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "wcomm/grid.hpp"

namespace wcomm {

using Complex = std::complex<double>;

// In-place multidimensional DFT (row-major, last axis fastest). sign = -1 is the
// forward transform; no normalisation is applied in either direction.
void dft_inplace(std::vector<Complex>& data, std::span<const int> dims, int sign);

// Signed frequency of a DFT index: k for k <= N/2, k - N otherwise.
int centered_frequency(int index, int N);

// Applies a Fourier multiplier given on signed integer frequencies (per-axis index).
GridFunction apply_multiplier(const GridFunction& f, const std::function<Complex(const IVec&)>& symbol);

// (K * f)(x) = h^n sum_y K(x - y) f(y), with K indexed by the wrapped displacement cell.
GridFunction circular_convolution(const GridFunction& f, std::span<const double> kernel);

}  // namespace wcomm
