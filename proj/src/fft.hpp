#pragma once

#include <complex>

#include "snls/lattice.hpp"

namespace snls::detail {

// Unnormalized in-place complex DFT over the whole grid.
// sign = -1 is the forward transform, +1 the backward one.
void fft_inplace(const GridSpec& grid, std::complex<double>* data, int sign);

}  // namespace snls::detail
