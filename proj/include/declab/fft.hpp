#pragma once

#include <vector>

#include "declab/common.hpp"

namespace declab {

// In-place complex DFT over a row-major multidimensional grid (FFTW-backed,
// plan creation serialized).  inverse=true applies the unnormalized backward
// transform; divide by the total size to invert.
void fft_nd(std::vector<Complex>& data, const std::vector<int>& shape, bool inverse);

}  // namespace declab
