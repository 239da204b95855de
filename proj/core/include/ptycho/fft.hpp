#pragma once

#include "ptycho/field.hpp"

namespace ptycho {

// 2D DFTs with the orthonormal (unitary) convention: both directions carry
// 1/sqrt(rows*cols), so ifft2(fft2(f)) == f and both preserve the L2 norm.
// Safe to call concurrently from multiple threads.
ComplexField fft2(const ComplexField& f);
ComplexField ifft2(const ComplexField& f);

}  // namespace ptycho
