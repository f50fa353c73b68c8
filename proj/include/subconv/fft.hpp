#pragma once

// Thin wrappers over FFTW. Plans are created once per size under a lock and
// executed with the new-array interface, so the functions below are safe to
// call from concurrent trials.

#include <cstddef>

#include "subconv/types.hpp"

namespace subconv::fft {

/// Unnormalized forward DFT: out_k = sum_j in_j exp(-2 pi i jk/n).
ComplexVector forward(const ComplexVector& in);
/// Unnormalized backward DFT: out_k = sum_j in_j exp(+2 pi i jk/n).
ComplexVector backward(const ComplexVector& in);

/// Real-input forward DFT; returns the n/2+1 non-redundant coefficients.
ComplexVector forward_real(const Vector& in);
/// Inverse of forward_real including the 1/n factor.
Vector inverse_real(const ComplexVector& half_spectrum, std::size_t n);

/// Orthonormal DCT-II and its inverse (DCT-III).
Vector dct(const Vector& in);
Vector idct(const Vector& in);

}  // namespace subconv::fft
