#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "l2i/core/error.hpp"

namespace l2i {

// In-place iterative radix-2 FFT. Sizes are powers of two throughout this
// project, so nothing fancier is needed.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  require(n > 0 && (n & (n - 1)) == 0, "fft size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double two_pi = 6.283185307179586476925286766559;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? two_pi : -two_pi) / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

// Naive O(N^2) DFT, kept as an independent reference for tests.
inline std::vector<std::complex<double>> dft_naive(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double two_pi = 6.283185307179586476925286766559;
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -two_pi * static_cast<double>(k) * static_cast<double>(t) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace l2i
