#pragma once

#include <cstddef>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vofdm/common.hpp"

namespace vofdm {

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Twiddle table for length n: w[k] = exp(-i 2 pi k / n).  Cached per thread
// so repeated transforms of the same length cost no trigonometry.
inline const std::vector<cpx>& twiddles(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::vector<cpx>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<cpx> w(n);
    for (std::size_t k = 0; k < n; ++k) {
      double a = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
      w[k] = {std::cos(a), std::sin(a)};
    }
    it = cache.emplace(n, std::move(w)).first;
  }
  return it->second;
}

inline void fft_pow2(std::vector<cpx>& x, bool inverse) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  const std::vector<cpx>& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cpx tw = w[k * stride];
        if (inverse) tw = std::conj(tw);
        cpx a = x[i + k];
        cpx b = x[i + k + half] * tw;
        x[i + k] = a + b;
        x[i + k + half] = a - b;
      }
    }
  }
}

inline void dft_direct(std::vector<cpx>& x, bool inverse) {
  const std::size_t n = x.size();
  const std::vector<cpx>& w = twiddles(n);
  std::vector<cpx> out(n, cpx{0.0, 0.0});
  for (std::size_t q = 0; q < n; ++q) {
    cpx acc{0.0, 0.0};
    for (std::size_t l = 0; l < n; ++l) {
      cpx tw = w[(q * l) % n];
      if (inverse) tw = std::conj(tw);
      acc += x[l] * tw;
    }
    out[q] = acc;
  }
  x = std::move(out);
}

}  // namespace detail

// Unitary discrete Fourier transform: forward kernel exp(-i 2 pi q l / L),
// inverse kernel conjugated, both scaled by 1/sqrt(L) so the transform
// preserves power in each direction.  Power-of-two lengths take the radix-2
// path; any other length falls back to direct evaluation.
inline void dft_inplace(std::vector<cpx>& x, bool inverse = false) {
  detail::require(!x.empty(), "zero-length transform");
  const std::size_t n = x.size();
  if (n == 1) return;
  if (detail::is_pow2(n)) {
    detail::fft_pow2(x, inverse);
  } else {
    detail::dft_direct(x, inverse);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (cpx& v : x) v *= scale;
}

inline std::vector<cpx> dft(std::vector<cpx> x, bool inverse = false) {
  dft_inplace(x, inverse);
  return x;
}

inline std::vector<cpx> idft(std::vector<cpx> x) {
  dft_inplace(x, true);
  return x;
}

}  // namespace vofdm
