#pragma once

#include <algorithm>
#include <cstdint>

#include "vofdm/common.hpp"

namespace vofdm {

// Square Gray-mapped QAM normalised to unit variance per real dimension,
// so E[|S|^2] = 2.  Supported orders: 4, 16, 64.
struct QamMap {
  int order;
  int levels;        // constellation levels per dimension, sqrt(order)
  int bits_per_dim;  // log2(levels)
  double scale;      // level spacing is 2*scale; E[level^2] = 1

  explicit QamMap(int order_) : order(order_) {
    detail::require(order == 4 || order == 16 || order == 64,
                    "qam_order must be one of {4, 16, 64}");
    levels = (order == 4) ? 2 : (order == 16) ? 4 : 8;
    bits_per_dim = (order == 4) ? 1 : (order == 16) ? 2 : 3;
    scale = std::sqrt(3.0 / static_cast<double>(levels * levels - 1));
  }

  int bits_per_symbol() const { return 2 * bits_per_dim; }

  // One dimension, bits MSB first, Gray-coded so adjacent amplitudes differ
  // in exactly one bit; the all-zero pattern maps to the most positive level.
  double map_dim(const std::uint8_t* bits) const {
    int g = 0;
    for (int b = 0; b < bits_per_dim; ++b) g = (g << 1) | (bits[b] & 1);
    int i = g;
    for (int s = g >> 1; s != 0; s >>= 1) i ^= s;
    return static_cast<double>(levels - 1 - 2 * i) * scale;
  }

  void demap_dim(double x, std::uint8_t* bits) const {
    int i = static_cast<int>(
        std::lround((static_cast<double>(levels - 1) - x / scale) / 2.0));
    i = std::clamp(i, 0, levels - 1);
    int g = i ^ (i >> 1);
    for (int b = 0; b < bits_per_dim; ++b)
      bits[b] = static_cast<std::uint8_t>((g >> (bits_per_dim - 1 - b)) & 1);
  }

  // First half of the bits selects the in-phase level, second half the
  // quadrature level.
  cpx map_symbol(const std::uint8_t* bits) const {
    return {map_dim(bits), map_dim(bits + bits_per_dim)};
  }

  void demap_symbol(cpx s, std::uint8_t* bits) const {
    demap_dim(s.real(), bits);
    demap_dim(s.imag(), bits + bits_per_dim);
  }
};

}  // namespace vofdm
