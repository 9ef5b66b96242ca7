#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vofdm/common.hpp"
#include "vofdm/dft.hpp"
#include "vofdm/qam.hpp"
#include "vofdm/rng.hpp"

namespace vofdm {

// Frame geometry: n_subcarriers QAM symbols are blocked column-wise into a
// (vb_size x n_blocks) grid and every length-n_blocks row is carried through
// a unitary inverse DFT.  vb_size = 1 is conventional OFDM; vb_size =
// n_subcarriers is single-carrier.
struct ModemConfig {
  std::size_t n_subcarriers = 256;
  std::size_t vb_size = 1;
  int qam_order = 4;
  std::size_t oversampling = 1;

  std::size_t n_blocks() const { return n_subcarriers / vb_size; }

  std::size_t bits_per_frame() const {
    return n_subcarriers * static_cast<std::size_t>(QamMap(qam_order).bits_per_symbol());
  }

  void validate() const {
    detail::require(n_subcarriers > 0, "n_subcarriers must be positive");
    detail::require(vb_size > 0 && n_subcarriers % vb_size == 0,
                    "vb_size must divide n_subcarriers");
    QamMap check(qam_order);
    (void)check;
    detail::require(oversampling >= 1, "oversampling must be >= 1");
  }
};

// Column-major vb_size x n_blocks grid; element (m, l) sits at data[l*rows+m],
// so the flat storage order equals the serial symbol order of the frame.
struct SymbolGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cpx> data;

  cpx& at(std::size_t r, std::size_t c) { return data[c * rows + r]; }
  const cpx& at(std::size_t r, std::size_t c) const { return data[c * rows + r]; }
};

struct TimeFrame {
  std::vector<cpx> samples;
};

inline SymbolGrid qam_map(const std::vector<std::uint8_t>& bits,
                          const ModemConfig& cfg) {
  cfg.validate();
  QamMap qam(cfg.qam_order);
  const std::size_t bps = static_cast<std::size_t>(qam.bits_per_symbol());
  detail::require(bits.size() == cfg.n_subcarriers * bps,
                  "bit count must equal n_subcarriers * bits_per_symbol");
  SymbolGrid grid{cfg.vb_size, cfg.n_blocks(),
                  std::vector<cpx>(cfg.n_subcarriers)};
  for (std::size_t k = 0; k < cfg.n_subcarriers; ++k)
    grid.data[k] = qam.map_symbol(bits.data() + k * bps);
  return grid;
}

inline std::vector<std::uint8_t> qam_demap(const SymbolGrid& grid,
                                           const ModemConfig& cfg) {
  cfg.validate();
  detail::require(grid.rows == cfg.vb_size && grid.cols == cfg.n_blocks(),
                  "grid dimensions do not match config");
  QamMap qam(cfg.qam_order);
  const std::size_t bps = static_cast<std::size_t>(qam.bits_per_symbol());
  std::vector<std::uint8_t> bits(cfg.n_subcarriers * bps);
  for (std::size_t k = 0; k < cfg.n_subcarriers; ++k)
    qam.demap_symbol(grid.data[k], bits.data() + k * bps);
  return bits;
}

// Serial sample k is inverse-DFT output floor(k / vb_size) of grid row
// (k mod vb_size): rows are transformed independently and re-interleaved.
inline TimeFrame vofdm_modulate(const SymbolGrid& grid, const ModemConfig& cfg) {
  cfg.validate();
  detail::require(grid.rows == cfg.vb_size && grid.cols == cfg.n_blocks(),
                  "grid dimensions do not match config");
  const std::size_t m_rows = grid.rows;
  const std::size_t l_cols = grid.cols;
  TimeFrame out;
  out.samples.resize(m_rows * l_cols);
  std::vector<cpx> row(l_cols);
  for (std::size_t m = 0; m < m_rows; ++m) {
    for (std::size_t l = 0; l < l_cols; ++l) row[l] = grid.at(m, l);
    dft_inplace(row, true);
    for (std::size_t q = 0; q < l_cols; ++q) out.samples[q * m_rows + m] = row[q];
  }
  return out;
}

inline SymbolGrid vofdm_demodulate(const std::vector<cpx>& samples,
                                   const ModemConfig& cfg) {
  cfg.validate();
  detail::require(samples.size() == cfg.n_subcarriers,
                  "frame length does not match config");
  const std::size_t m_rows = cfg.vb_size;
  const std::size_t l_cols = cfg.n_blocks();
  SymbolGrid grid{m_rows, l_cols, std::vector<cpx>(cfg.n_subcarriers)};
  std::vector<cpx> row(l_cols);
  for (std::size_t m = 0; m < m_rows; ++m) {
    for (std::size_t q = 0; q < l_cols; ++q) row[q] = samples[q * m_rows + m];
    dft_inplace(row, false);
    for (std::size_t l = 0; l < l_cols; ++l) grid.at(m, l) = row[l];
  }
  return grid;
}

inline SymbolGrid vofdm_demodulate(const TimeFrame& frame, const ModemConfig& cfg) {
  return vofdm_demodulate(frame.samples, cfg);
}

// Peak sample power over empirical mean power, linear scale.  With
// oversampling > 1 the waveform is interpolated by frequency-domain
// zero-padding and both peak and mean are taken on the dense grid; the
// ratio is scale-free.
inline double papr(const TimeFrame& frame, std::size_t oversampling = 1) {
  detail::require(!frame.samples.empty(), "undefined PAPR: empty frame");
  detail::require(oversampling >= 1, "oversampling must be >= 1");
  const std::vector<cpx>* sig = &frame.samples;
  std::vector<cpx> dense;
  if (oversampling > 1) {
    std::vector<cpx> spec = dft(frame.samples, false);
    const std::size_t n = spec.size();
    const std::size_t nu = n * oversampling;
    dense.assign(nu, cpx{0.0, 0.0});
    const std::size_t half = n / 2;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t dst = (k < half) ? k : nu - (n - k);
      dense[dst] = spec[k];
    }
    dft_inplace(dense, true);
    sig = &dense;
  }
  double peak = 0.0;
  double mean = 0.0;
  for (const cpx& v : *sig) {
    double pwr = std::norm(v);
    if (pwr > peak) peak = pwr;
    mean += pwr;
  }
  mean /= static_cast<double>(sig->size());
  detail::require(mean > 0.0, "undefined PAPR: all-zero frame");
  return peak / mean;
}

// Independent uniform payload bits, 32 per generator word.
inline std::vector<std::uint8_t> random_payload(RngStream& rng, std::size_t n_bits) {
  std::vector<std::uint8_t> bits(n_bits);
  std::uint32_t word = 0;
  for (std::size_t i = 0; i < n_bits; ++i) {
    if (i % 32 == 0) word = rng.next_u32();
    bits[i] = static_cast<std::uint8_t>((word >> (i % 32)) & 1u);
  }
  return bits;
}

// Convenience: map a fresh random payload and modulate it.
inline TimeFrame random_frame(RngStream& rng, const ModemConfig& cfg) {
  return vofdm_modulate(qam_map(random_payload(rng, cfg.bits_per_frame()), cfg), cfg);
}

}  // namespace vofdm
