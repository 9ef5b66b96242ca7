#pragma once

#include <cstdint>
#include <vector>

#include "vofdm/common.hpp"
#include "vofdm/modem.hpp"
#include "vofdm/rng.hpp"

namespace vofdm {

// Bernoulli-Gaussian impulsive noise.  All variances are per real dimension
// against a transmit signal of unit variance per dimension, so
// sigma_w2 = 10^(-snr_db/10) and sigma_i2 = 10^(-sinr_db/10).
struct NoiseConfig {
  double p = 0.0;
  double snr_db = 0.0;
  double sinr_db = 0.0;
  double sigma_w2 = 1.0;
  double sigma_i2 = 0.0;

  static NoiseConfig from_db(double p, double snr_db, double sinr_db) {
    detail::require(p >= 0.0 && p <= 1.0,
                    "impulse probability must be in [0, 1]");
    NoiseConfig cfg;
    cfg.p = p;
    cfg.snr_db = snr_db;
    cfg.sinr_db = sinr_db;
    cfg.sigma_w2 = std::pow(10.0, -snr_db / 10.0);
    cfg.sigma_i2 = std::pow(10.0, -sinr_db / 10.0);
    detail::require(std::isfinite(cfg.sigma_w2),
                    "snr_db gives a non-finite background variance");
    detail::require(std::isfinite(cfg.sigma_i2),
                    "sinr_db gives a non-finite impulse variance");
    return cfg;
  }

  void validate() const {
    detail::require(p >= 0.0 && p <= 1.0,
                    "impulse probability must be in [0, 1]");
    detail::require(std::isfinite(sigma_w2) && sigma_w2 >= 0.0,
                    "background variance must be finite and >= 0");
    detail::require(std::isfinite(sigma_i2) && sigma_i2 >= 0.0,
                    "impulse variance must be finite and >= 0");
  }
};

struct NoisyFrame {
  std::vector<cpx> samples;
  std::vector<std::uint8_t> impulse_mask;
};

// r = s + n_w + b*g with b ~ Bernoulli(p); the mask records where impulses
// landed so detection-error statistics can condition on it.
inline NoisyFrame add_noise(const TimeFrame& frame, const NoiseConfig& cfg,
                            RngStream& rng) {
  cfg.validate();
  const std::size_t n = frame.samples.size();
  NoisyFrame out;
  out.samples.resize(n);
  out.impulse_mask.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    cpx noise = rng.gaussian_pair(cfg.sigma_w2);
    if (rng.bernoulli(cfg.p)) {
      noise += rng.gaussian_pair(cfg.sigma_i2);
      out.impulse_mask[k] = 1;
    }
    out.samples[k] = frame.samples[k] + noise;
  }
  return out;
}

// Density of one real dimension of the total noise: a two-component
// zero-mean Gaussian mixture with weights (1-p, p) and variances
// (sigma_w2, sigma_w2 + sigma_i2).
inline double total_noise_pdf(double x, const NoiseConfig& cfg) {
  cfg.validate();
  const double weights[2] = {1.0 - cfg.p, cfg.p};
  const double vars[2] = {cfg.sigma_w2, cfg.sigma_w2 + cfg.sigma_i2};
  double density = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (weights[i] <= 0.0) continue;
    detail::require(vars[i] > 0.0,
                    "mixture component with zero variance has no density");
    density += weights[i] * std::exp(-x * x / (2.0 * vars[i])) /
               std::sqrt(2.0 * kPi * vars[i]);
  }
  return density;
}

// FIR channel with unit average power gain; scale records the applied
// normalization so pre-normalization magnitudes stay recoverable.
struct SelectiveChannel {
  std::vector<cpx> taps;
  double scale = 1.0;
};

// Tap magnitudes i.i.d. log-normal (log-std sigma_ln), phases uniform except
// tap 0 which is kept real as the timing reference, then the response is
// normalized to unit total power.  sigma_ln = 0 with one tap degenerates to
// the identity channel.
inline SelectiveChannel sample_selective(RngStream& rng, std::size_t n_taps,
                                         double sigma_ln) {
  detail::require(n_taps >= 1, "n_taps must be >= 1");
  detail::require(sigma_ln >= 0.0 && std::isfinite(sigma_ln),
                  "sigma_ln must be finite and >= 0");
  SelectiveChannel ch;
  ch.taps.resize(n_taps);
  double power = 0.0;
  for (std::size_t k = 0; k < n_taps; ++k) {
    double z = rng.gaussian_pair(1.0).real();
    double mag = std::exp(sigma_ln * z);
    double phase = (k == 0) ? 0.0 : 2.0 * kPi * rng.uniform01();
    ch.taps[k] = std::polar(mag, phase);
    power += mag * mag;
  }
  ch.scale = 1.0 / std::sqrt(power);
  for (cpx& t : ch.taps) t *= ch.scale;
  return ch;
}

// Circular convolution (cyclic-prefix idealization of the linear channel).
inline TimeFrame apply_selective(const TimeFrame& frame,
                                 const SelectiveChannel& ch) {
  const std::size_t n = frame.samples.size();
  const std::size_t k_taps = ch.taps.size();
  detail::require(k_taps >= 1, "channel needs at least one tap");
  detail::require(k_taps <= n, "channel longer than frame");
  TimeFrame out;
  out.samples.assign(n, cpx{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    cpx acc{0.0, 0.0};
    for (std::size_t j = 0; j < k_taps; ++j)
      acc += ch.taps[j] * frame.samples[(i + n - j) % n];
    out.samples[i] = acc;
  }
  return out;
}

}  // namespace vofdm
