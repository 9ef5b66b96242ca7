#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "vofdm/channel.hpp"
#include "vofdm/common.hpp"
#include "vofdm/modem.hpp"
#include "vofdm/parallel.hpp"
#include "vofdm/preprocess.hpp"
#include "vofdm/rng.hpp"

namespace vofdm {

inline constexpr std::uint64_t kFramesPerBlock = 128;
inline constexpr std::uint64_t kLowConfidenceExceedances = 20;

// ---------------------------------------------------------------------------
// PAPR CCDF

struct CcdfPoint {
  double papr_db = 0.0;
  double ccdf = 0.0;
  std::uint64_t n_exceed = 0;
  bool low_confidence = false;
};

using CcdfCurve = std::vector<CcdfPoint>;

// Fraction of samples strictly exceeding each grid level.  Samples and grid
// share linear units; the curve reports levels in dB.
inline CcdfCurve ccdf(const std::vector<double>& papr_samples,
                      const std::vector<double>& grid) {
  detail::require(!papr_samples.empty(), "ccdf needs at least one sample");
  std::vector<double> sorted(papr_samples);
  std::sort(sorted.begin(), sorted.end());
  CcdfCurve curve(grid.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto above = std::upper_bound(sorted.begin(), sorted.end(), grid[i]);
    std::uint64_t n_exceed = static_cast<std::uint64_t>(sorted.end() - above);
    curve[i] = {to_db(grid[i]), static_cast<double>(n_exceed) / n, n_exceed,
                n_exceed < kLowConfidenceExceedances};
  }
  return curve;
}

// Smallest sample level (dB) whose empirical CCDF is <= target; the
// horizontal reading of a CCDF plot.
inline double ccdf_quantile_db(std::vector<double> papr_samples, double target) {
  detail::require(!papr_samples.empty(), "ccdf needs at least one sample");
  detail::require(target > 0.0 && target < 1.0, "ccdf target must be in (0, 1)");
  std::sort(papr_samples.begin(), papr_samples.end());
  const std::size_t n = papr_samples.size();
  std::size_t allowed_above =
      static_cast<std::size_t>(target * static_cast<double>(n));
  return to_db(papr_samples[n - 1 - allowed_above]);
}

// ---------------------------------------------------------------------------
// Probability of noise-detection error

// Pr(envelope > T | no impulse) * Pr(no impulse): frames see background
// noise only, and the exceedance fraction is scaled by (1 - p).  All grid
// thresholds are evaluated on the same realizations via envelope bucketing.
inline std::vector<double> p_detection_error_sweep(
    const ModemConfig& modem, const NoiseConfig& noise,
    const std::vector<double>& grid, std::uint64_t trials,
    const RngStream& rng, unsigned threads = 1) {
  modem.validate();
  noise.validate();
  detail::require(trials >= 1, "p_detection_error needs at least one trial");
  detail::require(!grid.empty(), "empty threshold grid");
  detail::require(std::is_sorted(grid.begin(), grid.end()),
                  "threshold grid must be ascending");
  detail::require(grid.front() > 0.0, "thresholds must be positive");

  const std::size_t n_buckets = grid.size() + 1;
  const std::uint64_t n_blocks = (trials + kFramesPerBlock - 1) / kFramesPerBlock;
  std::vector<std::vector<std::uint64_t>> partial(
      n_blocks, std::vector<std::uint64_t>(n_buckets, 0));

  run_blocks(n_blocks, threads, [&](std::size_t b) {
    RngStream local = rng.fork(b);
    std::vector<std::uint64_t>& counts = partial[b];
    const std::uint64_t first = b * kFramesPerBlock;
    const std::uint64_t n_frames =
        std::min<std::uint64_t>(kFramesPerBlock, trials - first);
    for (std::uint64_t f = 0; f < n_frames; ++f) {
      TimeFrame frame = random_frame(local, modem);
      for (const cpx& s : frame.samples) {
        double env = std::abs(s + local.gaussian_pair(noise.sigma_w2));
        std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(grid.begin(), grid.end(), env) - grid.begin());
        ++counts[idx];
      }
    }
  });

  std::vector<std::uint64_t> counts(n_buckets, 0);
  for (const std::vector<std::uint64_t>& part : partial)
    for (std::size_t i = 0; i < n_buckets; ++i) counts[i] += part[i];

  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  std::vector<double> out(grid.size());
  std::uint64_t passed = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    passed += counts[j];
    out[j] = (1.0 - noise.p) * static_cast<double>(total - passed) /
             static_cast<double>(total);
  }
  return out;
}

inline double p_detection_error(const ModemConfig& modem,
                                const NoiseConfig& noise, double threshold,
                                std::uint64_t trials, const RngStream& rng,
                                unsigned threads = 1) {
  detail::require(threshold > 0.0, "threshold must be positive");
  return p_detection_error_sweep(modem, noise, {threshold}, trials, rng,
                                 threads)[0];
}

// ---------------------------------------------------------------------------
// Output SNR, Monte-Carlo

enum class R1Mode { correlation, fourth_moment };

struct SnrEstimate {
  double gamma_linear = 0.0;
  double gamma_db = 0.0;
  double r1 = 0.0;
  std::uint64_t n_samples = 0;
};

namespace detail {

// gamma = r1^2 sum|s|^2 / sum|y - r1 s|^2, clamped to [-200, +200] dB so a
// distortion-free run reports the cap instead of dividing by zero.
inline SnrEstimate snr_from_moments(double sum_re_ys, double sum_y2,
                                    double sum_s2, double r1,
                                    std::uint64_t n_samples) {
  double num = r1 * r1 * sum_s2;
  double den = sum_y2 - 2.0 * r1 * sum_re_ys + r1 * r1 * sum_s2;
  double gamma;
  if (num <= 0.0) {
    gamma = 0.0;
  } else if (den <= 0.0) {
    gamma = kGammaLinearCap;
  } else {
    gamma = num / den;
  }
  gamma = std::clamp(gamma, 1.0 / kGammaLinearCap, kGammaLinearCap);
  return {gamma, to_db(gamma), r1, n_samples};
}

}  // namespace detail

// Accumulates the moment sums behind the Monte-Carlo output SNR.  Partial
// accumulators from worker blocks merge with compensated sums, so the
// estimate is independent of the merge grouping to floating-point accuracy.
class SnrAccumulator {
 public:
  explicit SnrAccumulator(R1Mode mode = R1Mode::correlation) : mode_(mode) {}

  void add(cpx sent, cpx received) {
    double re_ys =
        received.real() * sent.real() + received.imag() * sent.imag();
    double y2 = std::norm(received);
    re_ys_.add(re_ys);
    y2_.add(y2);
    s2_.add(std::norm(sent));
    y2s2_.add(y2 * std::norm(sent));
    ++n_;
  }

  void add(const std::vector<cpx>& sent, const std::vector<cpx>& received) {
    detail::require(sent.size() == received.size(),
                    "sent/received streams must have equal length");
    for (std::size_t k = 0; k < sent.size(); ++k) add(sent[k], received[k]);
  }

  void merge(const SnrAccumulator& other) {
    detail::require(mode_ == other.mode_, "cannot merge mixed-mode accumulators");
    re_ys_.merge(other.re_ys_);
    y2_.merge(other.y2_);
    s2_.merge(other.s2_);
    y2s2_.merge(other.y2s2_);
    n_ += other.n_;
  }

  std::uint64_t n_samples() const { return n_; }

  SnrEstimate estimate() const {
    detail::require(n_ > 0, "output SNR of zero-length streams");
    double nn = static_cast<double>(n_);
    double r1 = (mode_ == R1Mode::correlation ? re_ys_.value() : y2s2_.value()) /
                (2.0 * nn);
    return detail::snr_from_moments(re_ys_.value(), y2_.value(), s2_.value(),
                                    r1, n_);
  }

 private:
  R1Mode mode_;
  KahanSum re_ys_, y2_, s2_, y2s2_;
  std::uint64_t n_ = 0;
};

inline SnrEstimate output_snr_mc(const std::vector<cpx>& sent,
                                 const std::vector<cpx>& received,
                                 R1Mode mode = R1Mode::correlation) {
  SnrAccumulator acc(mode);
  acc.add(sent, received);
  return acc.estimate();
}

// ---------------------------------------------------------------------------
// Output SNR, closed form (conventional OFDM, vb_size = 1)

// Rayleigh-envelope mixture model of the preprocessor output.  Per mixture
// component i with per-dimension variance v_i = sigma_w2 (+ sigma_i2), the
// envelope of signal+noise is Rayleigh with per-dimension power 1 + v_i.
// The scaling constant is
//   R2 = 1 - sum_i p_i [exp(-T^2/(2(1+v_i))) + T * Xi_i],
//   Xi nulling  = (T/(2(1+v_i))) exp(-T^2/(2(1+v_i))),
//   Xi clipping = -sqrt(pi/(2(1+v_i))) Q(T/sqrt(1+v_i)),
// and the output power is
//   E_o = 2 + 2 sum_i p_i [v_i - G_i exp(-T^2/(2(1+v_i)))],
//   G nulling  = 1 + v_i + T^2/2,
//   G clipping = 1 + v_i,
// which satisfies the pass-through limit E_o -> 2(1+sigma_w2) as T -> inf
// with p = 0 and matches Monte-Carlo estimates well inside 0.5 dB.
inline SnrEstimate output_snr_analytic(double threshold,
                                       const NoiseConfig& noise,
                                       PreprocessorKind kind) {
  noise.validate();
  detail::require(threshold > 0.0 && std::isfinite(threshold),
                  "threshold must be positive and finite");
  detail::require(kind != PreprocessorKind::identity,
                  "closed form covers nulling and clipping only");
  const double weights[2] = {1.0 - noise.p, noise.p};
  const double vars[2] = {noise.sigma_w2, noise.sigma_w2 + noise.sigma_i2};
  double r2 = 1.0;
  double e_o = 2.0;
  for (int i = 0; i < 2; ++i) {
    if (weights[i] <= 0.0) continue;
    const double v = 1.0 + vars[i];
    const double tail = std::exp(-threshold * threshold / (2.0 * v));
    double xi, g;
    if (kind == PreprocessorKind::nulling) {
      xi = threshold / (2.0 * v) * tail;
      g = v + threshold * threshold / 2.0;
    } else {
      xi = -std::sqrt(kPi / (2.0 * v)) * q_function(threshold / std::sqrt(v));
      g = v;
    }
    r2 -= weights[i] * (tail + threshold * xi);
    e_o += 2.0 * weights[i] * (vars[i] - g * tail);
  }
  const double den = e_o - 2.0 * r2 * r2;
  if (den <= 0.0)
    throw std::domain_error("analytic model out of validity range");
  double gamma = 2.0 * r2 * r2 / den;
  gamma = std::clamp(gamma, 1.0 / kGammaLinearCap, kGammaLinearCap);
  return {gamma, to_db(gamma), r2, 0};
}

// ---------------------------------------------------------------------------
// Bit error rate

// End-to-end hard-decision BER: random payload -> modulate -> noise ->
// preprocess -> demodulate -> demap.
inline double ber(const ModemConfig& modem, const NoiseConfig& noise,
                  const Preprocessor& pp, std::uint64_t trials,
                  const RngStream& rng, unsigned threads = 1) {
  modem.validate();
  noise.validate();
  detail::require(trials >= 1, "ber needs at least one trial");
  const std::uint64_t n_blocks = (trials + kFramesPerBlock - 1) / kFramesPerBlock;
  std::vector<std::uint64_t> partial(n_blocks, 0);

  run_blocks(n_blocks, threads, [&](std::size_t b) {
    RngStream local = rng.fork(b);
    const std::uint64_t first = b * kFramesPerBlock;
    const std::uint64_t n_frames =
        std::min<std::uint64_t>(kFramesPerBlock, trials - first);
    std::uint64_t errors = 0;
    for (std::uint64_t f = 0; f < n_frames; ++f) {
      std::vector<std::uint8_t> bits =
          random_payload(local, modem.bits_per_frame());
      TimeFrame tx = vofdm_modulate(qam_map(bits, modem), modem);
      NoisyFrame rx = add_noise(tx, noise, local);
      std::vector<std::uint8_t> decided =
          qam_demap(vofdm_demodulate(vofdm::apply(pp, rx.samples), modem), modem);
      for (std::size_t i = 0; i < bits.size(); ++i)
        errors += bits[i] != decided[i];
    }
    partial[b] = errors;
  });

  std::uint64_t errors = 0;
  for (std::uint64_t e : partial) errors += e;
  return static_cast<double>(errors) /
         static_cast<double>(trials * modem.bits_per_frame());
}

}  // namespace vofdm
