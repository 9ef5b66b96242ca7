#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vofdm/channel.hpp"
#include "vofdm/common.hpp"
#include "vofdm/metrics.hpp"
#include "vofdm/modem.hpp"
#include "vofdm/parallel.hpp"
#include "vofdm/preprocess.hpp"
#include "vofdm/rng.hpp"
#include "vofdm/sweep.hpp"

namespace vofdm {

enum class Objective { max_output_snr, min_ber };

inline const char* to_string(Objective objective) {
  return objective == Objective::max_output_snr ? "max_output_snr" : "min_ber";
}

struct ThresholdGrid {
  double lo = 0.05;
  double hi = 8.0;
  double step = 0.05;

  std::vector<double> materialize() const {
    detail::require(lo > 0.0 && std::isfinite(lo),
                    "grid lower bound must be positive and finite");
    detail::require(step > 0.0 && std::isfinite(step),
                    "grid step must be positive and finite");
    detail::require(hi >= lo, "grid upper bound below lower bound");
    const std::size_t count =
        static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
      grid[i] = lo + static_cast<double>(i) * step;
    return grid;
  }
};

// One (vector size, impulse probability, SINR) grid point of a sweep.
struct PointSpec {
  std::size_t m = 1;
  double p = 0.01;
  double sinr_db = -20.0;
};

struct SweepSpec {
  ModemConfig modem;  // vb_size is overridden per grid point
  double snr_db = 25.0;
  PreprocessorKind kind = PreprocessorKind::nulling;
  Objective objective = Objective::max_output_snr;
  ThresholdGrid threshold_grid;
  std::vector<std::size_t> m_values{1, 16, 32, 64};
  std::vector<double> p_values{0.01};
  std::vector<double> sinr_grid_db{-40.0, -35.0, -30.0, -25.0, -20.0, -15.0,
                                   -10.0};
  std::uint64_t trials_per_point = 4000;
  bool analytic_m1 = false;
  R1Mode r1_mode = R1Mode::correlation;
  double threshold_bound = 20.0 * kSqrt2;
  unsigned threads = 1;

  void validate() const {
    std::vector<double> grid = threshold_grid.materialize();
    detail::require(grid.back() <= threshold_bound,
                    "threshold grid exceeds the supported envelope range");
    detail::require(trials_per_point >= 1, "trials_per_point must be >= 1");
    detail::require(!m_values.empty(), "empty vector-size list");
    detail::require(!p_values.empty(), "empty impulse-probability list");
    detail::require(!sinr_grid_db.empty(), "empty SINR grid");
    ModemConfig probe = modem;
    for (std::size_t m : m_values) {
      probe.vb_size = m;
      probe.validate();
    }
  }
};

struct OptimumRecord {
  std::size_t m = 1;
  double p = 0.0;
  double sinr_db = 0.0;
  PreprocessorKind kind = PreprocessorKind::nulling;
  Objective objective = Objective::max_output_snr;
  double optimal_threshold = 0.0;
  double objective_value = 0.0;  // output SNR in dB, or BER
  bool boundary = false;         // optimum sits on a grid endpoint
  bool analytic = false;         // closed form instead of Monte-Carlo
  std::uint64_t n_samples = 0;
};

// Objective evaluated at every grid threshold; points the closed form
// rejects are marked invalid.
struct ObjectiveCurve {
  std::vector<double> thresholds;
  std::vector<double> values;
  std::vector<char> valid;
};

namespace detail {

// Bits and noise branch from separate forks so that, for a fixed rng, the
// noise stream consumed at a grid point is independent of the vector size:
// sweeping m under one rng compares structures on identical realizations.
inline constexpr std::uint64_t kBitsFork = 1;
inline constexpr std::uint64_t kNoiseFork = 2;

inline std::vector<SnrEstimate> sweep_output_snr(
    const ModemConfig& modem, const NoiseConfig& noise,
    const std::vector<double>& grid, PreprocessorKind kind, R1Mode mode,
    std::uint64_t trials, const RngStream& rng, unsigned threads) {
  const std::uint64_t n_blocks =
      (trials + kFramesPerBlock - 1) / kFramesPerBlock;
  std::vector<GammaThresholdSweep> partial(
      n_blocks, GammaThresholdSweep(grid, kind, mode));
  const RngStream bits_root = rng.fork(kBitsFork);
  const RngStream noise_root = rng.fork(kNoiseFork);
  run_blocks(n_blocks, threads, [&](std::size_t b) {
    RngStream bits = bits_root.fork(b);
    RngStream noise_rng = noise_root.fork(b);
    const std::uint64_t first = b * kFramesPerBlock;
    const std::uint64_t n_frames =
        std::min<std::uint64_t>(kFramesPerBlock, trials - first);
    for (std::uint64_t f = 0; f < n_frames; ++f) {
      TimeFrame tx = random_frame(bits, modem);
      NoisyFrame rx = add_noise(tx, noise, noise_rng);
      partial[b].add(tx.samples, rx.samples);
    }
  });
  GammaThresholdSweep& total = partial[0];
  for (std::size_t b = 1; b < partial.size(); ++b) total.merge(partial[b]);
  return total.estimates();
}

inline std::vector<double> sweep_ber(const ModemConfig& modem,
                                     const NoiseConfig& noise,
                                     const std::vector<double>& grid,
                                     PreprocessorKind kind,
                                     std::uint64_t trials,
                                     const RngStream& rng, unsigned threads) {
  const std::uint64_t n_blocks =
      (trials + kFramesPerBlock - 1) / kFramesPerBlock;
  std::vector<std::vector<std::uint64_t>> partial(
      n_blocks, std::vector<std::uint64_t>(grid.size(), 0));
  const RngStream bits_root = rng.fork(kBitsFork);
  const RngStream noise_root = rng.fork(kNoiseFork);
  run_blocks(n_blocks, threads, [&](std::size_t b) {
    RngStream bits_rng = bits_root.fork(b);
    RngStream noise_rng = noise_root.fork(b);
    const std::uint64_t first = b * kFramesPerBlock;
    const std::uint64_t n_frames =
        std::min<std::uint64_t>(kFramesPerBlock, trials - first);
    for (std::uint64_t f = 0; f < n_frames; ++f) {
      std::vector<std::uint8_t> bits =
          random_payload(bits_rng, modem.bits_per_frame());
      TimeFrame tx = vofdm_modulate(qam_map(bits, modem), modem);
      NoisyFrame rx = add_noise(tx, noise, noise_rng);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        Preprocessor pp = Preprocessor::make(kind, grid[j]);
        std::vector<std::uint8_t> decided =
            qam_demap(vofdm_demodulate(vofdm::apply(pp, rx.samples), modem), modem);
        std::uint64_t errors = 0;
        for (std::size_t i = 0; i < bits.size(); ++i)
          errors += bits[i] != decided[i];
        partial[b][j] += errors;
      }
    }
  });
  std::vector<double> out(grid.size());
  const double n_bits =
      static_cast<double>(trials) * static_cast<double>(modem.bits_per_frame());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::uint64_t errors = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) errors += partial[b][j];
    out[j] = static_cast<double>(errors) / n_bits;
  }
  return out;
}

}  // namespace detail

// Locates the best preprocessor threshold on the grid for one sweep point.
// Ties resolve to the smaller threshold.  With analytic_m1 set, m == 1
// output-SNR points use the closed form; grid thresholds outside its
// validity range are skipped.
inline OptimumRecord optimize_threshold(const PointSpec& pt,
                                        const SweepSpec& spec,
                                        const RngStream& rng,
                                        ObjectiveCurve* curve = nullptr) {
  std::vector<double> grid = spec.threshold_grid.materialize();
  detail::require(grid.back() <= spec.threshold_bound,
                  "threshold grid exceeds the supported envelope range");
  detail::require(spec.trials_per_point >= 1, "trials_per_point must be >= 1");
  ModemConfig modem = spec.modem;
  modem.vb_size = pt.m;
  modem.validate();
  const NoiseConfig noise = NoiseConfig::from_db(pt.p, spec.snr_db, pt.sinr_db);

  OptimumRecord record;
  record.m = pt.m;
  record.p = pt.p;
  record.sinr_db = pt.sinr_db;
  record.kind = spec.kind;
  record.objective = spec.objective;

  std::vector<double> values(grid.size());
  std::vector<char> valid(grid.size(), 1);
  const bool maximize = spec.objective == Objective::max_output_snr;

  if (maximize && spec.analytic_m1 && pt.m == 1) {
    record.analytic = true;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      try {
        values[j] = output_snr_analytic(grid[j], noise, spec.kind).gamma_db;
      } catch (const std::domain_error&) {
        valid[j] = 0;
        values[j] = -kGammaDbCap;
      }
    }
  } else if (maximize) {
    std::vector<SnrEstimate> estimates =
        detail::sweep_output_snr(modem, noise, grid, spec.kind, spec.r1_mode,
                                 spec.trials_per_point, rng, spec.threads);
    for (std::size_t j = 0; j < grid.size(); ++j)
      values[j] = estimates[j].gamma_db;
    record.n_samples = spec.trials_per_point * modem.n_subcarriers;
  } else {
    values = detail::sweep_ber(modem, noise, grid, spec.kind,
                               spec.trials_per_point, rng, spec.threads);
    record.n_samples = spec.trials_per_point * modem.bits_per_frame();
  }

  std::size_t best = grid.size();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!valid[j]) continue;
    if (best == grid.size() || (maximize ? values[j] > values[best]
                                         : values[j] < values[best]))
      best = j;
  }
  if (best == grid.size())
    throw std::domain_error(
        "analytic model out of validity range at every grid threshold");

  record.optimal_threshold = grid[best];
  record.objective_value = values[best];
  record.boundary = best == 0 || best + 1 == grid.size();
  if (curve != nullptr) *curve = {std::move(grid), std::move(values),
                                  std::move(valid)};
  return record;
}

// Optimizes every (m, p, SINR) tuple of the spec.  The rng fork feeding a
// tuple depends only on (p, SINR), so all vector sizes at a tuple share
// noise realizations and their optima can be differenced pairwise.
inline std::vector<OptimumRecord> run_sweep(const SweepSpec& spec,
                                            const RngStream& rng) {
  spec.validate();
  std::vector<OptimumRecord> records;
  records.reserve(spec.m_values.size() * spec.p_values.size() *
                  spec.sinr_grid_db.size());
  for (std::size_t m : spec.m_values) {
    for (std::size_t pi = 0; pi < spec.p_values.size(); ++pi) {
      for (std::size_t si = 0; si < spec.sinr_grid_db.size(); ++si) {
        PointSpec pt{m, spec.p_values[pi], spec.sinr_grid_db[si]};
        RngStream tuple_rng = rng.fork(pi * 1000003ULL + si);
        try {
          records.push_back(optimize_threshold(pt, spec, tuple_rng));
        } catch (const std::exception& e) {
          throw std::runtime_error(
              "threshold optimization failed at m=" + std::to_string(pt.m) +
              ", p=" + std::to_string(pt.p) +
              ", sinr_db=" + std::to_string(pt.sinr_db) + ": " + e.what());
        }
      }
    }
  }
  return records;
}

}  // namespace vofdm
