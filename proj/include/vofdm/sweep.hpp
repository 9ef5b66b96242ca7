#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "vofdm/common.hpp"
#include "vofdm/metrics.hpp"
#include "vofdm/preprocess.hpp"

namespace vofdm {

// Evaluates the Monte-Carlo output SNR at every threshold of an ascending
// grid from one shared set of realizations.  Each (sent, received) pair is
// bucketed once by received envelope; per-threshold moment sums are then
// recovered from prefix/suffix sums over the buckets, so all thresholds see
// identical noise (common random numbers) at O(n + grid) cost.
class GammaThresholdSweep {
 public:
  GammaThresholdSweep(std::vector<double> grid, PreprocessorKind kind,
                      R1Mode mode = R1Mode::correlation)
      : grid_(std::move(grid)), kind_(kind), mode_(mode) {
    detail::require(!grid_.empty(), "empty threshold grid");
    detail::require(std::is_sorted(grid_.begin(), grid_.end()),
                    "threshold grid must be ascending");
    detail::require(grid_.front() > 0.0, "thresholds must be positive");
    detail::require(kind_ != PreprocessorKind::identity,
                    "threshold sweep covers nulling and clipping only");
    const std::size_t n_buckets = grid_.size() + 1;
    cnt_.assign(n_buckets, 0);
    re_ys_.assign(n_buckets, KahanSum{});
    y2_.assign(n_buckets, KahanSum{});
    unit_re_.assign(n_buckets, KahanSum{});
    y2s2_.assign(n_buckets, KahanSum{});
    s2_.assign(n_buckets, KahanSum{});
  }

  void add(cpx sent, cpx received) {
    const double env = std::abs(received);
    const std::size_t idx = static_cast<std::size_t>(
        std::lower_bound(grid_.begin(), grid_.end(), env) - grid_.begin());
    const double s2 = std::norm(sent);
    const double y2 = std::norm(received);
    const double re_ys =
        received.real() * sent.real() + received.imag() * sent.imag();
    ++cnt_[idx];
    re_ys_[idx].add(re_ys);
    y2_[idx].add(y2);
    y2s2_[idx].add(y2 * s2);
    s2_[idx].add(s2);
    if (env > 0.0) unit_re_[idx].add(re_ys / env);
    sum_s2_.add(s2);
    ++n_;
  }

  void add(const std::vector<cpx>& sent, const std::vector<cpx>& received) {
    detail::require(sent.size() == received.size(),
                    "sent/received streams must have equal length");
    for (std::size_t k = 0; k < sent.size(); ++k) add(sent[k], received[k]);
  }

  void merge(const GammaThresholdSweep& other) {
    detail::require(grid_ == other.grid_ && kind_ == other.kind_ &&
                        mode_ == other.mode_,
                    "cannot merge mismatched sweeps");
    for (std::size_t i = 0; i < cnt_.size(); ++i) {
      cnt_[i] += other.cnt_[i];
      re_ys_[i].merge(other.re_ys_[i]);
      y2_[i].merge(other.y2_[i]);
      unit_re_[i].merge(other.unit_re_[i]);
      y2s2_[i].merge(other.y2s2_[i]);
      s2_[i].merge(other.s2_[i]);
    }
    sum_s2_.merge(other.sum_s2_);
    n_ += other.n_;
  }

  std::uint64_t n_samples() const { return n_; }
  const std::vector<double>& grid() const { return grid_; }

  // One estimate per grid threshold.  Samples in buckets 0..j pass threshold
  // j unchanged; higher buckets contribute 0 (nulling) or their clipped
  // moments, which scale as T and T^2 of envelope-normalized suffix sums.
  std::vector<SnrEstimate> estimates() const {
    detail::require(n_ > 0, "output SNR of zero-length streams");
    const std::size_t n_buckets = cnt_.size();
    std::vector<double> suf_unit_re(n_buckets + 1, 0.0);
    std::vector<double> suf_s2(n_buckets + 1, 0.0);
    std::vector<double> suf_cnt(n_buckets + 1, 0.0);
    for (std::size_t i = n_buckets; i-- > 0;) {
      suf_unit_re[i] = suf_unit_re[i + 1] + unit_re_[i].value();
      suf_s2[i] = suf_s2[i + 1] + s2_[i].value();
      suf_cnt[i] = suf_cnt[i + 1] + static_cast<double>(cnt_[i]);
    }
    std::vector<SnrEstimate> out(grid_.size());
    double pre_re = 0.0, pre_y2 = 0.0, pre_y2s2 = 0.0;
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      pre_re += re_ys_[j].value();
      pre_y2 += y2_[j].value();
      pre_y2s2 += y2s2_[j].value();
      double a = pre_re, b = pre_y2, d = pre_y2s2;
      if (kind_ == PreprocessorKind::clipping) {
        const double t = grid_[j];
        a += t * suf_unit_re[j + 1];
        b += t * t * suf_cnt[j + 1];
        d += t * t * suf_s2[j + 1];
      }
      const double r1 = (mode_ == R1Mode::correlation ? a : d) /
                        (2.0 * static_cast<double>(n_));
      out[j] = detail::snr_from_moments(a, b, sum_s2_.value(), r1, n_);
    }
    return out;
  }

 private:
  std::vector<double> grid_;
  PreprocessorKind kind_;
  R1Mode mode_;
  std::vector<std::uint64_t> cnt_;
  std::vector<KahanSum> re_ys_, y2_, unit_re_, y2s2_, s2_;
  KahanSum sum_s2_;
  std::uint64_t n_ = 0;
};

}  // namespace vofdm
