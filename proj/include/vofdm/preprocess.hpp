#pragma once

#include <vector>

#include "vofdm/common.hpp"

namespace vofdm {

enum class PreprocessorKind { identity, nulling, clipping };

inline const char* to_string(PreprocessorKind kind) {
  switch (kind) {
    case PreprocessorKind::identity: return "identity";
    case PreprocessorKind::nulling: return "nulling";
    default: return "clipping";
  }
}

// Memoryless receiver front end comparing the complex envelope against a
// threshold.  Samples with |r| <= threshold pass unchanged; above it,
// nulling zeroes the sample and clipping shrinks it onto the threshold
// circle with its phase intact.
struct Preprocessor {
  PreprocessorKind kind = PreprocessorKind::identity;
  double threshold = 0.0;

  static Preprocessor identity() { return {PreprocessorKind::identity, 0.0}; }

  static Preprocessor nulling(double threshold) {
    check_threshold(threshold);
    return {PreprocessorKind::nulling, threshold};
  }

  static Preprocessor clipping(double threshold) {
    check_threshold(threshold);
    return {PreprocessorKind::clipping, threshold};
  }

  static Preprocessor make(PreprocessorKind kind, double threshold) {
    if (kind == PreprocessorKind::identity) return identity();
    check_threshold(threshold);
    return {kind, threshold};
  }

 private:
  static void check_threshold(double t) {
    detail::require(t > 0.0 && std::isfinite(t),
                    "threshold must be positive and finite");
  }
};

inline cpx apply_one(const Preprocessor& pp, cpx r) {
  if (pp.kind == PreprocessorKind::identity) return r;
  double env = std::abs(r);
  if (env <= pp.threshold) return r;
  if (pp.kind == PreprocessorKind::nulling) return {0.0, 0.0};
  return r * (pp.threshold / env);
}

inline std::vector<cpx> apply(const Preprocessor& pp,
                              const std::vector<cpx>& samples) {
  std::vector<cpx> out(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k)
    out[k] = apply_one(pp, samples[k]);
  return out;
}

}  // namespace vofdm
