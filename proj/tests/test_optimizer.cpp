#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <limits>
#include <vector>

#include "vofdm/optimizer.hpp"

using namespace vofdm;
using Catch::Matchers::ContainsSubstring;

namespace {

SweepSpec reference_spec() {
  SweepSpec spec;
  spec.modem = ModemConfig{256, 1, 4, 1};
  spec.snr_db = 25.0;
  spec.kind = PreprocessorKind::nulling;
  spec.threshold_grid = {1.0, 10.0, 0.25};
  spec.trials_per_point = 200;
  return spec;
}

std::size_t index_of(const std::vector<double>& grid, double value) {
  return static_cast<std::size_t>(
      std::find(grid.begin(), grid.end(), value) - grid.begin());
}

}  // namespace

TEST_CASE("threshold grid materialization") {
  ThresholdGrid def;
  std::vector<double> grid = def.materialize();
  REQUIRE(grid.size() == 160);
  CHECK(grid.front() == Catch::Approx(0.05));
  CHECK(grid.back() == Catch::Approx(8.0));

  ThresholdGrid single{2.0, 2.0, 0.25};
  CHECK(single.materialize() == std::vector<double>{2.0});

  ThresholdGrid quarter{1.0, 10.0, 0.25};
  std::vector<double> q = quarter.materialize();
  REQUIRE(q.size() == 37);
  CHECK(q.back() == Catch::Approx(10.0));

  CHECK_THROWS_WITH((ThresholdGrid{0.0, 1.0, 0.1}.materialize()),
                    ContainsSubstring("positive"));
  CHECK_THROWS_WITH((ThresholdGrid{1.0, 2.0, 0.0}.materialize()),
                    ContainsSubstring("step"));
  CHECK_THROWS_WITH((ThresholdGrid{2.0, 1.0, 0.1}.materialize()),
                    ContainsSubstring("below lower bound"));
}

TEST_CASE("closed-form path finds the model optimum") {
  SweepSpec spec = reference_spec();
  spec.analytic_m1 = true;
  RngStream rng(101, 0);

  ObjectiveCurve curve;
  OptimumRecord null_rec = optimize_threshold({1, 0.01, -20.0}, spec, rng, &curve);
  CHECK(null_rec.analytic);
  CHECK(null_rec.n_samples == 0);
  CHECK_FALSE(null_rec.boundary);
  CHECK(null_rec.optimal_threshold == Catch::Approx(4.25));
  CHECK(null_rec.objective_value ==
        Catch::Approx(17.361688490521917).epsilon(1e-12));
  REQUIRE(curve.thresholds.size() == 37);
  std::size_t idx = index_of(curve.thresholds, null_rec.optimal_threshold);
  CHECK(curve.values[idx] == null_rec.objective_value);
  for (std::size_t j = 0; j < curve.values.size(); ++j)
    if (curve.valid[j]) CHECK(curve.values[j] <= null_rec.objective_value);

  spec.kind = PreprocessorKind::clipping;
  OptimumRecord clip_rec = optimize_threshold({1, 0.01, -20.0}, spec, rng);
  CHECK(clip_rec.optimal_threshold == Catch::Approx(2.5));
  CHECK(clip_rec.objective_value ==
        Catch::Approx(13.215938246736819).epsilon(1e-12));
}

TEST_CASE("grid refinement stays within one coarse step") {
  SweepSpec spec = reference_spec();
  spec.analytic_m1 = true;
  RngStream rng(102, 0);
  for (PreprocessorKind kind :
       {PreprocessorKind::nulling, PreprocessorKind::clipping}) {
    spec.kind = kind;
    spec.threshold_grid = {1.0, 10.0, 0.25};
    double coarse =
        optimize_threshold({1, 0.01, -20.0}, spec, rng).optimal_threshold;
    spec.threshold_grid = {1.0, 10.0, 0.025};
    double fine =
        optimize_threshold({1, 0.01, -20.0}, spec, rng).optimal_threshold;
    CHECK(std::abs(coarse - fine) <= 0.25 + 1e-9);
  }
}

TEST_CASE("closed-form failure at every grid point raises") {
  SweepSpec spec = reference_spec();
  spec.analytic_m1 = true;
  spec.snr_db = 200.0;
  spec.threshold_grid = {10.0, 12.0, 2.0};
  RngStream rng(103, 0);
  CHECK_THROWS_WITH(optimize_threshold({1, 0.0, 0.0}, spec, rng),
                    ContainsSubstring("every grid threshold"));
}

TEST_CASE("ties resolve to the smallest threshold") {
  SweepSpec spec;
  spec.modem = ModemConfig{256, 1, 4, 1};
  spec.modem.vb_size = 256;
  spec.snr_db = std::numeric_limits<double>::infinity();
  spec.kind = PreprocessorKind::clipping;
  spec.objective = Objective::min_ber;
  spec.threshold_grid = {10.0, 12.0, 1.0};
  spec.trials_per_point = 20;
  RngStream rng(104, 0);
  ObjectiveCurve curve;
  OptimumRecord rec = optimize_threshold({256, 0.0, 0.0}, spec, rng, &curve);
  CHECK(curve.values == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(rec.optimal_threshold == 10.0);
  CHECK(rec.objective_value == 0.0);
  CHECK(rec.boundary);
}

TEST_CASE("Monte-Carlo optimum is the argmax of its curve") {
  SweepSpec spec = reference_spec();
  spec.modem.vb_size = 4;
  spec.threshold_grid = {0.5, 6.0, 0.5};
  RngStream rng(105, 0);
  ObjectiveCurve curve;
  OptimumRecord rec = optimize_threshold({4, 0.1, -20.0}, spec, rng, &curve);
  CHECK_FALSE(rec.analytic);
  CHECK(rec.n_samples == 200 * 256);
  REQUIRE(curve.thresholds.size() == 12);
  double best = *std::max_element(curve.values.begin(), curve.values.end());
  CHECK(rec.objective_value == best);
  std::size_t idx = index_of(curve.thresholds, rec.optimal_threshold);
  CHECK(curve.values[idx] == rec.objective_value);
  CHECK(rec.boundary == (idx == 0 || idx + 1 == curve.thresholds.size()));
  CHECK(rec.kind == PreprocessorKind::nulling);
  CHECK(rec.objective == Objective::max_output_snr);
}

TEST_CASE("minimum-BER objective returns the lowest measured rate") {
  SweepSpec spec = reference_spec();
  spec.objective = Objective::min_ber;
  spec.kind = PreprocessorKind::clipping;
  spec.threshold_grid = {0.5, 8.0, 1.5};
  spec.trials_per_point = 150;
  RngStream rng(106, 0);
  ObjectiveCurve curve;
  OptimumRecord rec = optimize_threshold({1, 0.1, -20.0}, spec, rng, &curve);
  CHECK(rec.n_samples == 150 * 512);
  double best = *std::min_element(curve.values.begin(), curve.values.end());
  CHECK(rec.objective_value == best);
  for (double v : curve.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 0.5);
  }
}

TEST_CASE("a sweep is reproducible from its seed") {
  SweepSpec spec = reference_spec();
  spec.m_values = {1, 4};
  spec.p_values = {0.1};
  spec.sinr_grid_db = {-20.0, -10.0};
  spec.threshold_grid = {1.0, 6.0, 1.0};
  spec.trials_per_point = 100;
  std::vector<OptimumRecord> a = run_sweep(spec, RngStream(7, 9));
  std::vector<OptimumRecord> b = run_sweep(spec, RngStream(7, 9));
  std::vector<OptimumRecord> c = run_sweep(spec, RngStream(8, 9));
  REQUIRE(a.size() == 4);
  REQUIRE(b.size() == 4);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].optimal_threshold == b[i].optimal_threshold);
    CHECK(a[i].objective_value == b[i].objective_value);
    any_diff = any_diff || a[i].objective_value != c[i].objective_value;
  }
  CHECK(any_diff);
}

TEST_CASE("sweep records preserve the declared tuple order") {
  SweepSpec spec = reference_spec();
  spec.m_values = {1, 4};
  spec.p_values = {0.1, 0.2};
  spec.sinr_grid_db = {-20.0, -10.0};
  spec.threshold_grid = {2.0, 4.0, 2.0};
  spec.trials_per_point = 30;
  std::vector<OptimumRecord> records = run_sweep(spec, RngStream(11, 0));
  REQUIRE(records.size() == 8);
  std::size_t i = 0;
  for (std::size_t m : {1, 4}) {
    for (double p : {0.1, 0.2}) {
      for (double sinr : {-20.0, -10.0}) {
        CHECK(records[i].m == m);
        CHECK(records[i].p == p);
        CHECK(records[i].sinr_db == sinr);
        ++i;
      }
    }
  }
}

TEST_CASE("sweep errors identify the failing grid point") {
  SweepSpec spec = reference_spec();
  spec.analytic_m1 = true;
  spec.snr_db = 200.0;
  spec.threshold_grid = {10.0, 12.0, 2.0};
  spec.m_values = {1};
  spec.p_values = {0.0};
  spec.sinr_grid_db = {-20.0};
  CHECK_THROWS_WITH(run_sweep(spec, RngStream(12, 0)),
                    ContainsSubstring("failed at m=1"));
}

TEST_CASE("sweep specification validation") {
  SweepSpec spec = reference_spec();
  spec.threshold_grid = {1.0, 40.0, 1.0};
  CHECK_THROWS_WITH(spec.validate(),
                    ContainsSubstring("supported envelope range"));
  spec = reference_spec();
  spec.trials_per_point = 0;
  CHECK_THROWS_WITH(spec.validate(), ContainsSubstring("trials_per_point"));
  spec = reference_spec();
  spec.m_values = {};
  CHECK_THROWS_WITH(spec.validate(), ContainsSubstring("vector-size"));
  spec = reference_spec();
  spec.m_values = {3};
  CHECK_THROWS_WITH(spec.validate(), ContainsSubstring("divide"));
}
