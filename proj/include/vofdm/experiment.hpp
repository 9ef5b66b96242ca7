#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vofdm/channel.hpp"
#include "vofdm/common.hpp"
#include "vofdm/csv.hpp"
#include "vofdm/metrics.hpp"
#include "vofdm/modem.hpp"
#include "vofdm/optimizer.hpp"
#include "vofdm/parallel.hpp"
#include "vofdm/preprocess.hpp"
#include "vofdm/rng.hpp"
#include "vofdm/sha256.hpp"
#include "vofdm/sweep.hpp"
#include "vofdm/version.hpp"

namespace vofdm {

inline PreprocessorKind parse_kind(const std::string& s) {
  if (s == "nulling") return PreprocessorKind::nulling;
  if (s == "clipping") return PreprocessorKind::clipping;
  detail::fail("unknown preprocessor mode: " + s);
}

struct RunResult {
  std::string csv_path;
  std::string manifest_path;
  std::uint64_t n_rows = 0;
  double duration_seconds = 0.0;
  std::string manifest_sha256;
};

// One experiment = one config = one CSV plus one manifest.  Missing config
// keys fall back to per-experiment defaults; the manifest embeds the fully
// resolved config and a hash over everything that determines the numbers.
class ExperimentConfig {
 public:
  std::string experiment;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  unsigned threads = 1;
  ModemConfig modem;  // oversampling is the PAPR measurement factor
  std::vector<std::size_t> m_values;
  double p = 0.0;
  double snr_db = 0.0;
  double sinr_db = 0.0;
  std::vector<double> p_values;
  std::vector<double> sinr_grid_db;
  std::string mode;
  ThresholdGrid threshold_grid;
  double threshold_bound = 20.0 * kSqrt2;
  bool analytic_m1 = true;
  bool r1_fourth_moment = false;
  std::size_t channel_taps = 4;
  double channel_sigma_ln = 0.5;
  double papr_lo_db = 0.0;
  double papr_hi_db = 14.0;
  double papr_step_db = 0.1;

  static const std::vector<std::pair<std::string, std::string>>& catalog() {
    static const std::vector<std::pair<std::string, std::string>> entries = {
        {"ccdf", "PAPR complementary CDF per vector-block size"},
        {"pde", "noise detection-error probability vs threshold"},
        {"snr_vs_threshold", "output SNR vs preprocessor threshold"},
        {"snr_vs_threshold_selective",
         "output SNR vs threshold over a random frequency-selective channel"},
        {"optimize_nulling",
         "optimal nulling threshold across (p, SINR, vector size)"},
        {"optimize_clipping",
         "optimal clipping threshold across (p, SINR, vector size)"},
        {"ber_vs_sinr", "BER at the per-point optimal threshold vs SINR"},
    };
    return entries;
  }

  static nlohmann::json defaults_for(const std::string& experiment) {
    nlohmann::json base = {
        {"experiment", experiment},
        {"seed", 20260819},
        {"trials", 4000},
        {"threads", 1},
        {"modem",
         {{"n_subcarriers", 256},
          {"qam_order", 4},
          {"oversampling", 1},
          {"m_values", {1, 4, 16, 64}}}},
        {"noise",
         {{"p", 0.01},
          {"snr_db", 25.0},
          {"sinr_db", -20.0},
          {"p_values", {0.01, 0.1}},
          {"sinr_grid_db", {-40.0, -35.0, -30.0, -25.0, -20.0, -15.0, -10.0}}}},
        {"preprocess",
         {{"mode", "both"},
          {"threshold", {{"lo", 0.25}, {"hi", 8.0}, {"step", 0.25}}},
          {"threshold_bound", 20.0 * kSqrt2}}},
        {"estimator", {{"r1_fourth_moment", false}, {"analytic_m1", true}}},
        {"channel", {{"taps", 4}, {"sigma_ln", 0.5}}},
        {"papr",
         {{"lo_db", 0.0}, {"hi_db", 14.0}, {"step_db", 0.1}}},
    };
    if (experiment == "ccdf") {
      base["trials"] = 100000;
    } else if (experiment == "pde") {
      base["trials"] = 20000;
      base["modem"]["m_values"] = {1, 16, 64};
    } else if (experiment == "snr_vs_threshold" ||
               experiment == "snr_vs_threshold_selective") {
      base["trials"] = 4000;
      base["modem"]["m_values"] = {1, 16, 64};
    } else if (experiment == "optimize_nulling" ||
               experiment == "optimize_clipping") {
      base["trials"] = 4000;
      base["modem"]["m_values"] = {1, 16, 32, 64};
      base["preprocess"]["threshold"] = {{"lo", 0.05}, {"hi", 8.0}, {"step", 0.05}};
      base["preprocess"]["mode"] =
          experiment == "optimize_nulling" ? "nulling" : "clipping";
      base["estimator"]["analytic_m1"] = false;
    } else if (experiment == "ber_vs_sinr") {
      base["trials"] = 1000;
      base["modem"]["m_values"] = {1, 64};
      base["noise"]["p_values"] = {0.1};
      base["preprocess"]["mode"] = "clipping";
      base["estimator"]["analytic_m1"] = false;
    } else {
      std::string known;
      for (const auto& [name, desc] : catalog()) known += " " + name;
      detail::fail("unknown experiment: " + experiment + " (known:" + known +
                   ")");
    }
    return base;
  }

  static std::uint64_t get_u64(const nlohmann::json& parent, const char* key) {
    const nlohmann::json& v = parent.at(key);
    detail::require(v.is_number_unsigned() ||
                        (v.is_number_integer() && v.get<std::int64_t>() >= 0),
                    std::string(key) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  static ExperimentConfig from_json(const nlohmann::json& user) {
    detail::require(user.is_object(), "config must be a JSON object");
    detail::require(user.contains("experiment"),
                    "config needs an \"experiment\" field");
    nlohmann::json resolved = defaults_for(user.at("experiment"));
    resolved.merge_patch(user);

    ExperimentConfig cfg;
    cfg.raw_ = resolved;
    cfg.experiment = resolved.at("experiment");
    cfg.seed = get_u64(resolved, "seed");
    cfg.trials = get_u64(resolved, "trials");
    cfg.threads = static_cast<unsigned>(get_u64(resolved, "threads"));
    const nlohmann::json& jm = resolved.at("modem");
    cfg.modem.n_subcarriers = get_u64(jm, "n_subcarriers");
    cfg.modem.vb_size = 1;
    cfg.modem.qam_order = get_u64(jm, "qam_order");
    cfg.modem.oversampling = get_u64(jm, "oversampling");
    cfg.m_values = jm.at("m_values").get<std::vector<std::size_t>>();
    const nlohmann::json& jn = resolved.at("noise");
    cfg.p = jn.at("p");
    cfg.snr_db = jn.at("snr_db");
    cfg.sinr_db = jn.at("sinr_db");
    cfg.p_values = jn.at("p_values").get<std::vector<double>>();
    cfg.sinr_grid_db = jn.at("sinr_grid_db").get<std::vector<double>>();
    const nlohmann::json& jp = resolved.at("preprocess");
    cfg.mode = jp.at("mode");
    cfg.threshold_grid = {jp.at("threshold").at("lo"),
                          jp.at("threshold").at("hi"),
                          jp.at("threshold").at("step")};
    cfg.threshold_bound = jp.at("threshold_bound");
    const nlohmann::json& je = resolved.at("estimator");
    cfg.analytic_m1 = je.at("analytic_m1");
    cfg.r1_fourth_moment = je.at("r1_fourth_moment");
    const nlohmann::json& jc = resolved.at("channel");
    cfg.channel_taps = get_u64(jc, "taps");
    cfg.channel_sigma_ln = jc.at("sigma_ln");
    const nlohmann::json& jg = resolved.at("papr");
    cfg.papr_lo_db = jg.at("lo_db");
    cfg.papr_hi_db = jg.at("hi_db");
    cfg.papr_step_db = jg.at("step_db");
    return cfg;
  }

  const nlohmann::json& resolved() const { return raw_; }

  // Human-readable problems; empty means runnable.
  std::vector<std::string> validate() const {
    std::vector<std::string> issues;
    auto check_probability = [&](double value) {
      if (!(value >= 0.0 && value <= 1.0))
        issues.push_back("probability out of range: " + std::to_string(value));
    };

    if (trials < 1) issues.push_back("trials must be >= 1");
    if (m_values.empty()) issues.push_back("empty vector-size list");
    for (std::size_t m : m_values) {
      if (m == 0 || modem.n_subcarriers % m != 0) {
        issues.push_back("M must divide N (m=" + std::to_string(m) +
                         ", n=" + std::to_string(modem.n_subcarriers) + ")");
      }
    }
    ModemConfig probe = modem;
    probe.vb_size = modem.n_subcarriers;
    try {
      probe.validate();
    } catch (const std::exception& e) {
      issues.push_back(e.what());
    }

    check_probability(p);
    if (p_values.empty()) issues.push_back("empty impulse-probability list");
    for (double value : p_values) check_probability(value);
    if (sinr_grid_db.empty()) issues.push_back("empty SINR grid");
    if (!std::isfinite(std::pow(10.0, -snr_db / 10.0)))
      issues.push_back("snr_db gives a non-finite background variance");
    if (!std::isfinite(std::pow(10.0, -sinr_db / 10.0)))
      issues.push_back("sinr_db gives a non-finite impulse variance");
    for (double s : sinr_grid_db)
      if (!std::isfinite(std::pow(10.0, -s / 10.0)))
        issues.push_back("sinr_db gives a non-finite impulse variance");

    if (mode != "nulling" && mode != "clipping" && mode != "both")
      issues.push_back("unknown preprocessor mode: " + mode);
    if (experiment == "ber_vs_sinr" && mode == "both")
      issues.push_back("ber_vs_sinr needs a single preprocessor mode");

    try {
      std::vector<double> grid = threshold_grid.materialize();
      if (grid.back() > threshold_bound)
        issues.push_back("threshold grid exceeds the supported envelope range");
    } catch (const std::exception& e) {
      issues.push_back(e.what());
    }

    if (channel_taps < 1 || channel_taps > modem.n_subcarriers)
      issues.push_back("channel taps out of range");
    if (!(channel_sigma_ln >= 0.0) || !std::isfinite(channel_sigma_ln))
      issues.push_back("sigma_ln must be finite and >= 0");

    if (!(papr_step_db > 0.0) || papr_hi_db < papr_lo_db)
      issues.push_back("PAPR grid is empty or descending");
    return issues;
  }

  RunResult run(const std::string& out_dir) const {
    std::vector<std::string> issues = validate();
    if (!issues.empty()) {
      std::string joined = "invalid config:";
      for (const std::string& issue : issues) joined += "\n  " + issue;
      detail::fail(joined);
    }
    const auto t0 = std::chrono::steady_clock::now();
    CsvWriter csv;
    if (experiment == "ccdf") {
      run_ccdf(csv);
    } else if (experiment == "pde") {
      run_pde(csv);
    } else if (experiment == "snr_vs_threshold") {
      run_snr_curves(csv, false);
    } else if (experiment == "snr_vs_threshold_selective") {
      run_snr_curves(csv, true);
    } else if (experiment == "optimize_nulling" ||
               experiment == "optimize_clipping") {
      run_optimize(csv);
    } else {
      run_ber(csv);
    }
    const double duration =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string csv_name = experiment + ".csv";
    const std::string manifest_name = experiment + ".manifest.json";

    nlohmann::json manifest;
    manifest["artifact"] = kArtifactName;
    manifest["version"] = kVersion;
    manifest["experiment"] = experiment;
    manifest["seed"] = seed;
    manifest["config"] = raw_;
    manifest["columns"] = csv.header_names();
    manifest["n_rows"] = csv.n_rows();
    manifest["output_csv"] = csv_name;
    manifest["threads"] = threads;
    manifest["duration_seconds"] = duration;

    // The hash covers everything that determines the numbers; wall time and
    // thread count cannot change them, so reruns hash identically.
    nlohmann::json hashed = manifest;
    hashed.erase("duration_seconds");
    hashed.erase("threads");
    hashed["config"].erase("threads");
    const std::string digest = sha256_hex(hashed.dump());
    manifest["manifest_sha256"] = digest;
    csv.set_comment("manifest_sha256=" + digest);

    const std::string csv_path = (fs::path(out_dir) / csv_name).string();
    const std::string manifest_path =
        (fs::path(out_dir) / manifest_name).string();
    csv.write_file(csv_path);
    std::ofstream mf(manifest_path, std::ios::binary);
    detail::require(mf.good(), "cannot open output file: " + manifest_path);
    mf << manifest.dump(2) << '\n';
    detail::require(mf.good(), "write failed: " + manifest_path);
    return {csv_path, manifest_path, csv.n_rows(), duration, digest};
  }

 private:
  std::vector<PreprocessorKind> kinds() const {
    if (mode == "both")
      return {PreprocessorKind::nulling, PreprocessorKind::clipping};
    return {parse_kind(mode)};
  }

  void run_ccdf(CsvWriter& csv) const {
    csv.header({"m", "papr_db", "ccdf", "n_exceed", "low_confidence"});
    std::vector<double> grid_db, grid_lin;
    const std::size_t points = static_cast<std::size_t>(std::floor(
                                   (papr_hi_db - papr_lo_db) / papr_step_db +
                                   1e-9)) +
                               1;
    for (std::size_t k = 0; k < points; ++k) {
      grid_db.push_back(papr_lo_db + static_cast<double>(k) * papr_step_db);
      grid_lin.push_back(from_db(grid_db.back()));
    }
    const RngStream root(seed, 0);
    for (std::size_t mi = 0; mi < m_values.size(); ++mi) {
      ModemConfig mc = modem;
      mc.vb_size = m_values[mi];
      mc.validate();
      const std::uint64_t n_blocks =
          (trials + kFramesPerBlock - 1) / kFramesPerBlock;
      std::vector<std::vector<double>> partial(n_blocks);
      const RngStream m_root = root.fork(10 + mi);
      run_blocks(n_blocks, threads, [&](std::size_t b) {
        RngStream bits = m_root.fork(b);
        const std::uint64_t first = b * kFramesPerBlock;
        const std::uint64_t n_frames =
            std::min<std::uint64_t>(kFramesPerBlock, trials - first);
        partial[b].reserve(n_frames);
        for (std::uint64_t f = 0; f < n_frames; ++f) {
          TimeFrame frame = random_frame(bits, mc);
          partial[b].push_back(papr(frame, mc.oversampling));
        }
      });
      std::vector<double> samples;
      samples.reserve(trials);
      for (const std::vector<double>& part : partial)
        samples.insert(samples.end(), part.begin(), part.end());
      CcdfCurve curve = ccdf(samples, grid_lin);
      for (std::size_t k = 0; k < curve.size(); ++k)
        csv.row(m_values[mi], grid_db[k], curve[k].ccdf, curve[k].n_exceed,
                curve[k].low_confidence);
    }
  }

  void run_pde(CsvWriter& csv) const {
    csv.header({"m", "p", "snr_db", "threshold", "p_de"});
    const std::vector<double> grid = threshold_grid.materialize();
    const RngStream root(seed, 0);
    for (std::size_t mi = 0; mi < m_values.size(); ++mi) {
      ModemConfig mc = modem;
      mc.vb_size = m_values[mi];
      for (std::size_t pi = 0; pi < p_values.size(); ++pi) {
        const NoiseConfig noise =
            NoiseConfig::from_db(p_values[pi], snr_db, sinr_db);
        RngStream rng = root.fork(1000 + mi * 101 + pi);
        std::vector<double> curve =
            p_detection_error_sweep(mc, noise, grid, trials, rng, threads);
        for (std::size_t j = 0; j < grid.size(); ++j)
          csv.row(m_values[mi], p_values[pi], snr_db, grid[j], curve[j]);
      }
    }
  }

  void run_snr_curves(CsvWriter& csv, bool selective) const {
    csv.header(
        {"mode", "m", "source", "threshold", "gamma_db", "r1", "n_samples"});
    const std::vector<double> grid = threshold_grid.materialize();
    detail::require(grid.back() <= threshold_bound,
                    "threshold grid exceeds the supported envelope range");
    const std::vector<PreprocessorKind> kind_list = kinds();
    const R1Mode mode_r1 =
        r1_fourth_moment ? R1Mode::fourth_moment : R1Mode::correlation;
    const NoiseConfig noise = NoiseConfig::from_db(p, snr_db, sinr_db);
    const RngStream root(seed, 0);
    const RngStream noise_root = root.fork(1);
    const RngStream bits_root = root.fork(2);
    const RngStream chan_root = root.fork(3);

    for (std::size_t m : m_values) {
      ModemConfig mc = modem;
      mc.vb_size = m;
      mc.validate();
      const std::uint64_t n_blocks =
          (trials + kFramesPerBlock - 1) / kFramesPerBlock;
      // All preprocessor kinds see the same realizations, and the noise and
      // channel streams do not depend on m, so curves are comparable across
      // both axes.
      std::vector<std::vector<GammaThresholdSweep>> partial(
          n_blocks, std::vector<GammaThresholdSweep>(
                        kind_list.size(),
                        GammaThresholdSweep(grid, kind_list[0], mode_r1)));
      for (std::size_t b = 0; b < n_blocks; ++b)
        for (std::size_t ki = 1; ki < kind_list.size(); ++ki)
          partial[b][ki] = GammaThresholdSweep(grid, kind_list[ki], mode_r1);
      run_blocks(n_blocks, threads, [&](std::size_t b) {
        RngStream bits = bits_root.fork(b);
        RngStream noise_rng = noise_root.fork(b);
        RngStream chan = chan_root.fork(b);
        const std::uint64_t first = b * kFramesPerBlock;
        const std::uint64_t n_frames =
            std::min<std::uint64_t>(kFramesPerBlock, trials - first);
        for (std::uint64_t f = 0; f < n_frames; ++f) {
          TimeFrame tx = random_frame(bits, mc);
          TimeFrame ref = tx;
          if (selective) {
            SelectiveChannel ch =
                sample_selective(chan, channel_taps, channel_sigma_ln);
            ref = apply_selective(tx, ch);
          }
          NoisyFrame rx = add_noise(ref, noise, noise_rng);
          for (std::size_t ki = 0; ki < kind_list.size(); ++ki)
            partial[b][ki].add(ref.samples, rx.samples);
        }
      });
      for (std::size_t ki = 0; ki < kind_list.size(); ++ki) {
        GammaThresholdSweep& total = partial[0][ki];
        for (std::size_t b = 1; b < n_blocks; ++b) total.merge(partial[b][ki]);
        std::vector<SnrEstimate> curve = total.estimates();
        for (std::size_t j = 0; j < grid.size(); ++j)
          csv.row(to_string(kind_list[ki]), m, "mc", grid[j],
                  curve[j].gamma_db, curve[j].r1, curve[j].n_samples);
      }
    }

    if (!selective && analytic_m1 &&
        std::find(m_values.begin(), m_values.end(), std::size_t{1}) !=
            m_values.end()) {
      for (PreprocessorKind kind : kind_list) {
        for (double t : grid) {
          try {
            SnrEstimate est = output_snr_analytic(t, noise, kind);
            csv.row(to_string(kind), std::size_t{1}, "analytic", t,
                    est.gamma_db, est.r1, est.n_samples);
          } catch (const std::domain_error&) {
          }
        }
      }
    }
  }

  SweepSpec sweep_spec(PreprocessorKind kind, Objective objective) const {
    SweepSpec spec;
    spec.modem = modem;
    spec.snr_db = snr_db;
    spec.kind = kind;
    spec.objective = objective;
    spec.threshold_grid = threshold_grid;
    spec.m_values = m_values;
    spec.p_values = p_values;
    spec.sinr_grid_db = sinr_grid_db;
    spec.trials_per_point = trials;
    spec.analytic_m1 = analytic_m1;
    spec.r1_mode =
        r1_fourth_moment ? R1Mode::fourth_moment : R1Mode::correlation;
    spec.threshold_bound = threshold_bound;
    spec.threads = threads;
    return spec;
  }

  void run_optimize(CsvWriter& csv) const {
    csv.header({"mode", "objective", "m", "p", "sinr_db", "optimal_threshold",
                "objective_value", "boundary", "source", "n_samples"});
    const PreprocessorKind kind = experiment == "optimize_nulling"
                                      ? PreprocessorKind::nulling
                                      : PreprocessorKind::clipping;
    SweepSpec spec = sweep_spec(kind, Objective::max_output_snr);
    std::vector<OptimumRecord> records = run_sweep(spec, RngStream(seed, 0));
    for (const OptimumRecord& rec : records)
      csv.row(to_string(rec.kind), to_string(rec.objective), rec.m, rec.p,
              rec.sinr_db, rec.optimal_threshold, rec.objective_value,
              rec.boundary, rec.analytic ? "analytic" : "mc", rec.n_samples);
  }

  void run_ber(CsvWriter& csv) const {
    csv.header({"mode", "m", "p", "sinr_db", "optimal_threshold", "ber",
                "n_bits", "boundary"});
    SweepSpec spec = sweep_spec(parse_kind(mode), Objective::min_ber);
    std::vector<OptimumRecord> records = run_sweep(spec, RngStream(seed, 0));
    for (const OptimumRecord& rec : records)
      csv.row(to_string(rec.kind), rec.m, rec.p, rec.sinr_db,
              rec.optimal_threshold, rec.objective_value, rec.n_samples,
              rec.boundary);
  }

  nlohmann::json raw_;
};

}  // namespace vofdm
