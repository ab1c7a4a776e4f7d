#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "spikebench/coding.hpp"
#include "spikebench/dataset.hpp"
#include "spikebench/error.hpp"
#include "spikebench/idx.hpp"
#include "spikebench/model.hpp"
#include "spikebench/noise.hpp"
#include "spikebench/parallel.hpp"
#include "spikebench/robustness.hpp"
#include "spikebench/simulate.hpp"
#include "spikebench/snnx.hpp"

namespace spikebench {

struct ExperimentConfig {
  std::filesystem::path model_path;
  std::filesystem::path dataset_path;
  std::filesystem::path labels_path;  // empty: derived from dataset_path
  std::size_t limit = 0;              // 0: whole dataset
  std::vector<CodingConfig> codings;  // empty: the model file's own coding
  std::vector<double> deletion_p{0.0};
  std::vector<double> jitter_sigma{0.0};
  int trials = 10;  // per noisy grid point; clean points always run once
  std::uint64_t seed = 1;
  ScaleProvenance scale_mode = ScaleProvenance::off;
  double manual_scale = 1.0;
  bool scale_biases = false;
  std::filesystem::path out_path;
  int threads = default_threads();
  bool record_timing = false;  // wall_ms is 0 unless set, keeping the CSV reproducible

  void validate() const {
    if (deletion_p.empty() || jitter_sigma.empty()) throw InvalidConfig("noise grids must be nonempty");
    if (trials < 1) throw InvalidConfig("trials must be >= 1");
    for (double p : deletion_p)
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidConfig("deletion probabilities must lie in [0, 1]");
    for (double s : jitter_sigma)
      if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidConfig("jitter sigmas must be finite and >= 0");
    if (scale_mode == ScaleProvenance::manual && (!(manual_scale > 0.0) || !std::isfinite(manual_scale)))
      throw InvalidConfig("manual weight scale must be finite and > 0");
    for (const auto& c : codings) c.validate();
  }
};

struct ResultRow {
  std::string scheme;
  int burst_duration = 1;
  double p = 0.0;
  double sigma = 0.0;
  double C = 1.0;
  int trials = 1;
  double accuracy = 0.0;
  double accuracy_se = 0.0;  // standard error over trials
  double mean_spikes = 0.0;
  double mean_latency = 0.0;
  double wall_ms = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr const char* kCsvHeader =
    "scheme,burst_duration,p,sigma,C,trials,accuracy,accuracy_se,mean_spikes,mean_latency,wall_ms";

inline std::string format_row(const ResultRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%d,%.4f,%.4f,%.6f,%d,%.6f,%.6f,%.3f,%.3f,%.1f", r.scheme.c_str(),
                r.burst_duration, r.p, r.sigma, r.C, r.trials, r.accuracy, r.accuracy_se, r.mean_spikes,
                r.mean_latency, r.wall_ms);
  return buf;
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) out += format_row(r) + "\n";
  return out;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << to_csv(rows);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("unexpected CSV header", 0);
  std::vector<ResultRow> rows;
  std::size_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 11) throw FormatError("CSV row has " + std::to_string(f.size()) + " fields", offset);
    try {
      rows.push_back({f[0], std::stoi(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stoi(f[5]),
                      std::stod(f[6]), std::stod(f[7]), std::stod(f[8]), std::stod(f[9]), std::stod(f[10])});
    } catch (const std::logic_error&) {
      throw FormatError("malformed number in CSV row", offset);
    }
    offset += line.size() + 1;
  }
  return rows;
}

inline std::vector<ResultRow> read_csv(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return parse_csv(std::string(bytes.begin(), bytes.end()));
}

inline Dataset load_dataset(const ExperimentConfig& cfg) {
  const auto labels = cfg.labels_path.empty() ? default_labels_path(cfg.dataset_path) : cfg.labels_path;
  Dataset data = load_idx(cfg.dataset_path, labels);
  if (cfg.limit > 0) data = data.head(cfg.limit);
  return data;
}

// One grid point: the base model with the point's scale plan folded in,
// evaluated over `trials` paired seeds.
inline ResultRow evaluate_point(const SnnModel& base, const Dataset& data, double p, double sigma, int trials,
                                const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.scale_mode == ScaleProvenance::auto_from_p && p >= 1.0)
    throw InvalidConfig("automatic weight scaling needs p < 1");
  ScalePlan plan = make_plan(base.coding, cfg.scale_mode, p, cfg.manual_scale);
  plan.scale_biases = cfg.scale_biases;
  const SnnModel model = base.applied_plan ? base : apply_plan(base, plan);

  NoiseConfig noise;
  noise.p = p;
  noise.sigma = sigma;
  noise.seed = cfg.seed;
  const int n_trials = noise.active() ? trials : 1;
  const EvalResult eval = batch_evaluate(model, data, noise, n_trials, cfg.threads);

  ResultRow row;
  row.scheme = std::string(to_string(model.coding.scheme));
  row.burst_duration = model.coding.burst_length();
  row.p = p;
  row.sigma = sigma;
  row.C = model.applied_plan ? model.applied_plan->C : 1.0;
  row.trials = n_trials;
  row.accuracy = eval.accuracy;
  if (n_trials > 1) {
    double var = 0.0;
    for (double a : eval.trial_accuracy) var += (a - eval.accuracy) * (a - eval.accuracy);
    row.accuracy_se = std::sqrt(var / (n_trials - 1) / n_trials);
  }
  row.mean_spikes = eval.mean_spikes;
  row.mean_latency = eval.mean_latency;
  if (cfg.record_timing)
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

// Every (coding, p, sigma) combination, rows sorted by scheme, burst
// duration, p, sigma.
inline std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  const SnnxFile file = read_snnx(cfg.model_path);
  std::vector<SnnModel> bases;
  if (cfg.codings.empty()) {
    if (!file.snn) throw InvalidConfig("model file has no coding section; pass a coding scheme");
    bases.push_back(*file.snn);
  } else {
    for (const auto& c : cfg.codings) bases.push_back(convert(file.dnn, c));
  }

  std::vector<ResultRow> rows;
  for (const auto& base : bases)
    for (double p : cfg.deletion_p)
      for (double sigma : cfg.jitter_sigma) {
        try {
          rows.push_back(evaluate_point(base, data, p, sigma, cfg.trials, cfg));
        } catch (const NumericFailure& e) {
          char where[96];
          std::snprintf(where, sizeof where, "%s p=%g sigma=%g", std::string(to_string(base.coding.scheme)).c_str(),
                        p, sigma);
          throw e.with_context(where);
        }
      }
  auto rank = [](const ResultRow& r) {
    return std::make_tuple(static_cast<int>(parse_scheme(r.scheme)), r.burst_duration, r.p, r.sigma);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  return rows;
}

inline std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
  if (!cfg.out_path.empty() && !std::ofstream(cfg.out_path, std::ios::app))
    throw IoError("cannot write '" + cfg.out_path.string() + "'");
  const Dataset data = load_dataset(cfg);
  auto rows = run_sweep(cfg, data);
  if (!cfg.out_path.empty()) write_csv(cfg.out_path, rows);
  return rows;
}

}  // namespace spikebench
