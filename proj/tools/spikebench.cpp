#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spikebench/spikebench.hpp"

using namespace spikebench;

namespace {

struct CodingFlags {
  std::vector<std::string> schemes;
  int timesteps = 0;
  double theta = 0.0;
  int phase_period = 0;
  int burst_cap = 0;
  double tau = 0.0;
  int burst_duration = 0;
  double theta_decay = 0.0;
  CLI::App* app = nullptr;

  void add(CLI::App* sub, bool many) {
    app = sub;
    auto* opt = sub->add_option("--coding", schemes, "rate|phase|burst|ttfs|ttas")
                    ->check(CLI::IsMember({"rate", "phase", "burst", "ttfs", "ttas"}));
    if (!many) opt->expected(1);
    sub->add_option("--timesteps", timesteps, "window length T");
    sub->add_option("--theta", theta, "firing threshold");
    sub->add_option("--phase-period", phase_period, "phase period K");
    sub->add_option("--burst-cap", burst_cap, "max spikes per step (burst)");
    sub->add_option("--tau", tau, "kernel decay constant (ttfs/ttas)");
    sub->add_option("--burst-duration", burst_duration, "t_a (ttas)");
    sub->add_option("--theta-decay", theta_decay, "threshold decay constant (ttfs/ttas)");
  }

  bool given(const char* name) const { return app->count(name) > 0; }

  CodingConfig make(const std::string& scheme) const {
    CodingConfig c = default_config(parse_scheme(scheme));
    if (given("--timesteps")) c.timesteps = timesteps;
    if (given("--theta")) c.theta = theta;
    if (given("--phase-period")) c.phase_period = phase_period;
    if (given("--burst-cap")) c.burst_cap = burst_cap;
    if (given("--tau")) c.tau = tau;
    if (given("--burst-duration")) c.burst_duration = burst_duration;
    if (given("--theta-decay")) c.theta_decay = theta_decay;
    c.validate();
    return c;
  }

  std::vector<CodingConfig> all() const {
    std::vector<CodingConfig> out;
    for (const auto& s : schemes) out.push_back(make(s));
    return out;
  }
};

// "auto", "off" or a positive number.
void parse_weight_scale(const std::string& text, ScaleProvenance& mode, double& manual) {
  if (text == "auto") {
    mode = ScaleProvenance::auto_from_p;
  } else if (text == "off") {
    mode = ScaleProvenance::off;
  } else {
    try {
      std::size_t used = 0;
      manual = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::logic_error&) {
      throw InvalidConfig("--weight-scale must be auto, off or a number, got '" + text + "'");
    }
    mode = ScaleProvenance::manual;
  }
}

void print_rows(const std::vector<ResultRow>& rows) { std::cout << to_csv(rows); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic spiking network simulator and noise-robustness sweeps"};
  app.set_config("--config", "", "TOML/INI file holding any flag; explicit flags win");
  app.require_subcommand(1);

  std::string model, dataset, labels, out, weight_scale = "off";
  std::vector<double> deletion_p{0.0}, jitter_sigma{0.0}, grid;
  int trials = 10;
  std::uint64_t seed = 1;
  std::size_t limit = 0;
  int threads = default_threads();
  bool timing = false, scale_biases = false;
  std::vector<int> sizes{784, 64, 32, 10};

  auto add_data = [&](CLI::App* s) {
    s->add_option("--dataset", dataset, "IDX image file")->required();
    s->add_option("--labels", labels, "IDX label file (default: derived from --dataset)");
    s->add_option("--limit", limit, "use only the first N samples");
  };
  auto add_noise = [&](CLI::App* s) {
    s->add_option("--deletion-p", deletion_p, "deletion probability (repeatable)");
    s->add_option("--jitter-sigma", jitter_sigma, "jitter deviation in timesteps (repeatable)");
    s->add_option("--trials", trials, "seeds per noisy point");
    s->add_option("--seed", seed, "base RNG seed");
    s->add_option("--weight-scale", weight_scale, "auto|off|<float>");
    s->add_flag("--scale-biases", scale_biases, "multiply biases by C as well");
    s->add_option("--threads", threads, "worker threads (SPIKEBENCH_THREADS caps)");
    s->add_flag("--timing", timing, "record wall_ms (breaks byte-identical output)");
  };

  auto* convert_cmd = app.add_subcommand("convert", "attach a coding, thresholds and scale plan to a DNN");
  CodingFlags convert_coding;
  convert_cmd->add_option("--model", model, "SNNX manifest")->required();
  convert_coding.add(convert_cmd, false);
  convert_cmd->add_option("--deletion-p", deletion_p, "deletion probability for --weight-scale auto");
  convert_cmd->add_option("--weight-scale", weight_scale, "auto|off|<float>");
  convert_cmd->add_flag("--scale-biases", scale_biases, "multiply biases by C as well");
  convert_cmd->add_option("--out", out, "output SNNX manifest")->required();

  auto* search_cmd = app.add_subcommand("threshold-search", "grid-search the threshold on calibration data");
  CodingFlags search_coding;
  search_cmd->add_option("--model", model, "SNNX manifest")->required();
  add_data(search_cmd);
  search_coding.add(search_cmd, false);
  search_cmd->add_option("--grid", grid, "candidate thresholds (repeatable)")->required();
  search_cmd->add_option("--threads", threads, "worker threads");
  search_cmd->add_option("--out", out, "write the converted model with the chosen threshold");

  auto* run_cmd = app.add_subcommand("run", "evaluate one coding at one noise point");
  CodingFlags run_coding;
  run_cmd->add_option("--model", model, "SNNX manifest")->required();
  add_data(run_cmd);
  run_coding.add(run_cmd, false);
  add_noise(run_cmd);
  run_cmd->add_option("--out", out, "CSV output (default: stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate codings over a noise grid");
  CodingFlags sweep_coding;
  sweep_cmd->add_option("--model", model, "SNNX manifest")->required();
  add_data(sweep_cmd);
  sweep_coding.add(sweep_cmd, true);
  add_noise(sweep_cmd);
  sweep_cmd->add_option("--out", out, "CSV output (default: stdout)");

  auto* toy_cmd = app.add_subcommand("make-toy", "write a seeded synthetic MLP");
  toy_cmd->add_option("--sizes", sizes, "layer sizes, inputs first")->delimiter(',');
  toy_cmd->add_option("--seed", seed, "RNG seed");
  toy_cmd->add_option("--out", out, "output SNNX manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  threads = capped_threads(threads);
  try {
    if (toy_cmd->parsed()) {
      write_snnx(out, generate_toy_model(sizes, seed));
    } else if (convert_cmd->parsed()) {
      if (convert_coding.schemes.empty()) throw InvalidConfig("convert needs --coding");
      const CodingConfig cfg = convert_coding.make(convert_coding.schemes.front());
      ScaleProvenance mode = ScaleProvenance::off;
      double manual = 1.0;
      parse_weight_scale(weight_scale, mode, manual);
      if (deletion_p.size() != 1) throw InvalidConfig("convert takes a single --deletion-p");
      ScalePlan plan = make_plan(cfg, mode, deletion_p.front(), manual);
      plan.scale_biases = scale_biases;
      write_snnx(out, apply_plan(convert(read_dnn(model), cfg), plan));
    } else if (search_cmd->parsed()) {
      if (search_coding.schemes.empty()) throw InvalidConfig("threshold-search needs --coding");
      const CodingConfig cfg = search_coding.make(search_coding.schemes.front());
      ExperimentConfig ec;
      ec.dataset_path = dataset;
      ec.labels_path = labels;
      ec.limit = limit;
      const ThresholdChoice choice = threshold_search(convert(read_dnn(model), cfg), load_dataset(ec), grid, threads);
      std::printf("theta=%g accuracy=%.6f mean_spikes=%.3f\n", choice.theta, choice.accuracy, choice.mean_spikes);
      if (!out.empty()) {
        CodingConfig chosen = cfg;
        chosen.theta = choice.theta;
        write_snnx(out, convert(read_dnn(model), chosen));
      }
    } else {
      const bool sweeping = sweep_cmd->parsed();
      const CodingFlags& flags = sweeping ? sweep_coding : run_coding;
      if (!sweeping && (deletion_p.size() != 1 || jitter_sigma.size() != 1))
        throw InvalidConfig("run takes one --deletion-p and one --jitter-sigma; use sweep for grids");
      ExperimentConfig ec;
      ec.model_path = model;
      ec.dataset_path = dataset;
      ec.labels_path = labels;
      ec.limit = limit;
      ec.codings = flags.all();
      ec.deletion_p = deletion_p;
      ec.jitter_sigma = jitter_sigma;
      ec.trials = trials;
      ec.seed = seed;
      parse_weight_scale(weight_scale, ec.scale_mode, ec.manual_scale);
      ec.scale_biases = scale_biases;
      ec.out_path = out;
      ec.threads = threads;
      ec.record_timing = timing;
      const auto rows = run_sweep(ec);
      if (out.empty()) print_rows(rows);
    }
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
