// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace spikebench;
using namespace testutil;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Moments {
  double mean = 0.0, se = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) m.mean += x;
  m.mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.se = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
  return m;
}

// Paired differences a - b; a single-entry side (a clean run) pairs with every trial.
Moments paired(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[a.size() == 1 ? 0 : i] - b[b.size() == 1 ? 0 : i];
  return moments(d);
}

// "a beats b": paired mean difference above 3 standard errors.
bool beats(const Moments& d) { return d.mean > 3.0 * d.se && d.mean > 0.0; }
// "b is not above a": no increase beyond 3 standard errors.
bool not_above(const Moments& d) { return d.mean >= -3.0 * d.se; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Report {
 public:
  void record(int criterion, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    all_ &= ok;
  }
  void run(int criterion, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      record(criterion, false, std::string("exception: ") + e.what());
    }
  }
  bool all() const { return all_; }

 private:
  bool all_ = true;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CodingConfig config_for(Scheme s, int t_a = 4) {
  auto c = default_config(s);
  if (s == Scheme::ttas) c.burst_duration = t_a;
  return c;
}

const int kThreads = default_threads();

// Per-trial accuracies of one scheme under one noise condition, paired seeds.
std::vector<double> accuracies(const DnnModel& dnn, const Dataset& data, const CodingConfig& c, double p,
                               double sigma, bool scaled, int trials) {
  auto plan = make_plan(c, scaled ? ScaleProvenance::auto_from_p : ScaleProvenance::off, p);
  const auto model = apply_plan(convert(dnn, c), plan);
  NoiseConfig noise;
  noise.p = p;
  noise.sigma = sigma;
  noise.seed = 2024;
  return batch_evaluate(model, data, noise, noise.active() ? trials : 1, kThreads).trial_accuracy;
}

void conversion_oracle(Report& report, const DnnModel& dnn, const Dataset& mnist) {
  const auto start = Clock::now();
  auto c = default_config(Scheme::rate);
  c.timesteps = 1000;
  c.theta = 0.4;
  const Simulator sim(convert(dnn, c));
  const Dataset data = mnist.head(100);
  std::vector<SimResult> runs(data.size());
  parallel_for(data.size(), kThreads, [&](std::size_t i) { runs[i] = sim.run(data.sample(i), NoiseConfig{}, 0); });
  int agree = 0;
  double max_err = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto ref = dnn_forward(dnn, data.sample(i));
    agree += runs[i].predicted == output_layer_readout(ref.logits);
    for (std::size_t l = 0; l + 1 < ref.activations.size(); ++l)
      for (std::size_t j = 0; j < ref.activations[l].size(); ++j)
        max_err = std::max(max_err, std::abs(runs[i].activations[l][j] - ref.activations[l][j]));
  }
  const double secs = seconds_since(start);
  report.record(1, agree >= 95 && max_err <= 0.01 && secs <= 60.0,
                fmt("argmax agreement %d/100 (need >= 95), max hidden activation error %.5f (need <= 0.01), "
                    "%.1f s (need <= 60)",
                    agree, max_err, secs));
}

void deletion_expectation(Report& report) {
  const auto c = default_config(Scheme::rate);
  bool ok = true;
  std::string detail;
  for (double A : {0.25, 0.6, 0.93}) {
    const auto clean = encode(A, c);
    const double a = decode(clean, c);
    for (double p : {0.2, 0.5, 0.8}) {
      Rng rng(derive_seed(static_cast<std::uint64_t>(A * 1000), static_cast<std::uint64_t>(p * 10)));
      std::vector<double> xs(1000);
      for (auto& x : xs) x = decode(delete_spikes(clean, p, rng), c);
      const auto m = moments(xs);
      const double z = std::abs(m.mean - (1 - p) * a) / m.se;
      ok &= z <= 3.0;
      detail += fmt(" A=%.2f p=%.1f |z|=%.2f;", a, p, z);
    }
  }
  report.record(2, ok, "rate decoded mean vs (1-p)A over 1000 trials, need |z| <= 3:" + detail);
}

void scaling_restoration(Report& report) {
  bool ok = true;
  std::string detail;
  const auto rate = default_config(Scheme::rate);
  for (double A : {0.25, 0.6, 0.93}) {
    const double a = decode(encode(A, rate), rate);
    for (double p : {0.2, 0.5, 0.8}) {
      const double C = choose_scale_factor(p);
      Rng rng(derive_seed(static_cast<std::uint64_t>(A * 1000) + 7, static_cast<std::uint64_t>(p * 10)));
      std::vector<double> xs(1000);
      for (auto& x : xs) x = C * decode(delete_spikes(encode(A, rate), p, rng), rate);
      const auto m = moments(xs);
      const double z = std::abs(m.mean - a) / m.se;
      ok &= z <= 3.0;
      detail += fmt(" A=%.2f p=%.1f |z|=%.2f;", a, p, z);
    }
  }
  const auto ttfs = default_config(Scheme::ttfs);
  long outside = 0, zeros = 0, full = 0;
  for (double A : {0.95, 0.6, 0.3, 0.1, 0.02}) {
    const auto clean = encode(A, ttfs);
    const double a = decode(clean, ttfs);
    for (double p : {0.2, 0.5, 0.8}) {
      const double C = choose_scale_factor(p);
      Rng rng(derive_seed(static_cast<std::uint64_t>(A * 1000), 99));
      for (int i = 0; i < 1000; ++i) {
        const double v = C * decode(delete_spikes(clean, p, rng), ttfs);
        if (v == 0.0)
          ++zeros;
        else if (v == C * a)
          ++full;
        else
          ++outside;
      }
    }
  }
  ok &= outside == 0;
  report.record(3, ok,
                "rate C-scaled mean vs A, need |z| <= 3:" + detail +
                    fmt(" ttfs per-trial values: %ld zero, %ld equal C*A, %ld other (need 0 other)", zeros, full,
                        outside));
}

void ttas_equivalences(Report& report, const DnnModel& dnn) {
  // (a) event identity of TTAS(1) and TTFS on random inputs, clean and noisy.
  auto ttas1 = config_for(Scheme::ttas, 1);
  const Simulator a_sim(convert(dnn, ttas1)), f_sim(convert(dnn, default_config(Scheme::ttfs)));
  std::mt19937_64 gen(4);
  int identical = 0;
  SimOptions keep;
  keep.keep_trains = true;
  for (int i = 0; i < 100; ++i) {
    const auto x = random_input(dnn.input_size(), gen);
    NoiseConfig noise;
    if (i % 2) {
      noise.p = 0.3;
      noise.sigma = 1.0;
    }
    const auto ra = a_sim.run(x, noise, 1000 + i, keep), rf = f_sim.run(x, noise, 1000 + i, keep);
    identical += ra.trains == rf.trains && ra.output == rf.output;
  }
  // (b) clean decode with the burst factor equals the single-spike decode.
  double max_decode_err = 0.0;
  const auto ttfs = default_config(Scheme::ttfs);
  for (int t_a : {2, 3, 4, 6, 8})
    for (int k = 1; k <= 200; ++k) {
      const double v = k / 200.0;
      const auto c = config_for(Scheme::ttas, t_a);
      max_decode_err = std::max(max_decode_err, std::abs(decode(encode(v, c), c) - decode(encode(v, ttfs), ttfs)));
    }
  // (c) the burst factor closed form.
  const double ca = ttas_scale_factor(PscKernel::exponential(4.0), 2);
  const double ca_err = std::abs(ca - 1.0 / (1.0 + std::exp(-0.25)));
  report.record(4, identical == 100 && max_decode_err <= 1e-6 && ca_err <= 1e-12,
                fmt("(a) ttas(1) event-identical to ttfs on %d/100 inputs; (b) max decode difference %.2e "
                    "(need <= 1e-6); (c) C_A(tau=4, t_a=2) error %.2e (need <= 1e-12)",
                    identical, max_decode_err, ca_err));
}

void jitter_properties(Report& report, const DnnModel& dnn, const Dataset& mnist) {
  std::mt19937_64 gen(12);
  Rng rng(5);
  int count_mismatch = 0, identity_mismatch = 0;
  for (int i = 0; i < 2000; ++i) {
    SpikeTrain s(60);
    const int events = 1 + static_cast<int>(gen() % 30);
    for (int k = 0; k < events; ++k) s.add(static_cast<int>(gen() % 60), 1 + static_cast<int>(gen() % 3));
    const double sigma = 0.25 * static_cast<double>(1 + gen() % 20);
    count_mismatch += jitter_spikes(s, sigma, 60, rng).total() != s.total();
    identity_mismatch += !(jitter_spikes(s, 0.0, 60, rng) == s);
  }
  const auto c = default_config(Scheme::rate);
  const double clean = accuracies(dnn, mnist, c, 0.0, 0.0, false, 1)[0];
  const double noisy = moments(accuracies(dnn, mnist, c, 0.0, 2.0, false, 10)).mean;
  const double gap = std::abs(noisy - clean);
  report.record(5, count_mismatch == 0 && identity_mismatch == 0 && gap <= 0.01,
                fmt("count changed in %d/2000 trains, sigma=0 not identity in %d/2000; rate accuracy clean %.4f vs "
                    "sigma=2 %.4f, gap %.4f (need <= 0.01)",
                    count_mismatch, identity_mismatch, clean, noisy, gap));
}

void robustness_trends(Report& report, const DnnModel& dnn, const Dataset& mnist) {
  const int trials = 10;
  bool ok = true;
  std::string detail;
  const std::vector<double> ps{0.0, 0.2, 0.5, 0.8};
  for (Scheme s : {Scheme::rate, Scheme::phase, Scheme::burst, Scheme::ttfs, Scheme::ttas}) {
    const auto c = config_for(s);
    std::vector<std::vector<double>> acc;
    for (double p : ps) acc.push_back(accuracies(dnn, mnist, c, p, 0.0, false, trials));
    std::string name(to_string(s));
    if (s == Scheme::ttas) name += "(4)";
    detail += " " + name + " acc";
    for (std::size_t k = 0; k < ps.size(); ++k) {
      detail += fmt(" %.3f", moments(acc[k]).mean);
      if (k > 0) {
        const auto d = paired(acc[k - 1], acc[k]);
        ok &= not_above(d);
        detail += fmt("(z=%.1f)", d.se > 0 ? d.mean / d.se : 0.0);
      }
    }
    const auto d = paired(accuracies(dnn, mnist, c, 0.5, 0.0, true, trials), acc[2]);
    ok &= beats(d);
    detail += fmt(", scaling gain at p=0.5 %+.3f z=%.1f;", d.mean, d.mean / d.se);
  }
  const auto ttas = config_for(Scheme::ttas), ttfs = default_config(Scheme::ttfs);
  const auto del = paired(accuracies(dnn, mnist, ttas, 0.5, 0.0, true, trials),
                          accuracies(dnn, mnist, ttfs, 0.5, 0.0, true, trials));
  const auto jit = paired(accuracies(dnn, mnist, ttas, 0.0, 2.0, false, trials),
                          accuracies(dnn, mnist, ttfs, 0.0, 2.0, false, trials));
  ok &= beats(del) && beats(jit);
  detail += fmt(" ttas(4)+scaling minus ttfs+scaling at p=0.5 %+.3f z=%.1f; ttas(4) minus ttfs at sigma=2 %+.4f "
                "z=%.1f",
                del.mean, del.mean / del.se, jit.mean, jit.mean / jit.se);
  report.record(6, ok,
                "10 paired seeds, 1000 samples; drops in p may not reverse by more than 3 SE, gains need z > 3:" +
                    detail);
}

void spike_efficiency(Report& report, const DnnModel& dnn, const Dataset& mnist) {
  const Dataset data = mnist.head(100);
  auto total = [&](const CodingConfig& c) {
    const Simulator sim(convert(dnn, c));
    std::vector<std::int64_t> counts(data.size());
    parallel_for(data.size(), kThreads,
                 [&](std::size_t i) { counts[i] = sim.run(data.sample(i), NoiseConfig{}, 0).total_spikes; });
    std::int64_t sum = 0;
    for (auto n : counts) sum += n;
    return sum;
  };
  const auto rate = total(default_config(Scheme::rate));
  const auto ttfs = total(default_config(Scheme::ttfs));
  const auto ttas = total(config_for(Scheme::ttas));
  // Slack: one extra spike per hidden neuron per sample.
  std::int64_t hidden = 0;
  for (std::size_t l = 0; l + 1 < dnn.layers.size(); ++l) hidden += output_size(dnn.layers[l]);
  const std::int64_t slack = hidden * static_cast<std::int64_t>(data.size());
  const bool ok = ttfs < 0.2 * static_cast<double>(rate) && ttas <= 4 * ttfs + slack;
  report.record(7, ok,
                fmt("100 clean samples: rate %lld, ttfs %lld (need < 0.2 x rate = %.0f), ttas(4) %lld (need <= 4 x "
                    "ttfs + %lld = %lld)",
                    static_cast<long long>(rate), static_cast<long long>(ttfs), 0.2 * static_cast<double>(rate),
                    static_cast<long long>(ttas), static_cast<long long>(slack),
                    static_cast<long long>(4 * ttfs + slack)));
}

void determinism_and_formats(Report& report) {
  const fs::path dir = fs::temp_directory_path() / "spikebench_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path golden = SPIKEBENCH_GOLDEN_DIR;

  ExperimentConfig cfg;
  cfg.model_path = fs::path(data_dir()) / "mlp.snnx.json";
  cfg.dataset_path = fs::path(data_dir()) / "mnist1k-images.idx3";
  cfg.limit = 100;
  cfg.codings = {default_config(Scheme::rate), config_for(Scheme::ttas)};
  cfg.deletion_p = {0.0, 0.5};
  cfg.jitter_sigma = {0.0, 1.0};
  cfg.trials = 3;
  cfg.seed = 17;
  cfg.scale_mode = ScaleProvenance::auto_from_p;
  cfg.out_path = dir / "a.csv";
  cfg.threads = kThreads;
  run_sweep(cfg);
  cfg.out_path = dir / "b.csv";
  cfg.threads = 1;
  run_sweep(cfg);
  const bool csv_same = slurp(dir / "a.csv") == slurp(dir / "b.csv") && !slurp(dir / "a.csv").empty();

  int snnx_ok = 0;
  const char* models[] = {"toy1", "toy3", "ttas3"};
  for (const char* name : models) {
    const fs::path src = golden / (std::string(name) + ".snnx.json");
    const fs::path dst = dir / (std::string(name) + ".snnx.json");
    const auto file = read_snnx(src);
    if (file.snn)
      write_snnx(dst, *file.snn);
    else
      write_snnx(dst, file.dnn);
    snnx_ok += slurp(src) == slurp(dst) && slurp(golden / (std::string(name) + ".bin")) == slurp(dir / (std::string(name) + ".bin"));
  }
  int idx_ok = 0;
  const fs::path idx_files[] = {golden / "tiny-images.idx3", golden / "tiny-labels.idx1",
                                fs::path(data_dir()) / "mnist1k-images.idx3",
                                fs::path(data_dir()) / "mnist1k-labels.idx1"};
  for (const auto& f : idx_files) {
    write_idx(dir / "copy.idx", read_idx(f));
    idx_ok += slurp(f) == slurp(dir / "copy.idx");
  }
  fs::remove_all(dir);
  report.record(8, csv_same && snnx_ok == 3 && idx_ok == 4,
                fmt("sweep CSV byte-identical across runs and thread counts: %s; SNNX golden round-trips %d/3; IDX "
                    "round-trips %d/4",
                    csv_same ? "yes" : "no", snnx_ok, idx_ok));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  Report report;
  const DnnModel dnn = fixture_mlp();
  const Dataset mnist = bundled_mnist();
  std::printf("workers: %d\n", kThreads);

  report.run(1, [&] { conversion_oracle(report, dnn, mnist); });
  report.run(2, [&] { deletion_expectation(report); });
  report.run(3, [&] { scaling_restoration(report); });
  report.run(4, [&] { ttas_equivalences(report, dnn); });
  report.run(5, [&] { jitter_properties(report, dnn, mnist); });
  report.run(6, [&] { robustness_trends(report, dnn, mnist); });
  report.run(7, [&] { spike_efficiency(report, dnn, mnist); });
  report.run(8, [&] { determinism_and_formats(report); });
  const double secs = seconds_since(start);
  report.record(9, secs <= 600.0, fmt("acceptance wall-clock %.1f s on %d workers (need <= 600)", secs, kThreads));
  return report.all() ? 0 : 1;
}
