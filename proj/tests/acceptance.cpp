// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Runs single-threaded on the default config.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spikeid/ann.hpp"
#include "spikeid/common.hpp"
#include "spikeid/encode.hpp"
#include "spikeid/io.hpp"
#include "spikeid/pipeline.hpp"
#include "spikeid/snn.hpp"
#include "spikeid/spectra.hpp"
#include "support.hpp"

using namespace spikeid;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& name, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string f4(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.4f", v);
  return b;
}

std::string e3(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Everything the SNN criteria share: one trained model on the default dataset.
struct Fixture {
  pipeline::ExperimentConfig cfg;
  spectra::DatasetSplit data;
  ann::NetworkModel model;
  double ann_test_accuracy = 0.0;
  double build_seconds = 0.0;
  std::vector<std::size_t> subset;
  double ann_subset_accuracy = 0.0;
  std::uint64_t snn_seed = 0;
};

Fixture make_fixture() {
  Fixture f;
  f.cfg.eval.threads = 1;
  const auto t0 = Clock::now();
  f.data = pipeline::synthesize(f.cfg);
  f.model = pipeline::train_model(f.cfg, f.data.train).model;
  f.build_seconds = since(t0);
  f.ann_test_accuracy = ann::evaluate(f.model, pipeline::to_batch(f.model, f.data.test)).accuracy;
  f.subset = pipeline::spread_indices(f.data.test.samples.size(), 100);
  std::vector<int> truth;
  for (auto i : f.subset) truth.push_back(*f.data.test.samples[i].label);
  f.ann_subset_accuracy =
      ann::metrics_from_predictions(pipeline::ann_predictions(f.model, f.data.test, f.subset), truth, f.model.n_classes)
          .accuracy;
  f.snn_seed = derive_seed(f.cfg.seed, {0x5AAu});
  return f;
}

snn::SpikingNetwork converted(const Fixture& f, bool soft) {
  auto c = f.cfg;
  c.convert.lif.soft_reset = soft;
  return pipeline::convert_model(c, f.model, f.data.train);
}

double snn_accuracy(const Fixture& f, const snn::SpikingNetwork& net, double presentation_ms) {
  return pipeline::evaluate_snn(net, f.data.test, f.subset, presentation_ms,
                                f.cfg.convert.conversion.input_max_rate_hz, f.snn_seed, 1)
      .metrics.accuracy;
}

void criterion_1(const Fixture& f) {
  std::size_t min_train = SIZE_MAX, min_test = SIZE_MAX;
  std::map<int, std::size_t> tr, te;
  for (const auto& h : f.data.train.samples) ++tr[*h.label];
  for (const auto& h : f.data.test.samples) ++te[*h.label];
  for (auto& [k, v] : tr) min_train = std::min(min_train, v);
  for (auto& [k, v] : te) min_test = std::min(min_test, v);
  const bool shape_ok = f.cfg.dataset.bins == 512 && min_train >= 100 && min_test >= 100 &&
                        f.cfg.dataset.integration_s == 1.0 && f.cfg.dataset.distances_m.size() == 5 &&
                        f.cfg.dataset.phantom.size() == 2;
  const bool ok = shape_ok && f.ann_test_accuracy >= 0.98 && f.build_seconds <= 600.0;
  verdict(1, ok, "ANN test accuracy",
          f4(f.ann_test_accuracy) + " >= 0.98 on " + std::to_string(f.data.test.samples.size()) + " test (" +
              std::to_string(min_train) + "/" + std::to_string(min_test) + " per class), synth+train " +
              f4(f.build_seconds) + " s <= 600 s");
}

void criteria_2_3(const Fixture& f, const std::map<bool, snn::SpikingNetwork>& nets) {
  const std::vector<double> pres{100.0, 200.0, 500.0, 1000.0};
  bool ok2 = true, ok3 = true;
  std::string d2, d3;
  for (const auto& [soft, net] : nets) {
    std::vector<double> acc;
    for (double p : pres) acc.push_back(snn_accuracy(f, net, p));
    const double gap = f.ann_subset_accuracy - acc[3];
    const bool m2 = acc[2] >= 0.80 && gap <= 0.10;
    bool m3 = true;
    for (std::size_t i = 1; i < acc.size(); ++i) m3 = m3 && acc[i] >= acc[i - 1] - 0.02 - 1e-12;
    ok2 = ok2 && m2;
    ok3 = ok3 && m3;
    const std::string tag = soft ? "soft" : "hard";
    d2 += tag + ": 500ms " + f4(acc[2]) + " >= 0.80, gap@1000ms " + f4(gap) + " <= 0.10; ";
    d3 += tag + ":";
    for (double a : acc) d3 += " " + f4(a);
    d3 += "; ";
  }
  verdict(2, ok2, "SNN accuracy and ANN gap", d2 + "ANN subset " + f4(f.ann_subset_accuracy));
  verdict(3, ok3, "accuracy vs presentation (100/200/500/1000 ms)", d3 + "steps >= -0.02");
}

void criterion_4() {
  const double h = 1e-5;
  double worst = 0.0;
  int models = 0;
  for (std::uint64_t seed = 1; models < 5 && seed < 100; ++seed) {
    auto m = ann::make_network(16, {ann::conv1d(1, 2, 3, 2, ann::Activation::ReLU), ann::flatten(),
                                    ann::dense(3, ann::Activation::Softmax)});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5), x01(0.0, 1.0);
    for (auto& p : m.params) {
      for (auto& w : p.weights) w = u(rng);
      for (auto& b : p.biases) b = 0.4 * u(rng);
    }
    ann::Batch b;
    for (int n = 0; n < 4; ++n) {
      std::vector<double> x(16);
      for (auto& v : x) v = x01(rng);
      b.inputs.push_back(x);
      b.labels.push_back(n % 3);
    }
    double kink = 1e300;
    for (const auto& x : b.inputs) {
      const auto tr = ann::forward_trace(m, x);
      for (double z : tr.pre[0]) kink = std::min(kink, std::abs(z));
    }
    if (kink < 1e-3) continue;  // finite differences across a ReLU kink are meaningless
    ++models;
    const auto g = ann::grad(m, b);
    for (std::size_t l = 0; l < m.params.size(); ++l) {
      for (int which = 0; which < 2; ++which) {
        auto& v = which == 0 ? m.params[l].weights : m.params[l].biases;
        const auto& gv = which == 0 ? g.layers[l].weights : g.layers[l].biases;
        for (std::size_t j = 0; j < v.size(); ++j) {
          const double w0 = v[j];
          v[j] = w0 + h;
          const double lp = ann::loss(m, b);
          v[j] = w0 - h;
          const double lm = ann::loss(m, b);
          v[j] = w0;
          const double fd = (lp - lm) / (2.0 * h);
          worst = std::max(worst, std::abs(fd - gv[j]) / std::max({std::abs(fd), std::abs(gv[j]), 1e-6}));
        }
      }
    }
  }
  verdict(4, models == 5 && worst < 1e-4, "gradient vs central differences",
          "max relative error " + e3(worst) + " < 1e-4 over " + std::to_string(models) + " models");
}

void criterion_5() {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> len(12, 48), ch(1, 4), ker(1, 5), str(1, 3), cls(2, 6), depth(0, 2);
  std::uniform_real_distribution<double> w(-0.5, 0.5), x01(0.0, 1.0);
  double worst = 0.0;
  int n = 0;
  for (; n < 200; ++n) {
    std::vector<ann::LayerSpec> specs;
    int c = 1;
    const int convs = depth(rng);
    for (int i = 0; i < convs; ++i) {
      const int o = ch(rng);
      specs.push_back(ann::conv1d(c, o, ker(rng), str(rng), ann::Activation::ReLU));
      c = o;
    }
    specs.push_back(ann::flatten());
    if (depth(rng) == 1) specs.push_back(ann::dense(ch(rng) + 2, ann::Activation::ReLU));
    specs.push_back(ann::dense(cls(rng), ann::Activation::Softmax));
    auto m = ann::make_network(len(rng), specs);
    for (auto& p : m.params) {
      for (auto& v : p.weights) v = w(rng);
      for (auto& v : p.biases) v = w(rng);
    }
    std::vector<double> x(static_cast<std::size_t>(m.input_len));
    for (auto& v : x) v = x01(rng);
    const auto tr = ann::forward_trace(m, x);
    const auto ref = oracle::naive_forward(m, x);
    for (std::size_t l = 0; l < ref.size(); ++l)
      for (std::size_t i = 0; i < ref[l].size(); ++i) worst = std::max(worst, std::abs(ref[l][i] - tr.post[l][i]));
  }
  verdict(5, n >= 100 && worst <= 1e-10, "forward vs nested-loop reference",
          "max abs difference " + e3(worst) + " <= 1e-10 over " + std::to_string(n) + " models");
}

double isi_at(double dt, double current) {
  snn::LIFParams lif;
  lif.dt_ms = dt;
  lif.compensate_synapse = false;
  lif.compensate_leak = false;
  const auto m = ann::make_network(1, {ann::dense(2, ann::Activation::Softmax)});
  snn::SpikingNetwork net;
  net.input_len = 1;
  net.n_classes = 2;
  snn::SpikingLayer L;
  L.spec = m.layers[0];
  L.weights.assign(2, 0.0);
  L.biases.assign(2, 0.0);
  net.layers.push_back(L);
  net.lif = lif;
  snn::Simulator sim(net);
  sim.set_bias_current(0, current * (1.0 - std::exp(-dt / lif.tau_syn_ms)));
  std::vector<double> t;
  const auto steps = std::llround(3000.0 / dt);
  for (long long s = 0; s < steps; ++s)
    if (sim.step({}).spiked[0][0]) t.push_back(static_cast<double>(s) * dt);
  if (t.size() < 8) return 0.0;
  return (t.back() - t[3]) / static_cast<double>(t.size() - 4);
}

void criterion_6() {
  double worst_fine = 0.0, worst_coarse = 0.0;
  for (double target : {10.0, 25.0, 50.0, 100.0}) {
    const double current = 1.0 / (1.0 - std::exp(-target / 20.0));
    const double expect = oracle::lif_isi(20.0, current, 0.0, 1.0);
    worst_fine = std::max(worst_fine, std::abs(isi_at(0.1, current) - expect) / expect);
    worst_coarse = std::max(worst_coarse, std::abs(isi_at(1.0, current) - expect) / expect);
  }
  verdict(6, worst_fine < 0.02 && worst_coarse < 0.10, "LIF interspike interval",
          "max error dt=0.1: " + f4(worst_fine) + " < 0.02, dt=1: " + f4(worst_coarse) + " < 0.10");
}

// Pearson correlation per layer between normalized ANN activations and SNN
// spike rates, pooled over the calibration samples.
std::vector<double> rate_correlations(const Fixture& f, const snn::SpikingNetwork& net) {
  const auto calib = pipeline::calibration_inputs(f.model, f.data.train, f.cfg.convert.calibration_samples);
  std::vector<std::size_t> param_idx;
  for (std::size_t i = 0; i < f.model.layers.size(); ++i)
    if (f.model.layers[i].has_params()) param_idx.push_back(i);
  std::vector<std::vector<double>> a(net.layers.size()), r(net.layers.size());
  snn::SimulationOptions opt;
  opt.record_neuron_counts = true;
  for (std::size_t s = 0; s < calib.size(); ++s) {
    const auto tr = ann::forward_trace(f.model, calib[s]);
    const auto run = snn::simulate(net, encode::values_to_rates(calib[s], f.cfg.convert.conversion.input_max_rate_hz),
                                   1000.0, pipeline::sample_seed(f.snn_seed, s), opt);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const auto li = param_idx[l];
      const bool last = l + 1 == net.layers.size();
      const auto& src = last ? tr.pre[li] : tr.post[li];
      for (std::size_t u = 0; u < src.size(); ++u) {
        const double z = last ? std::max(src[u] + net.readout_shift, 0.0) : src[u];
        a[l].push_back(z / net.layers[l].lambda);
        r[l].push_back(static_cast<double>(run.neuron_counts[l][u]) / static_cast<double>(run.steps));
      }
    }
  }
  std::vector<double> out;
  for (std::size_t l = 0; l < a.size(); ++l) out.push_back(oracle::pearson(a[l], r[l]));
  return out;
}

void criterion_7(const Fixture& f, const std::map<bool, snn::SpikingNetwork>& nets) {
  bool ok = true;
  std::string d;
  for (const auto& [soft, net] : nets) {
    const auto rho = rate_correlations(f, net);
    d += soft ? "soft:" : "hard:";
    for (double v : rho) {
      d += " " + f4(v);
      ok = ok && v >= 0.9;
    }
    d += "; ";
  }
  verdict(7, ok, "ANN activation vs SNN rate correlation @1000 ms",
          d + "each >= 0.9 on " + std::to_string(f.cfg.convert.calibration_samples) + " calibration samples");
}

void criterion_8() {
  const auto m = ann::build_paper_architecture(3238, 6, 1.0, 1);
  const auto u = m.layer_units();
  std::string s;
  for (auto v : u) s += (s.empty() ? "" : ", ") + std::to_string(v);
  verdict(8, u == std::vector<std::size_t>{51696, 12896, 6}, "reference architecture units", "[" + s + "]");
}

void criterion_9(const Fixture& f, const snn::SpikingNetwork& net) {
  const double pres = f.cfg.convert.conversion.presentation_ms;
  const double base = snn_accuracy(f, net, pres);
  std::vector<double> acc;
  std::string d;
  for (int bits : {4, 8, 12, 16}) {
    auto q = f.cfg.quant;
    q.weight_bits = bits;
    acc.push_back(snn_accuracy(f, snn::quantize(net, q), pres));
    d += " " + std::to_string(bits) + "b " + f4(acc.back());
  }
  bool mono = true;
  for (std::size_t i = 1; i < acc.size(); ++i) mono = mono && acc[i] >= acc[i - 1] - 0.02 - 1e-12;
  const bool close = std::abs(acc[1] - base) <= 0.05 + 1e-12;
  verdict(9, mono && close, "fixed-point accuracy",
          "float " + f4(base) + "," + d + "; |8b - float| <= 0.05, steps >= -0.02");
}

void criterion_10(const Fixture& f, const snn::SpikingNetwork& net) {
  const double pres = f.cfg.convert.conversion.presentation_ms;
  bool macs_const = true, zero_ok = true, linear = true;
  double worst_ratio = 0.0, worst_r2 = 1.0;
  const auto macs = f.model.mac_count();
  for (std::size_t k = 0; k < 5; ++k) {
    const auto i = f.subset[k * f.subset.size() / 5];
    const auto x = ann::prepare_input(f.model, f.data.test.samples[i].counts);
    const auto seed = pipeline::sample_seed(f.snn_seed, i);
    const auto run = snn::simulate(net, encode::values_to_rates(x, f.cfg.convert.conversion.input_max_rate_hz), pres, seed);
    auto rep = snn::event_cost_report(run, f.model);
    macs_const = macs_const && rep.ann_macs == macs;
    snn::add_rate_sweep(rep, net, x, f.cfg.eval.cost_rates_hz, pres, seed);
    const double top = static_cast<double>(rep.curve.back().synaptic_ops);
    const double ratio = top > 0 ? static_cast<double>(rep.curve.front().synaptic_ops) / top : 1.0;
    worst_ratio = std::max(worst_ratio, ratio);
    worst_r2 = std::min(worst_r2, rep.curve_r2);
    zero_ok = zero_ok && ratio < 0.01;
    linear = linear && rep.curve_r2 > 0.99;
  }
  verdict(10, macs_const && zero_ok && linear, "event cost",
          "ann_macs " + std::to_string(macs) + (macs_const ? " constant" : " VARIES") + " over 5 inputs, ops(0)/ops(max) " +
              f4(worst_ratio) + " < 0.01, R^2 " + f4(worst_r2) + " > 0.99");
}

void criterion_11() {
  using namespace encode;
  PulseModel pm;
  const auto bank = log_spaced_bank(pm);
  auto level_e = [&](std::size_t k) { return (bank.levels_v[k] - pm.baseline_v) / (pm.volts_per_kev * pm.peak_factor()); };
  bool mono = true, bounded = true, balanced = true;
  double prev = -1.0, worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double e = 5.0 + i * (3500.0 - 5.0) / 99.0;
    const auto s = threshold_encode(synth_pulse(e, pm), bank, pm);
    const auto d = decode_energy(s, bank, pm);
    mono = mono && d.energy_kev >= prev;
    prev = d.energy_kev;
    if (e >= level_e(0) && e <= level_e(bank.size() - 1)) {
      std::size_t k = 0;
      while (k + 1 < bank.size() && level_e(k + 1) <= e) ++k;
      const std::size_t j = std::min(k + 1, bank.size() - 1);
      // The sampled peak can fall just below a level the continuous peak
      // reaches; the bound is the larger of the two adjacent steps.
      double step = level_e(j) - level_e(j - 1);
      if (k > 0) step = std::max(step, level_e(k) - level_e(k - 1));
      const double err = std::abs(d.energy_kev - e);
      worst = std::max(worst, err / step);
      bounded = bounded && err <= step;
    }
    std::map<int, int> bal;
    std::map<int, int> last;
    for (const auto& ev : s.events) {
      bal[ev.channel] += ev.polarity;
      if (last.count(ev.channel) && last[ev.channel] == ev.polarity) balanced = false;
      last[ev.channel] = ev.polarity;
    }
    for (auto& [ch, b] : bal) balanced = balanced && b == 0;
  }
  verdict(11, mono && bounded && balanced, "threshold encoder",
          std::string("monotone ") + (mono ? "yes" : "no") + ", max error/step " + f4(worst) + " <= 1, +1/-1 balance " +
              (balanced ? "yes" : "no") + " over 100 energies");
}

void criterion_12() {
  int poisson_out = 0, hist_out = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto n = static_cast<double>(encode::poisson_spike_steps(100.0, 10000.0, 1.0, derive_seed(3, {s})).size());
    if (std::abs(n - 1000.0) > 4.0 * std::sqrt(10000.0 * 0.1 * 0.9)) ++poisson_out;
  }
  const auto set = spectra::default_templates();
  const auto det512 = spectra::detector_with_bins(512);
  spectra::AcquisitionConfig acq;
  acq.distance_m = 1.0;
  const auto lam = spectra::expected_spectrum(set[3], det512, acq, &set[5]);
  double lam_total = 0.0;
  for (double v : lam) lam_total += v;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto t = static_cast<double>(spectra::sample_histogram(lam, derive_seed(99, {s})).total());
    if (std::abs(t - lam_total) > 4.0 * std::sqrt(lam_total)) ++hist_out;
  }
  const spectra::DetectorModel det;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> d(0, 1000000);
  bool conserved = true;
  std::vector<std::int64_t> raw(static_cast<std::size_t>(det.n_raw_channels));
  for (int trial = 0; trial < 200; ++trial) {
    std::int64_t sum = 0;
    for (auto& r : raw) sum += (r = d(rng));
    conserved = conserved && spectra::calibrate(raw, det).total() == sum;
  }
  // P(|z| > 4) = 6.3e-5 per draw, so more than one excursion in 1000 is a failure.
  verdict(12, poisson_out <= 1 && hist_out <= 1 && conserved, "statistical suites",
          "outside 4 sigma: Poisson " + std::to_string(poisson_out) + "/1000, histogram " + std::to_string(hist_out) +
              "/1000 (<= 1); calibrate conserves counts on 200 random inputs: " + (conserved ? "yes" : "no"));
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"spikeid"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int code = pipeline::run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return code;
}

bool full_pipeline(const fs::path& d) {
  const auto data = (d / "data").string();
  return cli({"synth", "--out", data}) == 0 &&
         cli({"train", "--data", data, "--out", (d / "model.json").string()}) == 0 &&
         cli({"convert", "--model", (d / "model.json").string(), "--data", data, "--out", (d / "network.json").string()}) == 0 &&
         cli({"simulate", "--network", (d / "network.json").string(), "--data", data, "--raster-layer", "0", "--out",
              (d / "sim").string()}) == 0 &&
         cli({"evaluate", "--model", (d / "model.json").string(), "--network", (d / "network.json").string(), "--data",
              data, "--threads", "1", "--out", (d / "report.json").string()}) == 0;
}

void criterion_13() {
  const auto a = oracle::temp_dir("accept_a");
  const auto b = oracle::temp_dir("accept_b");
  const bool ran = full_pipeline(a) && full_pipeline(b);
  std::size_t files = 0, differ = 0;
  std::string first_diff;
  if (ran) {
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), a);
      if (rel.string().find(".timings.") != std::string::npos) continue;  // wall-clock, not an artifact
      ++files;
      const auto other = b / rel;
      if (!fs::exists(other) || io::read_text(e.path()) != io::read_text(other)) {
        ++differ;
        if (first_diff.empty()) first_diff = rel.string();
      }
    }
  }
  fs::remove_all(a);
  fs::remove_all(b);
  verdict(13, ran && files >= 10 && differ == 0, "byte-identical rerun",
          ran ? std::to_string(files) + " files compared, " + std::to_string(differ) + " differ" +
                    (first_diff.empty() ? "" : " (first: " + first_diff + ")")
              : "pipeline failed to run");
}

}  // namespace

int main() {
  try {
    const auto t0 = Clock::now();
    const auto f = make_fixture();
    criterion_1(f);
    const std::map<bool, snn::SpikingNetwork> nets{{false, converted(f, false)}, {true, converted(f, true)}};
    criteria_2_3(f, nets);
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7(f, nets);
    criterion_8();
    criterion_9(f, nets.at(false));
    criterion_10(f, nets.at(false));
    criterion_11();
    criterion_12();
    criterion_13();
    std::printf("%d of 13 criteria failed (%.1f s)\n", failures, since(t0));
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
