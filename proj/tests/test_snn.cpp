#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "spikeid/common.hpp"
#include "spikeid/encode.hpp"
#include "spikeid/snn.hpp"
#include "support.hpp"

using namespace spikeid;
using namespace spikeid::snn;
using ann::Activation;

namespace {

// One-input, two-neuron network with no synaptic input; neurons are driven
// only through set_bias_current.
SpikingNetwork bare_network(const LIFParams& lif) {
  const auto m = ann::make_network(1, {ann::dense(2, Activation::Softmax)});
  SpikingNetwork net;
  net.input_len = 1;
  net.n_classes = 2;
  SpikingLayer L;
  L.spec = m.layers[0];
  L.weights.assign(2, 0.0);
  L.biases.assign(2, 0.0);
  net.layers.push_back(L);
  net.lif = lif;
  return net;
}

LIFParams raw_lif(double dt) {
  LIFParams p;
  p.dt_ms = dt;
  p.compensate_synapse = false;
  p.compensate_leak = false;
  return p;
}

// Mean ISI (ms) of neuron 0 under constant membrane drive `current`
// (the steady synaptic current, before the exponential filter).
double measured_isi(double dt, double current, double duration_ms) {
  const auto lif = raw_lif(dt);
  const auto net = bare_network(lif);
  Simulator sim(net);
  const double d = std::exp(-dt / lif.tau_syn_ms);
  sim.set_bias_current(0, current * (1.0 - d));
  std::vector<double> times;
  const auto steps = static_cast<std::int64_t>(std::llround(duration_ms / dt));
  for (std::int64_t t = 0; t < steps; ++t) {
    if (sim.step({}).spiked[0][0]) times.push_back(static_cast<double>(t) * dt);
  }
  REQUIRE(times.size() > 6);
  // Skip the first spikes while the synaptic current settles.
  const std::size_t skip = 3;
  return (times.back() - times[skip]) / static_cast<double>(times.size() - 1 - skip);
}

ann::NetworkModel identity_model(Activation out) {
  auto m = ann::make_network(2, {ann::dense(2, out)});
  m.params[0].weights = {1.0, 0.0, 0.0, 1.0};
  m.params[0].biases = {0.0, 0.0};
  return m;
}

ann::NetworkModel random_relu_model(std::uint64_t seed) {
  auto m = ann::make_network(24, {ann::conv1d(1, 3, 4, 2, Activation::ReLU), ann::flatten(),
                                  ann::dense(8, Activation::ReLU), ann::dense(3, Activation::Softmax)});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(-0.3, 0.6), b(-0.1, 0.0);
  for (auto& p : m.params) {
    for (auto& v : p.weights) v = w(rng);
    for (auto& v : p.biases) v = b(rng);
  }
  return m;
}

std::vector<std::vector<double>> random_inputs(std::uint64_t seed, int n, int len) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(len)));
  for (auto& x : xs)
    for (auto& v : x) v = u(rng);
  return xs;
}

}  // namespace

TEST_SUITE("snn") {

TEST_CASE("LIF parameter validation") {
  LIFParams p;
  CHECK_NOTHROW(p.validate());
  p.dt_ms = 3.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.v_reset = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.tau_m_ms = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  CHECK(p.synaptic_gain() == doctest::Approx((1.0 - std::exp(-0.2)) * 20.0));
  CHECK(p.leak_offset() == doctest::Approx(0.025));
  p.compensate_leak = false;
  CHECK(p.leak_offset() == 0.0);
  p.refractory_ms = 2.4;
  CHECK(p.refractory_steps() == 2);
}

TEST_CASE("interspike interval matches the closed form") {
  for (double target : {10.0, 25.0, 50.0}) {
    // Current giving an ISI of `target` in continuous time.
    const double tau = 20.0;
    const double current = 1.0 / (1.0 - std::exp(-target / tau));
    const double expect = oracle::lif_isi(tau, current, 0.0, 1.0);
    CHECK(expect == doctest::Approx(target));
    const double fine = measured_isi(0.1, current, 2000.0);
    const double coarse = measured_isi(1.0, current, 2000.0);
    INFO("target " << target << " fine " << fine << " coarse " << coarse);
    CHECK(std::abs(fine - expect) / expect < 0.02);
    CHECK(std::abs(coarse - expect) / expect < 0.10);
  }
}

TEST_CASE("subthreshold drive settles below threshold without spikes") {
  const auto lif = raw_lif(1.0);
  const auto net = bare_network(lif);
  Simulator sim(net);
  const double d = std::exp(-1.0 / lif.tau_syn_ms);
  sim.set_bias_current(0, 0.9 * (1.0 - d));
  std::int64_t spikes = 0;
  for (int t = 0; t < 2000; ++t) spikes += sim.step({}).spiked[0][0];
  CHECK(spikes == 0);
  CHECK(sim.i_syn(0)[0] == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(sim.v(0)[0] == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(sim.v(0)[1] == sim.v(0)[0]);
}

TEST_CASE("leak compensation gives a near-identity rate transfer under soft reset") {
  LIFParams lif;
  lif.soft_reset = true;
  for (double a : {0.1, 0.3, 0.5, 0.8}) {
    auto net = bare_network(lif);
    net.layers[0].biases = {a, 0.0};
    Simulator sim(net);
    std::int64_t spikes = 0;
    const int steps = 4000;
    for (int t = 0; t < steps; ++t) spikes += sim.step({}).spiked[0][0];
    const double rate = static_cast<double>(spikes) / steps;
    INFO("drive " << a << " rate " << rate);
    CHECK(std::abs(rate - a) < 0.02);
    CHECK(sim.spike_counts(0)[1] == 0);
  }
}

TEST_CASE("silent input and non-positive biases give no spikes") {
  const auto m = random_relu_model(3);
  const auto calib = random_inputs(4, 10, 24);
  const auto net = convert(m, calib, {});
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l)
    for (double b : net.layers[l].biases) REQUIRE(b <= 0.0);
  // The output layer may carry the readout shift, so inspect hidden layers.
  encode::RateCode zero;
  zero.rates_hz.assign(24, 0.0);
  const auto run = simulate(net, zero, 500.0, 1);
  CHECK(run.input_spikes == 0);
  CHECK(run.layer_spikes[0] == 0);
  CHECK(run.layer_spikes[1] == 0);
}

TEST_CASE("conversion of an identity network") {
  const auto m = identity_model(Activation::None);
  std::vector<std::vector<double>> calib{{0.2, 0.4}, {1.0, 0.5}, {0.3, 1.0}};
  const auto net = convert(m, calib, {});
  CHECK(net.input_lambda == 1.0);
  REQUIRE(net.layers.size() == 1);
  CHECK(net.layers[0].lambda == 1.0);
  CHECK(net.layers[0].weights == m.params[0].weights);
  CHECK(net.readout_shift == 0.0);
  CHECK(net.parameter_count() == m.parameter_count());
  CHECK(net.normalization_factors() == std::vector<double>{1.0, 1.0});

  // Scaling the inputs scales every factor but leaves the weights alone.
  for (auto& x : calib)
    for (auto& v : x) v *= 3.0;
  const auto scaled = convert(m, calib, {});
  CHECK(scaled.input_lambda == 3.0);
  CHECK(scaled.layers[0].lambda == 3.0);
  for (std::size_t j = 0; j < 4; ++j) CHECK(scaled.layers[0].weights[j] == doctest::Approx(m.params[0].weights[j]));
}

TEST_CASE("conversion normalizes by the activation percentile") {
  auto m = ann::make_network(1, {ann::dense(1, Activation::ReLU), ann::dense(2, Activation::None)});
  m.params[0].weights = {2.0};
  m.params[0].biases = {0.0};
  m.params[1].weights = {1.0, 0.5};
  m.params[1].biases = {0.0, 0.0};
  std::vector<std::vector<double>> calib;
  for (int i = 1; i <= 100; ++i) calib.push_back({i / 100.0});
  ConversionConfig cfg;
  cfg.norm_percentile = 95.0;
  const auto net = convert(m, calib, cfg);
  CHECK(net.input_lambda == 1.0);
  CHECK(net.layers[0].lambda == doctest::Approx(1.9));
  CHECK(net.layers[0].weights[0] == doctest::Approx(2.0 / 1.9));
  // Output activations 0.01..1 and 0.005..0.5; the 95th of the 200 pooled values.
  std::vector<double> pooled;
  for (int i = 1; i <= 100; ++i) {
    pooled.push_back(2.0 * i / 100.0);
    pooled.push_back(1.0 * i / 100.0);
  }
  std::sort(pooled.begin(), pooled.end());
  const double lam1 = pooled[189];
  CHECK(net.layers[1].lambda == doctest::Approx(lam1));
  CHECK(net.layers[1].weights[0] == doctest::Approx(1.0 * 1.9 / lam1));
}

TEST_CASE("readout shift lifts negative winning logits") {
  auto m = ann::make_network(1, {ann::dense(2, Activation::Softmax)});
  m.params[0].weights = {-1.0, -2.0};
  m.params[0].biases = {0.0, 0.0};
  const std::vector<std::vector<double>> calib{{0.2}, {1.0}};
  const auto net = convert(m, calib, {});
  const double c = (0.25 * -0.2 + 1.0) / 0.75;
  CHECK(net.readout_shift == doctest::Approx(c));
  const double lam = -0.2 + c;
  CHECK(net.layers[0].lambda == doctest::Approx(lam));
  CHECK(net.layers[0].biases[0] == doctest::Approx(c / lam));
  CHECK((-1.0 + c) / (-0.2 + c) == doctest::Approx(0.25));

  ConversionConfig off;
  off.readout_floor = 0.0;
  CHECK_THROWS_AS(convert(m, calib, off), ValidationError);  // all logits negative: dead output
  off.readout_floor = 1.0;
  CHECK_THROWS_AS(convert(m, calib, off), ValidationError);
}

TEST_CASE("conversion rejects unsupported models and dead layers") {
  auto m = ann::make_network(4, {ann::dense(3, Activation::ReLU), ann::dense(2, Activation::Softmax)});
  const std::vector<std::vector<double>> calib{{0.1, 0.2, 0.3, 0.4}};
  try {
    convert(m, calib, {});
    FAIL("expected a dead-layer error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
  }
  CHECK_THROWS_AS(convert(m, {}, {}), ValidationError);
  auto neg = calib;
  neg[0][0] = -1.0;
  for (auto& w : m.params[0].weights) w = 1.0;
  CHECK_THROWS_AS(convert(m, neg, {}), ValidationError);
  auto linear_hidden = ann::make_network(4, {ann::dense(3, Activation::None), ann::dense(2, Activation::Softmax)});
  for (auto& w : linear_hidden.params[0].weights) w = 1.0;
  for (auto& w : linear_hidden.params[1].weights) w = 1.0;
  CHECK_THROWS_AS(convert(linear_hidden, calib, {}), ValidationError);
}

TEST_CASE("weight quantization bounds") {
  const auto m = random_relu_model(8);
  const auto net = convert(m, random_inputs(9, 10, 24), {});
  for (int bits : {4, 8, 16}) {
    QuantizationConfig q;
    q.weight_bits = bits;
    const auto fx = quantize(net, q);
    CHECK(fx.mode == Mode::FixedPoint);
    const double qmax = std::ldexp(1.0, bits - 1) - 1.0;
    for (std::size_t l = 0; l < fx.layers.size(); ++l) {
      const auto& L = fx.layers[l];
      double maxabs = 0.0;
      for (double w : L.weights) maxabs = std::max(maxabs, std::abs(w));
      CHECK(L.weight_scale == doctest::Approx(maxabs / qmax));
      int top = 0;
      for (std::size_t j = 0; j < L.weights.size(); ++j) {
        CHECK(std::abs(L.weight_codes[j]) <= qmax);
        CHECK(std::abs(L.weights[j] - L.weight_codes[j] * L.weight_scale) <= L.weight_scale / 2.0 + 1e-15);
        top = std::max(top, std::abs(L.weight_codes[j]));
      }
      CHECK(top == static_cast<int>(qmax));
    }
  }
  QuantizationConfig bad;
  bad.weight_bits = 1;
  CHECK_THROWS_AS(quantize(net, bad), ValidationError);
  CHECK_THROWS_AS(quantize(quantize(net, {}), {}), ValidationError);
}

TEST_CASE("decision rule") {
  auto c = decide({3, 7, 7, 1});
  CHECK(c.predicted == 1);
  CHECK(c.tie);
  CHECK(c.confidence == 0);
  c = decide({0, 0, 0});
  CHECK(c.no_decision);
  CHECK(c.predicted == 0);
  c = decide({2, 9, 4});
  CHECK(c.predicted == 1);
  CHECK_FALSE(c.tie);
  CHECK(c.confidence == 5);
  CHECK_THROWS_AS(decide({}), ValidationError);
}

TEST_CASE("simulation is deterministic and scales with presentation time") {
  const auto m = random_relu_model(12);
  const auto xs = random_inputs(13, 10, 24);
  const auto net = convert(m, xs, {});
  ClassifyConfig cfg;
  cfg.seed = 77;
  cfg.presentation_ms = 500.0;
  const auto a = classify_prepared(net, xs[0], cfg);
  const auto b = classify_prepared(net, xs[0], cfg);
  CHECK(a.counts == b.counts);
  CHECK(a.run.synaptic_events == b.run.synaptic_events);
  cfg.presentation_ms = 1000.0;
  const auto c = classify_prepared(net, xs[0], cfg);
  const auto sum = [](const std::vector<std::int64_t>& v) { return std::accumulate(v.begin(), v.end(), std::int64_t{0}); };
  REQUIRE(sum(a.counts) > 50);
  const double ratio = static_cast<double>(sum(c.counts)) / static_cast<double>(sum(a.counts));
  CHECK(ratio > 1.8);
  CHECK(ratio < 2.2);
  CHECK(c.run.steps == 1000);
}

TEST_CASE("simulator input spikes match the event-stream encoder") {
  const auto m = random_relu_model(2);
  const auto xs = random_inputs(5, 4, 24);
  const auto net = convert(m, xs, {});
  const auto rates = encode::values_to_rates(xs[1], 800.0);
  SimulationOptions opt;
  opt.raster_layer = -1;
  const auto run = simulate(net, rates, 200.0, 31, opt);
  const auto stream = encode::rates_to_event_stream(rates, 200.0, 31);
  CHECK(run.input_spikes == static_cast<std::int64_t>(stream.size()));
  CHECK(run.raster.size() == stream.size());
  std::int64_t binned = 0;
  for (auto v : run.raster_summary[0]) binned += v;
  CHECK(binned == run.input_spikes);
}

TEST_CASE("fixed-point simulation follows the float network") {
  const auto m = random_relu_model(21);
  const auto xs = random_inputs(22, 10, 24);
  const auto net = convert(m, xs, {});
  QuantizationConfig q;
  q.weight_bits = 16;
  const auto fx = quantize(net, q);
  ClassifyConfig cfg;
  cfg.presentation_ms = 1000.0;
  int agree = 0;
  for (const auto& x : xs) {
    const auto a = classify_prepared(net, x, cfg);
    const auto b = classify_prepared(fx, x, cfg);
    agree += a.predicted == b.predicted;
    CHECK(b.run.saturation_events == 0);
  }
  CHECK(agree >= 8);
}

TEST_CASE("event cost report and rate sweep") {
  const auto m = random_relu_model(30);
  const auto xs = random_inputs(31, 10, 24);
  const auto net = convert(m, xs, {});
  const auto rates = encode::values_to_rates(xs[0], 1000.0);
  const auto run = simulate(net, rates, 200.0, 3);
  auto rep = event_cost_report(run, m);
  CHECK(rep.ann_macs == m.mac_count());
  CHECK(rep.snn_synaptic_ops == run.synaptic_events);
  CHECK(rep.ratio == doctest::Approx(static_cast<double>(run.synaptic_events) / m.mac_count()));
  add_rate_sweep(rep, net, xs[0], {0, 250, 500, 750, 1000}, 200.0, 3);
  REQUIRE(rep.curve.size() == 5);
  CHECK(rep.curve[0].synaptic_ops < rep.curve[4].synaptic_ops / 100);
  CHECK(rep.curve_slope > 0.0);
  CHECK(rep.curve_r2 > 0.95);
  CHECK_THROWS_AS(add_rate_sweep(rep, net, xs[0], {1000}, 200.0, 3), ValidationError);
}

TEST_CASE("simulate validates its inputs") {
  const auto m = random_relu_model(1);
  const auto net = convert(m, random_inputs(2, 3, 24), {});
  encode::RateCode wrong;
  wrong.rates_hz.assign(5, 10.0);
  CHECK_THROWS_AS(simulate(net, wrong, 100.0, 1), ValidationError);
  encode::RateCode ok;
  ok.rates_hz.assign(24, 10.0);
  CHECK_THROWS_AS(simulate(net, ok, 0.0, 1), ValidationError);
  CHECK(parse_mode(to_string(Mode::FixedPoint)) == Mode::FixedPoint);
  CHECK_THROWS_AS(parse_mode("analog"), ValidationError);
}

}  // TEST_SUITE
