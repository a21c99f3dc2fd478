#include "spikeid/snn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spikeid/common.hpp"
#include "spikeid/kernels.hpp"

namespace spikeid::snn {

void LIFParams::validate() const {
  require(tau_m_ms > 0.0 && tau_syn_ms > 0.0, "LIF time constants must be > 0");
  require(dt_ms > 0.0, "LIF dt must be > 0");
  require(dt_ms <= tau_syn_ms / 2.0, "LIF dt must be <= tau_syn / 2");
  require(v_thresh > v_reset && v_reset >= v_rest, "LIF needs v_thresh > v_reset >= v_rest");
  require(refractory_ms >= 0.0, "LIF refractory period must be >= 0");
}

double LIFParams::synaptic_gain() const {
  if (!compensate_synapse) return 1.0;
  return (1.0 - std::exp(-dt_ms / tau_syn_ms)) * tau_m_ms / dt_ms;
}

double LIFParams::leak_offset() const {
  return compensate_leak ? (v_thresh - v_rest) * dt_ms / (2.0 * tau_m_ms) : 0.0;
}

int LIFParams::refractory_steps() const {
  return static_cast<int>(std::lround(refractory_ms / dt_ms));
}

std::string to_string(Mode m) { return m == Mode::Float ? "float" : "fixed_point"; }

Mode parse_mode(const std::string& s) {
  if (s == "float") return Mode::Float;
  if (s == "fixed_point" || s == "fixed") return Mode::FixedPoint;
  throw ValidationError("unknown network mode '" + s + "'");
}

void QuantizationConfig::validate() const {
  require(weight_bits >= 2 && weight_bits <= 16, "weight_bits must lie in [2, 16]");
  require(potential_bits >= 8 && potential_bits <= 16, "potential_bits must lie in [8, 16]");
}

void ConversionConfig::validate() const {
  require(norm_percentile > 90.0 && norm_percentile <= 100.0, "norm_percentile must lie in (90, 100]");
  require(presentation_ms > 0.0, "presentation_ms must be > 0");
  require(input_max_rate_hz > 0.0, "input_max_rate_hz must be > 0");
  require(readout_floor >= 0.0 && readout_floor < 1.0, "readout_floor must lie in [0, 1)");
}

void SpikingNetwork::validate() const {
  require(!layers.empty(), "spiking network has no layers");
  require(input_len >= 1 && n_classes >= 2, "spiking network has invalid input/output sizes");
  require(static_cast<int>(layers.back().units()) == n_classes, "output layer width != n_classes");
  lif.validate();
  std::size_t flat = static_cast<std::size_t>(input_len);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    require(static_cast<std::size_t>(L.spec.in_units) == flat,
            "spiking layer " + std::to_string(l) + " input size mismatch");
    require(L.weights.size() == L.spec.weight_count() && L.biases.size() == L.spec.bias_count(),
            "spiking layer " + std::to_string(l) + " parameter size mismatch");
    require(L.lambda > 0.0, "spiking layer " + std::to_string(l) + " has a non-positive normalization factor");
    if (mode == Mode::FixedPoint) {
      require(L.weight_fixed.size() == L.weights.size() && L.bias_fixed.size() == L.biases.size(),
              "fixed-point layer " + std::to_string(l) + " is missing quantized parameters");
    }
    flat = L.units();
  }
}

std::size_t SpikingNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

std::vector<std::size_t> SpikingNetwork::layer_units() const {
  std::vector<std::size_t> u;
  for (const auto& l : layers) u.push_back(l.units());
  return u;
}

std::vector<double> SpikingNetwork::normalization_factors() const {
  std::vector<double> f{input_lambda};
  for (const auto& l : layers) f.push_back(l.lambda);
  return f;
}

namespace {

double percentile_of_positive(std::vector<double>& values, double pct) {
  std::erase_if(values, [](double v) { return !(v > 0.0); });
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  // Nearest-rank percentile.
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values[rank - 1];
}

}  // namespace

SpikingNetwork convert(const ann::NetworkModel& model,
                       const std::vector<std::vector<double>>& calibration,
                       const ConversionConfig& cfg, const LIFParams& lif) {
  model.validate();
  cfg.validate();
  lif.validate();
  require(!calibration.empty(), "conversion needs a non-empty calibration set");

  std::vector<std::size_t> param_idx;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& s = model.layers[i];
    if (!s.has_params()) continue;
    const bool last = i + 1 == model.layers.size();
    require(last || s.activation == ann::Activation::ReLU,
            "conversion: hidden layer " + std::to_string(i) + " (" + ann::to_string(s.kind) +
                ") must use ReLU");
    param_idx.push_back(i);
  }
  require(param_idx.back() + 1 == model.layers.size(), "conversion: network must end in a parameterized layer");

  const bool softmax_out = model.layers.back().activation == ann::Activation::Softmax;
  std::vector<ann::ForwardTrace> traces;
  traces.reserve(calibration.size());
  double win_lo = std::numeric_limits<double>::infinity();
  double win_hi = -std::numeric_limits<double>::infinity();
  for (const auto& x : calibration) {
    require(static_cast<int>(x.size()) == model.input_len, "calibration sample has the wrong length");
    traces.push_back(ann::forward_trace(model, x));
    const auto& z = traces.back().pre.back();
    const double win = *std::max_element(z.begin(), z.end());
    win_lo = std::min(win_lo, win);
    win_hi = std::max(win_hi, win);
  }
  // (win_lo + c) = floor * (win_hi + c)
  double shift = 0.0;
  if (softmax_out && cfg.readout_floor > 0.0) {
    shift = std::max(0.0, (cfg.readout_floor * win_hi - win_lo) / (1.0 - cfg.readout_floor));
  }

  double input_max = 0.0;
  std::vector<std::vector<double>> acts(param_idx.size());
  for (std::size_t s = 0; s < calibration.size(); ++s) {
    const auto& x = calibration[s];
    require(static_cast<int>(x.size()) == model.input_len, "calibration sample has the wrong length");
    for (double v : x) {
      require(v >= 0.0, "conversion: rate-coded inputs must be non-negative");
      input_max = std::max(input_max, v);
    }
    const auto& tr = traces[s];
    for (std::size_t p = 0; p < param_idx.size(); ++p) {
      const auto li = param_idx[p];
      const bool last = li + 1 == model.layers.size();
      const auto& src = last ? tr.pre[li] : tr.post[li];
      const double add = last ? shift : 0.0;
      for (double v : src) acts[p].push_back(std::max(v + add, 0.0));
    }
  }
  require(input_max > 0.0, "conversion: calibration inputs are all zero");

  SpikingNetwork net;
  net.input_len = model.input_len;
  net.n_classes = model.n_classes;
  net.input_lambda = input_max;
  net.readout_shift = shift;
  net.lif = lif;
  net.conversion = cfg;
  net.transform = model.transform;
  net.class_names = model.class_names;
  net.architecture = model.architecture;

  double prev = input_max;
  for (std::size_t p = 0; p < param_idx.size(); ++p) {
    const auto li = param_idx[p];
    const auto& spec = model.layers[li];
    const double lam = percentile_of_positive(acts[p], cfg.norm_percentile);
    if (!(lam > 0.0)) {
      throw ValidationError("conversion: layer " + std::to_string(li) + " (" + ann::to_string(spec.kind) +
                            ") is dead: no positive activation on the calibration set");
    }
    SpikingLayer L;
    L.spec = spec;
    L.lambda = lam;
    L.weights = model.params[li].weights;
    L.biases = model.params[li].biases;
    if (li + 1 == model.layers.size()) {
      for (auto& b : L.biases) b += shift;
    }
    for (auto& w : L.weights) w *= prev / lam;
    for (auto& b : L.biases) b /= lam;
    net.layers.push_back(std::move(L));
    prev = lam;
  }
  net.validate();
  return net;
}

SpikingNetwork quantize(const SpikingNetwork& net, const QuantizationConfig& qcfg) {
  qcfg.validate();
  require(net.mode == Mode::Float, "quantize expects a float-mode network");
  require(net.lif.dt_ms / net.lif.tau_m_ms <= 0.5, "fixed-point leak needs dt / tau_m <= 0.5");
  SpikingNetwork q = net;
  q.mode = Mode::FixedPoint;
  q.quant = qcfg;
  q.lif.refractory_ms = 0.0;
  const double one = std::ldexp(1.0, qcfg.frac_bits());
  const double qmax = std::ldexp(1.0, qcfg.weight_bits - 1) - 1.0;
  for (auto& L : q.layers) {
    double maxabs = 0.0;
    for (double w : L.weights) maxabs = std::max(maxabs, std::abs(w));
    L.weight_scale = maxabs > 0.0 ? maxabs / qmax : 0.0;
    L.weight_codes.resize(L.weights.size());
    L.weight_fixed.resize(L.weights.size());
    for (std::size_t j = 0; j < L.weights.size(); ++j) {
      double code = 0.0;
      if (L.weight_scale > 0.0) code = std::clamp(std::nearbyint(L.weights[j] / L.weight_scale), -qmax, qmax);
      L.weight_codes[j] = static_cast<std::int32_t>(code);
      L.weight_fixed[j] = static_cast<std::int32_t>(std::nearbyint(code * L.weight_scale * one));
    }
    L.bias_fixed.resize(L.biases.size());
    for (std::size_t j = 0; j < L.biases.size(); ++j) {
      L.bias_fixed[j] = static_cast<std::int32_t>(std::nearbyint(L.biases[j] * one));
    }
  }
  q.validate();
  return q;
}

Simulator::Simulator(const SpikingNetwork& net) : net_(net) {
  net_.validate();
  const auto& lif = net.lif;
  lif_consts_ = {std::exp(-lif.dt_ms / lif.tau_syn_ms), lif.dt_ms / lif.tau_m_ms, lif.v_rest,
                 lif.v_reset, lif.v_thresh, lif.soft_reset, lif.refractory_steps()};
  if (net.mode == Mode::FixedPoint) {
    const int pb = net.quant.potential_bits;
    const double one = std::ldexp(1.0, net.quant.frac_bits());
    fixed_consts_ = {static_cast<std::int32_t>(std::nearbyint(lif.dt_ms / lif.tau_m_ms * 16384.0)),
                     static_cast<std::int32_t>(std::nearbyint(lif.v_rest * one)),
                     static_cast<std::int32_t>(std::nearbyint(lif.v_reset * one)),
                     static_cast<std::int32_t>(std::nearbyint(lif.v_thresh * one)),
                     -(std::int32_t{1} << (pb - 1)),
                     (std::int32_t{1} << (pb - 1)) - 1,
                     lif.soft_reset};
  }
  const double gain = lif.synaptic_gain();
  // Constant current whose steady per-step drive equals leak_offset().
  const double offset_i = lif.leak_offset() * (1.0 - std::exp(-lif.dt_ms / lif.tau_syn_ms)) * lif.tau_m_ms / lif.dt_ms;
  const std::int32_t offset_q = net.mode == Mode::FixedPoint
      ? static_cast<std::int32_t>(std::nearbyint(lif.leak_offset() * std::ldexp(1.0, net.quant.frac_bits())))
      : 0;
  const std::size_t nl = net.layers.size();
  w_t_.resize(nl);
  wq_t_.resize(nl);
  bias_eff_.resize(nl);
  biasq_eff_.resize(nl);
  fanout_.resize(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& L = net.layers[l];
    const auto& s = L.spec;
    const bool fixed = net.mode == Mode::FixedPoint;
    std::vector<double>& wt = w_t_[l];
    std::vector<std::int32_t>& wq = wq_t_[l];
    auto& fo = fanout_[l];
    const auto in_units = static_cast<std::size_t>(s.in_units);
    fo.first.assign(in_units, 0);
    fo.n_pos.assign(in_units, 0);
    fo.first_k.assign(in_units, 0);
    if (s.kind == ann::LayerKind::Conv1D) {
      const int K = s.kernel_size, C = s.in_channels, O = s.out_channels;
      // [k][c][o]
      if (fixed) wq.assign(L.weights.size(), 0);
      else wt.assign(L.weights.size(), 0.0);
      for (int o = 0; o < O; ++o) {
        for (int k = 0; k < K; ++k) {
          for (int c = 0; c < C; ++c) {
            const std::size_t src = (static_cast<std::size_t>(o) * K + k) * C + c;
            const std::size_t dst = (static_cast<std::size_t>(k) * C + c) * O + o;
            if (fixed) wq[dst] = L.weight_fixed[src];
            else wt[dst] = L.weights[src] * gain;
          }
        }
      }
      for (int p = 0; p < s.in_len; ++p) {
        // First output position t with t * stride + K > p.
        const int lo_clamped = p - K + 1 <= 0 ? 0 : (p - K + s.stride) / s.stride;
        const int hi = std::min(s.out_len - 1, p / s.stride);
        for (int c = 0; c < C; ++c) {
          const std::size_t j = static_cast<std::size_t>(p) * C + c;
          fo.first[j] = lo_clamped;
          fo.n_pos[j] = std::max(0, hi - lo_clamped + 1);
          fo.first_k[j] = p - lo_clamped * s.stride;
        }
      }
    } else {
      const auto O = static_cast<std::size_t>(s.out_units);
      if (fixed) wq.assign(L.weights.size(), 0);
      else wt.assign(L.weights.size(), 0.0);
      for (std::size_t o = 0; o < O; ++o) {
        for (std::size_t j = 0; j < in_units; ++j) {
          if (fixed) wq[j * O + o] = L.weight_fixed[o * in_units + j];
          else wt[j * O + o] = L.weights[o * in_units + j] * gain;
        }
      }
      std::fill(fo.n_pos.begin(), fo.n_pos.end(), 1);
    }
    // Per-neuron bias current: conv biases are per channel.
    bias_eff_[l].assign(L.units(), 0.0);
    biasq_eff_[l].assign(L.units(), 0);
    for (std::size_t u = 0; u < L.units(); ++u) {
      const std::size_t ch = s.kind == ann::LayerKind::Conv1D ? u % static_cast<std::size_t>(s.out_channels) : u;
      bias_eff_[l][u] = L.biases[ch] * gain + offset_i;
      if (fixed) biasq_eff_[l][u] = L.bias_fixed[ch] + offset_q;
    }
  }
  reset();
}

void Simulator::reset() {
  const std::size_t nl = net_.layers.size();
  v_.assign(nl, {});
  i_.assign(nl, {});
  acc_.assign(nl, {});
  vq_.assign(nl, {});
  accq_.assign(nl, {});
  refrac_.assign(nl, {});
  counts_.assign(nl, {});
  fired_idx_.assign(nl, {});
  last_.spiked.assign(nl, {});
  for (std::size_t l = 0; l < nl; ++l) {
    const auto n = net_.layers[l].units();
    if (net_.mode == Mode::Float) {
      v_[l].assign(n, net_.lif.v_rest);
      i_[l].assign(n, 0.0);
      acc_[l].assign(n, 0.0);
    } else {
      vq_[l].assign(n, fixed_consts_.v_rest);
      accq_[l].assign(n, 0);
    }
    refrac_[l].assign(n, 0);
    counts_[l].assign(n, 0);
    last_.spiked[l].assign(n, 0);
  }
  t_ = 0;
  syn_events_ = 0;
  saturations_ = 0;
}

void Simulator::set_bias_current(std::size_t layer, double value) {
  require(layer < bias_eff_.size(), "set_bias_current: layer out of range");
  std::fill(bias_eff_[layer].begin(), bias_eff_[layer].end(), value);
}

void Simulator::propagate(std::size_t l, const std::vector<std::int32_t>& sources) {
  const auto& s = net_.layers[l].spec;
  const auto& fo = fanout_[l];
  const auto& k = kernels::active();
  const bool fixed = net_.mode == Mode::FixedPoint;
  if (s.kind == ann::LayerKind::Conv1D) {
    const std::size_t C = static_cast<std::size_t>(s.in_channels);
    const std::size_t O = static_cast<std::size_t>(s.out_channels);
    for (auto j32 : sources) {
      const auto j = static_cast<std::size_t>(j32);
      const std::size_t c = j % C;
      const int npos = fo.n_pos[j];
      for (int m = 0; m < npos; ++m) {
        const std::size_t t = static_cast<std::size_t>(fo.first[j] + m);
        const std::size_t kk = static_cast<std::size_t>(fo.first_k[j] - m * s.stride);
        const std::size_t woff = (kk * C + c) * O;
        if (fixed) {
          const std::int32_t* w = wq_t_[l].data() + woff;
          std::int32_t* acc = accq_[l].data() + t * O;
          for (std::size_t o = 0; o < O; ++o) acc[o] += w[o];
        } else {
          k.axpy(1.0, w_t_[l].data() + woff, acc_[l].data() + t * O, O);
        }
      }
      syn_events_ += static_cast<std::uint64_t>(npos) * O;
    }
  } else {
    const std::size_t O = static_cast<std::size_t>(s.out_units);
    for (auto j32 : sources) {
      const auto j = static_cast<std::size_t>(j32);
      if (fixed) {
        const std::int32_t* w = wq_t_[l].data() + j * O;
        std::int32_t* acc = accq_[l].data();
        for (std::size_t o = 0; o < O; ++o) acc[o] += w[o];
      } else {
        k.axpy(1.0, w_t_[l].data() + j * O, acc_[l].data(), O);
      }
      syn_events_ += O;
    }
  }
}

void Simulator::check_finite(std::size_t l) const {
  const auto& v = v_[l];
  const auto& i = i_[l];
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (!std::isfinite(v[n]) || !std::isfinite(i[n])) {
      throw NumericError("non-finite state in layer " + std::to_string(l) + ", neuron " +
                         std::to_string(n) + " at step " + std::to_string(t_));
    }
  }
}

const StepResult& Simulator::step(const std::vector<std::int32_t>& input_spikes) {
  const auto& k = kernels::active();
  const std::uint64_t before = syn_events_;
  const std::vector<std::int32_t>* sources = &input_spikes;
  for (std::size_t l = 0; l < net_.layers.size(); ++l) {
    propagate(l, *sources);
    const std::size_t n = net_.layers[l].units();
    auto& mask = last_.spiked[l];
    if (net_.mode == Mode::Float) {
      k.lif_update(v_[l].data(), i_[l].data(), acc_[l].data(), bias_eff_[l].data(), refrac_[l].data(),
                   mask.data(), n, lif_consts_);
      check_finite(l);
    } else {
      k.fixed_lif_update(vq_[l].data(), accq_[l].data(), biasq_eff_[l].data(), mask.data(), n,
                         fixed_consts_, &saturations_);
    }
    auto& fired = fired_idx_[l];
    fired.clear();
    for (std::size_t u = 0; u < n; ++u) {
      if (mask[u]) {
        fired.push_back(static_cast<std::int32_t>(u));
        ++counts_[l][u];
      }
    }
    sources = &fired;
  }
  last_.synaptic_events = syn_events_ - before;
  ++t_;
  return last_;
}

SimulationResult simulate(const SpikingNetwork& net, const encode::RateCode& rates,
                          double presentation_ms, std::uint64_t seed,
                          const SimulationOptions& options) {
  net.validate();
  require(rates.rates_hz.size() == static_cast<std::size_t>(net.input_len),
          "simulate: rate code has " + std::to_string(rates.rates_hz.size()) + " units, network expects " +
              std::to_string(net.input_len));
  require(presentation_ms > 0.0, "simulate: presentation_ms must be > 0");
  const double dt = net.lif.dt_ms;
  const auto steps = encode::steps_for(presentation_ms, dt);

  std::vector<std::vector<std::int32_t>> by_step(static_cast<std::size_t>(steps));
  std::int64_t input_spikes = 0;
  for (std::size_t b = 0; b < rates.rates_hz.size(); ++b) {
    for (auto st : encode::poisson_spike_steps(rates.rates_hz[b], presentation_ms, dt,
                                               encode::input_seed(seed, b))) {
      by_step[static_cast<std::size_t>(st)].push_back(static_cast<std::int32_t>(b));
      ++input_spikes;
    }
  }

  const std::size_t nl = net.layers.size();
  const double bin_ms = options.summary_bin_ms > 0.0 ? options.summary_bin_ms : presentation_ms;
  const auto n_bins = static_cast<std::size_t>(std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(static_cast<double>(steps) * dt / bin_ms - 1e-9))));

  SimulationResult res;
  res.steps = steps;
  res.presentation_ms = presentation_ms;
  res.input_spikes = input_spikes;
  res.raster_summary.assign(nl + 1, std::vector<std::int64_t>(n_bins, 0));

  Simulator sim(net);
  for (std::int64_t t = 0; t < steps; ++t) {
    const auto& in = by_step[static_cast<std::size_t>(t)];
    const auto& out = sim.step(in);
    const double time_ms = static_cast<double>(t) * dt;
    const auto bin = std::min(n_bins - 1, static_cast<std::size_t>(time_ms / bin_ms));
    res.raster_summary[0][bin] += static_cast<std::int64_t>(in.size());
    if (options.raster_layer == -1) {
      for (auto j : in) res.raster.events.push_back({time_ms * 1000.0, j, 1});
    }
    for (std::size_t l = 0; l < nl; ++l) {
      std::int64_t c = 0;
      const auto& mask = out.spiked[l];
      for (std::size_t u = 0; u < mask.size(); ++u) {
        if (!mask[u]) continue;
        ++c;
        if (options.raster_layer == static_cast<int>(l)) {
          res.raster.events.push_back({time_ms * 1000.0, static_cast<std::int32_t>(u), 1});
        }
      }
      res.raster_summary[l + 1][bin] += c;
    }
  }

  res.synaptic_events = sim.synaptic_events();
  res.saturation_events = sim.saturation_events();
  res.output_counts = sim.spike_counts(nl - 1);
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& c = sim.spike_counts(l);
    std::int64_t total = 0;
    for (auto v : c) total += v;
    res.layer_spikes.push_back(total);
    res.layer_mean_rate_hz.push_back(static_cast<double>(total) /
                                     (static_cast<double>(c.size()) * presentation_ms / 1000.0));
    if (options.record_neuron_counts) res.neuron_counts.push_back(c);
  }
  return res;
}

Classification decide(const std::vector<std::int64_t>& counts) {
  require(!counts.empty(), "decide: no output counts");
  Classification c;
  c.counts = counts;
  const auto top = std::max_element(counts.begin(), counts.end());
  c.predicted = static_cast<int>(top - counts.begin());
  std::int64_t runner_up = -1;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (static_cast<int>(i) == c.predicted) continue;
    runner_up = std::max(runner_up, counts[i]);
    if (counts[i] == *top) c.tie = true;
  }
  c.confidence = runner_up < 0 ? *top : *top - runner_up;
  c.no_decision = *top == 0;
  return c;
}

Classification classify_prepared(const SpikingNetwork& net, const std::vector<double>& input,
                                 const ClassifyConfig& cfg) {
  const auto rates = encode::values_to_rates(input, cfg.max_rate_hz);
  auto run = simulate(net, rates, cfg.presentation_ms, cfg.seed);
  auto c = decide(run.output_counts);
  c.run = std::move(run);
  return c;
}

Classification classify(const SpikingNetwork& net, const std::vector<std::int64_t>& counts,
                        const ClassifyConfig& cfg) {
  for (auto v : counts) require(v >= 0, "classify: histogram has negative counts");
  const auto x = preprocess::prepare(net.transform, std::vector<double>(counts.begin(), counts.end()));
  return classify_prepared(net, x, cfg);
}

CostReport event_cost_report(const SimulationResult& run, const ann::NetworkModel& model) {
  CostReport r;
  r.snn_synaptic_ops = run.synaptic_events;
  r.ann_macs = model.mac_count();
  r.ratio = r.ann_macs > 0 ? static_cast<double>(r.snn_synaptic_ops) / static_cast<double>(r.ann_macs) : 0.0;
  return r;
}

void add_rate_sweep(CostReport& report, const SpikingNetwork& net, const std::vector<double>& input,
                    const std::vector<double>& max_rates_hz, double presentation_ms,
                    std::uint64_t seed) {
  require(max_rates_hz.size() >= 2, "rate sweep needs at least two rates");
  report.curve.clear();
  for (double r : max_rates_hz) {
    require(r >= 0.0, "rate sweep: negative rate");
    encode::RateCode rc;
    if (r > 0.0) {
      rc = encode::values_to_rates(input, r);
    } else {
      rc.rates_hz.assign(input.size(), 0.0);
    }
    const auto run = simulate(net, rc, presentation_ms, seed);
    report.curve.push_back({r, run.synaptic_events});
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const auto n = static_cast<double>(report.curve.size());
  for (const auto& p : report.curve) {
    const double x = p.input_max_rate_hz, y = static_cast<double>(p.synaptic_ops);
    sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
  }
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  report.curve_slope = vx > 0.0 ? cxy / vx : 0.0;
  report.curve_intercept = (sy - report.curve_slope * sx) / n;
  report.curve_r2 = (vx > 0.0 && vy > 0.0) ? (cxy * cxy) / (vx * vy) : 0.0;
}

}  // namespace spikeid::snn
