#pragma once

// Rate-coded spiking networks converted from trained ReLU classifiers.
//
// Neurons are current-based LIF units in threshold-normalized units, updated
// with an exponential-Euler step at dt:
//
//   i_syn <- i_syn * exp(-dt/tau_syn) + sum_j w_j x_j(t) + b
//   v     <- v + (dt/tau_m)(v_rest - v) + (dt/tau_m) i_syn
//   v >= v_thresh  =>  spike, reset (hard: v_reset, soft: v - v_thresh)
//
// Convolutions are applied implicitly: each presynaptic spike adds its weight
// column to the affected output positions, so a dense synapse matrix is never
// materialized.

#include <cstdint>
#include <string>
#include <vector>

#include "spikeid/ann.hpp"
#include "spikeid/encode.hpp"
#include "spikeid/kernels.hpp"

namespace spikeid::snn {

struct LIFParams {
  double tau_m_ms = 20.0;
  double tau_syn_ms = 5.0;
  double v_rest = 0.0;
  double v_reset = 0.0;
  double v_thresh = 1.0;
  double refractory_ms = 0.0;
  double dt_ms = 1.0;
  bool soft_reset = false;
  // Scale synaptic input by (1 - exp(-dt/tau_syn)) * tau_m / dt so that the
  // steady membrane drive per step equals the normalized ANN activation.
  bool compensate_synapse = true;
  // Inject a constant (v_thresh - v_rest) * dt / (2 tau_m) per step. Above
  // threshold the LIF rate is about drive - that offset, so this restores a
  // near-identity rate transfer without making a silent neuron fire.
  bool compensate_leak = true;

  void validate() const;
  double synaptic_gain() const;
  // Per-step membrane drive added by compensate_leak (0 when off).
  double leak_offset() const;
  int refractory_steps() const;
};

enum class Mode { Float, FixedPoint };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct QuantizationConfig {
  int weight_bits = 8;
  int potential_bits = 16;

  void validate() const;
  // Fraction bits of the membrane potential; 3 integer bits plus sign.
  int frac_bits() const { return potential_bits - 4; }
};

struct ConversionConfig {
  double norm_percentile = 99.9;
  double presentation_ms = 500.0;
  double input_max_rate_hz = 1000.0;
  // Softmax ignores a common logit shift but the spiking readout clips at
  // zero. Output biases are shifted so the weakest calibration winner reaches
  // this fraction of the strongest one. 0 disables the shift.
  double readout_floor = 0.25;

  void validate() const;
};

struct SpikingLayer {
  ann::LayerSpec spec;          // geometry of the source ANN layer
  std::vector<double> weights;  // normalized, source layout
  std::vector<double> biases;   // normalized, injected as constant current
  double lambda = 1.0;          // activation normalization factor
  // Fixed-point mode only.
  double weight_scale = 0.0;
  std::vector<std::int32_t> weight_codes;  // two's-complement codes, source layout
  std::vector<std::int32_t> bias_fixed;    // per-step charge in potential units
  std::vector<std::int32_t> weight_fixed;  // per-spike charge in potential units

  std::size_t units() const { return static_cast<std::size_t>(spec.out_units); }
};

struct SpikingNetwork {
  int input_len = 0;
  int n_classes = 0;
  double input_lambda = 1.0;
  double readout_shift = 0.0;  // added to every output logit before normalization
  std::vector<SpikingLayer> layers;  // parameterized layers only
  LIFParams lif;
  Mode mode = Mode::Float;
  QuantizationConfig quant;
  ConversionConfig conversion;
  std::vector<std::string> class_names;
  preprocess::InputTransform transform;
  std::string architecture;

  void validate() const;
  std::size_t parameter_count() const;
  std::vector<std::size_t> layer_units() const;
  std::vector<double> normalization_factors() const;
};

// Data-based weight normalization: lambda_l is the norm_percentile of the
// positive activations of layer l over `calibration` (prepared ANN inputs),
// lambda_0 the largest calibration input. Weights scale by
// lambda_{l-1}/lambda_l, biases by 1/lambda_l.
SpikingNetwork convert(const ann::NetworkModel& model,
                       const std::vector<std::vector<double>>& calibration,
                       const ConversionConfig& cfg, const LIFParams& lif = {});

// Fixed-point copy: per-layer symmetric weight quantization with scale
// max|w| / (2^(bits-1) - 1), round-to-nearest-even, potentials in
// potential_bits fixed point, binary synaptic input, instantaneous charge
// injection and no refractory period.
SpikingNetwork quantize(const SpikingNetwork& net, const QuantizationConfig& qcfg);

struct StepResult {
  std::vector<std::vector<std::uint8_t>> spiked;  // per layer
  std::uint64_t synaptic_events = 0;
};

// Mutable simulation state for one run. Owns its buffers; not shared.
class Simulator {
 public:
  explicit Simulator(const SpikingNetwork& net);

  void reset();
  // Advance one timestep given the indices of input units that spike now.
  const StepResult& step(const std::vector<std::int32_t>& input_spikes);

  std::int64_t time_step() const { return t_; }
  const std::vector<double>& v(std::size_t layer) const { return v_[layer]; }
  const std::vector<double>& i_syn(std::size_t layer) const { return i_[layer]; }
  const std::vector<std::int32_t>& v_fixed(std::size_t layer) const { return vq_[layer]; }
  const std::vector<std::int64_t>& spike_counts(std::size_t layer) const { return counts_[layer]; }
  std::uint64_t synaptic_events() const { return syn_events_; }
  std::uint64_t saturation_events() const { return saturations_; }

  // Override the per-step bias current of a layer (float mode), e.g. to
  // apply a constant drive in tests.
  void set_bias_current(std::size_t layer, double value);

 private:
  struct Fanout {
    // For input j: the first output position it reaches, how many, and the
    // kernel offset at that first position.
    std::vector<std::int32_t> first, n_pos, first_k;
  };

  void propagate(std::size_t layer, const std::vector<std::int32_t>& sources);
  void check_finite(std::size_t layer) const;

  const SpikingNetwork& net_;
  kernels::LifConsts lif_consts_{};
  kernels::FixedConsts fixed_consts_{};
  std::vector<std::vector<double>> w_t_;        // transposed effective weights [in][..][out]
  std::vector<std::vector<std::int32_t>> wq_t_;
  std::vector<std::vector<double>> bias_eff_;
  std::vector<std::vector<std::int32_t>> biasq_eff_;
  std::vector<Fanout> fanout_;
  std::vector<std::vector<double>> v_, i_, acc_;
  std::vector<std::vector<std::int32_t>> vq_, accq_, refrac_;
  std::vector<std::vector<std::int64_t>> counts_;
  std::vector<std::vector<std::int32_t>> fired_idx_;
  StepResult last_;
  std::int64_t t_ = 0;
  std::uint64_t syn_events_ = 0;
  std::uint64_t saturations_ = 0;
};

struct SimulationOptions {
  bool record_neuron_counts = false;
  int raster_layer = -2;          // -1 input, 0.. network layers, -2 none
  double summary_bin_ms = 10.0;   // raster summary resolution
};

struct SimulationResult {
  std::vector<std::int64_t> output_counts;
  std::vector<double> layer_mean_rate_hz;        // per network layer
  std::vector<std::int64_t> layer_spikes;        // per network layer
  std::vector<std::vector<std::int64_t>> neuron_counts;  // if recorded
  std::int64_t input_spikes = 0;
  std::uint64_t synaptic_events = 0;
  std::uint64_t saturation_events = 0;
  std::int64_t steps = 0;
  double presentation_ms = 0.0;
  // spike counts per layer (input first) per summary bin
  std::vector<std::vector<std::int64_t>> raster_summary;
  encode::EventStream raster;  // events of options.raster_layer
};

// Poisson inputs (same per-bin seeds as encode::rates_to_event_stream), then
// presentation/dt steps of the network.
SimulationResult simulate(const SpikingNetwork& net, const encode::RateCode& rates,
                          double presentation_ms, std::uint64_t seed,
                          const SimulationOptions& options = {});

struct Classification {
  int predicted = 0;
  std::vector<std::int64_t> counts;
  std::int64_t confidence = 0;  // top count minus runner-up
  bool tie = false;
  bool no_decision = false;
  SimulationResult run;
};

struct ClassifyConfig {
  double presentation_ms = 500.0;
  double max_rate_hz = 1000.0;
  std::uint64_t seed = 1;
};

// Argmax of output spike counts; ties go to the lowest class index.
Classification decide(const std::vector<std::int64_t>& counts);
Classification classify(const SpikingNetwork& net, const std::vector<std::int64_t>& counts,
                        const ClassifyConfig& cfg);
Classification classify_prepared(const SpikingNetwork& net, const std::vector<double>& input,
                                 const ClassifyConfig& cfg);

struct CostPoint {
  double input_max_rate_hz = 0.0;
  std::uint64_t synaptic_ops = 0;
};

struct CostReport {
  std::uint64_t snn_synaptic_ops = 0;
  std::uint64_t ann_macs = 0;
  double ratio = 0.0;  // snn_synaptic_ops / ann_macs
  std::vector<CostPoint> curve;
  double curve_slope = 0.0;
  double curve_intercept = 0.0;
  double curve_r2 = 0.0;
};

CostReport event_cost_report(const SimulationResult& run, const ann::NetworkModel& model);
// Synaptic ops of one presentation of `input` at each max rate, plus the
// least-squares line through them.
void add_rate_sweep(CostReport& report, const SpikingNetwork& net, const std::vector<double>& input,
                    const std::vector<double>& max_rates_hz, double presentation_ms,
                    std::uint64_t seed);

}  // namespace spikeid::snn
