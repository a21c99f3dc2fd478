#pragma once

// Small 1-D convolutional classifier over energy histograms: construction,
// forward pass, backpropagation, training and evaluation.
//
// Activations use a channel-last layout: a tensor of length L with C
// channels is stored as [L][C]. Conv1D weights are [out][kernel][in] so that
// each filter's receptive field is one contiguous dot product; Dense weights
// are [out][in].

#include <cstdint>
#include <string>
#include <vector>

#include "spikeid/preprocess.hpp"

namespace spikeid::ann {

enum class LayerKind { Conv1D, Dense, Flatten };
enum class Activation { None, ReLU, Softmax };

std::string to_string(LayerKind k);
std::string to_string(Activation a);
LayerKind parse_layer_kind(const std::string& s);
Activation parse_activation(const std::string& s);

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  Activation activation = Activation::None;
  // Conv1D geometry (valid padding).
  int in_channels = 1;
  int out_channels = 1;
  int kernel_size = 1;
  int stride = 1;
  int in_len = 1;
  int out_len = 1;
  // Dense geometry; for every kind in_units/out_units hold the flat sizes.
  int in_units = 0;
  int out_units = 0;

  std::size_t weight_count() const;
  std::size_t bias_count() const;
  std::size_t macs() const;
  bool has_params() const { return kind != LayerKind::Flatten; }
};

LayerSpec conv1d(int in_channels, int out_channels, int kernel_size, int stride, Activation act);
LayerSpec dense(int out_units, Activation act);
LayerSpec flatten();

struct LayerParams {
  std::vector<double> weights;
  std::vector<double> biases;
};

struct NetworkModel {
  int input_len = 0;
  int n_classes = 0;
  std::vector<LayerSpec> layers;
  std::vector<LayerParams> params;  // one entry per layer (empty for Flatten)
  std::vector<std::string> class_names;
  preprocess::InputTransform transform;
  std::string architecture = "custom";

  void validate() const;
  std::size_t parameter_count() const;
  // Unit counts of the parameterized layers, e.g. [51696, 12896, 6].
  std::vector<std::size_t> layer_units() const;
  // Multiply-accumulates of one forward pass; independent of the input.
  std::size_t mac_count() const;
};

// Resolve shapes for `specs` applied to an input of length `input_len` (one
// channel). Geometry that leaves no output position is rejected.
NetworkModel make_network(int input_len, std::vector<LayerSpec> specs);

// Glorot-uniform weights, zero biases.
void initialize(NetworkModel& model, std::uint64_t seed);

// Conv1D(1 -> 16f, k8, s1) ReLU -> Conv1D(16f -> 16f, k11, s4) ReLU -> Flatten
// -> Dense(n_classes) Softmax, with f = scale (filters at least 2). At
// input 3238 and scale 1 the unit counts are 51696, 12896 and n_classes.
NetworkModel build_paper_architecture(int input_len, int n_classes, double scale,
                                      std::uint64_t seed);

// Raw counts -> transform chain -> divide by max |x| (zeros stay zeros).
std::vector<double> prepare_input(const NetworkModel& model, const std::vector<double>& raw);
std::vector<double> prepare_input(const NetworkModel& model, const std::vector<std::int64_t>& counts);

struct ForwardTrace {
  std::vector<std::vector<double>> pre;   // per layer, before activation
  std::vector<std::vector<double>> post;  // per layer, after activation
};

ForwardTrace forward_trace(const NetworkModel& model, const std::vector<double>& input);
std::vector<double> forward(const NetworkModel& model, const std::vector<double>& input);
int predict(const NetworkModel& model, const std::vector<double>& input);

struct Batch {
  std::vector<std::vector<double>> inputs;
  std::vector<int> labels;
};

struct Gradients {
  std::vector<LayerParams> layers;
  double loss = 0.0;  // mean cross-entropy over the batch
};

// Gradients of the mean categorical cross-entropy.
Gradients grad(const NetworkModel& model, const Batch& batch);
double loss(const NetworkModel& model, const Batch& batch);

enum class Optimizer { SGD, Momentum, Adam };
std::string to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& s);

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 30;
  int batch_size = 32;
  Optimizer optimizer = Optimizer::Adam;
  std::uint64_t seed = 1;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Project hidden-layer biases onto b <= 0 after every step, so a zero input
  // leaves every hidden unit inactive (and its spiking copy silent).
  bool nonpositive_hidden_bias = true;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 0 is the untrained model
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  NetworkModel model;
  std::vector<EpochStats> trace;
};

TrainResult train(NetworkModel model, const Batch& data, const TrainConfig& cfg);

struct Metrics {
  double accuracy = 0.0;
  std::vector<std::vector<std::int64_t>> confusion;  // rows = true class
  std::vector<double> precision;
  std::vector<double> recall;
  std::size_t total = 0;
};

Metrics metrics_from_predictions(const std::vector<int>& predicted, const std::vector<int>& truth,
                                 int n_classes);
Metrics evaluate(const NetworkModel& model, const Batch& data);

}  // namespace spikeid::ann
