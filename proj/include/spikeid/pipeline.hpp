#pragma once

// Experiment configuration and the stages that chain the modules into the
// frame-based baseline (histogram -> ANN) and the event-based path
// (histogram -> spikes -> SNN).

#include <cstdint>
#include <string>
#include <vector>

#include "spikeid/ann.hpp"
#include "spikeid/io.hpp"
#include "spikeid/snn.hpp"
#include "spikeid/spectra.hpp"

namespace spikeid::pipeline {

struct DatasetConfig {
  std::string templates;  // empty: built-in templates
  int bins = 512;
  int per_cell = 20;
  double split = 0.5;
  std::vector<double> distances_m = spectra::kDefaultDistances;
  std::vector<bool> phantom = {false, true};
  double integration_s = 1.0;
  double source_rate_ref = 50000.0;
  double ambient_rate_cps = 30.0;
  double phantom_attenuation = 0.7;
};

struct PreprocessConfig {
  bool smooth = false;
  int window_half_width = 3;
  int degree = 2;
  bool stabilize = false;
  int pca_k = 0;  // 0 disables projection
};

struct AnnConfig {
  double scale = 0.25;
  ann::TrainConfig train;
};

struct ConvertConfig {
  snn::ConversionConfig conversion;
  int calibration_samples = 20;
  snn::LIFParams lif;
};

struct EvalConfig {
  int snn_samples = 100;
  std::vector<double> presentations_ms = {100.0, 200.0, 500.0, 1000.0};
  std::vector<int> weight_bits = {8};
  std::vector<double> cost_rates_hz = {0, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  int threads = 1;
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  DatasetConfig dataset;
  PreprocessConfig preprocess;
  AnnConfig ann;
  ConvertConfig convert;
  snn::QuantizationConfig quant;
  EvalConfig eval;
};

io::Json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const io::Json& j);
ExperimentConfig read_config(const std::string& path);
std::string config_hash(const ExperimentConfig& c);

spectra::TemplateSet load_templates(const DatasetConfig& d);
spectra::DetectorModel detector(const DatasetConfig& d);
std::vector<spectra::AcquisitionConfig> acquisition_grid(const DatasetConfig& d);
spectra::DatasetSplit synthesize(const ExperimentConfig& c);

// Fit the conditioning chain on the training set (PCA needs data).
preprocess::InputTransform fit_transform(const PreprocessConfig& p, const spectra::Dataset& train);
ann::Batch to_batch(const ann::NetworkModel& model, const spectra::Dataset& ds);
ann::TrainResult train_model(const ExperimentConfig& c, const spectra::Dataset& train);

// Evenly spaced indices into [0, size), at most `count` of them.
std::vector<std::size_t> spread_indices(std::size_t size, std::size_t count);
std::vector<std::vector<double>> calibration_inputs(const ann::NetworkModel& model,
                                                    const spectra::Dataset& train, int count);
snn::SpikingNetwork convert_model(const ExperimentConfig& c, const ann::NetworkModel& model,
                                  const spectra::Dataset& train);

std::uint64_t sample_seed(std::uint64_t root, std::size_t index);

struct SnnEvaluation {
  std::string mode;
  bool soft_reset = false;
  int weight_bits = 0;
  double presentation_ms = 0.0;
  ann::Metrics metrics;
  std::int64_t no_decision = 0;
  std::int64_t ties = 0;
  double mean_synaptic_ops = 0.0;
  std::uint64_t saturation_events = 0;
};

// Classify the samples at `indices` of `ds`. Each sample gets its own seed,
// so the result does not depend on `threads`.
SnnEvaluation evaluate_snn(const snn::SpikingNetwork& net, const spectra::Dataset& ds,
                           const std::vector<std::size_t>& indices, double presentation_ms,
                           double max_rate_hz, std::uint64_t seed, int threads = 1);

std::vector<int> ann_predictions(const ann::NetworkModel& model, const spectra::Dataset& ds,
                                 const std::vector<std::size_t>& indices);

io::Json evaluation_to_json(const SnnEvaluation& e);

struct RunOutputs {
  io::Json report;
  io::Json timings;
};

// ANN metrics on the full test set; SNN metrics for every presentation and
// fixed-point width; event-cost table on the first SNN sample.
RunOutputs run_evaluation(const ExperimentConfig& c, const ann::NetworkModel& model,
                          const snn::SpikingNetwork& net, const spectra::Dataset& test);

// CLI entry point. Returns the process exit code: 0 ok, 2 validation, 3 numeric.
int run_cli(int argc, const char* const* argv);

}  // namespace spikeid::pipeline
