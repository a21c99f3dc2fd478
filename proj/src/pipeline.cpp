#include "spikeid/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#include "spikeid/common.hpp"
#include "spikeid/kernels.hpp"

namespace spikeid::pipeline {

io::Json config_to_json(const ExperimentConfig& c) {
  io::Json j;
  j["schema_version"] = io::kSchemaVersion;
  j["kind"] = "experiment_config";
  j["seed"] = c.seed;
  const auto& d = c.dataset;
  std::vector<int> phantom;
  for (bool p : d.phantom) phantom.push_back(p ? 1 : 0);
  j["dataset"] = {{"templates", d.templates},
                  {"bins", d.bins},
                  {"per_cell", d.per_cell},
                  {"split", d.split},
                  {"distances_m", d.distances_m},
                  {"phantom", phantom},
                  {"integration_s", d.integration_s},
                  {"source_rate_ref", d.source_rate_ref},
                  {"ambient_rate_cps", d.ambient_rate_cps},
                  {"phantom_attenuation", d.phantom_attenuation}};
  const auto& p = c.preprocess;
  j["preprocess"] = {{"smooth", p.smooth}, {"window_half_width", p.window_half_width}, {"degree", p.degree},
                     {"stabilize", p.stabilize}, {"pca_k", p.pca_k}};
  const auto& t = c.ann.train;
  j["ann"] = {{"scale", c.ann.scale},
              {"optimizer", ann::to_string(t.optimizer)},
              {"learning_rate", t.learning_rate},
              {"epochs", t.epochs},
              {"batch_size", t.batch_size},
              {"nonpositive_hidden_bias", t.nonpositive_hidden_bias}};
  j["conversion"] = {{"norm_percentile", c.convert.conversion.norm_percentile},
                     {"presentation_ms", c.convert.conversion.presentation_ms},
                     {"input_max_rate_hz", c.convert.conversion.input_max_rate_hz},
                     {"readout_floor", c.convert.conversion.readout_floor},
                     {"calibration_samples", c.convert.calibration_samples}};
  j["lif"] = io::lif_to_json(c.convert.lif);
  j["quantization"] = {{"weight_bits", c.quant.weight_bits}, {"potential_bits", c.quant.potential_bits}};
  j["evaluate"] = {{"snn_samples", c.eval.snn_samples},
                   {"presentations_ms", c.eval.presentations_ms},
                   {"weight_bits", c.eval.weight_bits},
                   {"cost_rates_hz", c.eval.cost_rates_hz},
                   {"threads", c.eval.threads}};
  return j;
}

ExperimentConfig config_from_json(const io::Json& j) {
  require(j.is_object(), "experiment config must be a JSON object");
  require(j.value("schema_version", 0) == io::kSchemaVersion, "experiment config: unsupported or missing schema_version");
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      auto& o = c.dataset;
      o.templates = d.value("templates", o.templates);
      o.bins = d.value("bins", o.bins);
      o.per_cell = d.value("per_cell", o.per_cell);
      o.split = d.value("split", o.split);
      o.distances_m = d.value("distances_m", o.distances_m);
      if (d.contains("phantom")) {
        o.phantom.clear();
        for (const auto& v : d["phantom"]) o.phantom.push_back(v.is_boolean() ? v.get<bool>() : v.get<int>() != 0);
      }
      o.integration_s = d.value("integration_s", o.integration_s);
      o.source_rate_ref = d.value("source_rate_ref", o.source_rate_ref);
      o.ambient_rate_cps = d.value("ambient_rate_cps", o.ambient_rate_cps);
      o.phantom_attenuation = d.value("phantom_attenuation", o.phantom_attenuation);
    }
    if (j.contains("preprocess")) {
      const auto& p = j["preprocess"];
      auto& o = c.preprocess;
      o.smooth = p.value("smooth", o.smooth);
      o.window_half_width = p.value("window_half_width", o.window_half_width);
      o.degree = p.value("degree", o.degree);
      o.stabilize = p.value("stabilize", o.stabilize);
      o.pca_k = p.value("pca_k", o.pca_k);
    }
    if (j.contains("ann")) {
      const auto& a = j["ann"];
      c.ann.scale = a.value("scale", c.ann.scale);
      if (a.contains("optimizer")) c.ann.train.optimizer = ann::parse_optimizer(a["optimizer"].get<std::string>());
      c.ann.train.learning_rate = a.value("learning_rate", c.ann.train.learning_rate);
      c.ann.train.epochs = a.value("epochs", c.ann.train.epochs);
      c.ann.train.batch_size = a.value("batch_size", c.ann.train.batch_size);
      c.ann.train.nonpositive_hidden_bias = a.value("nonpositive_hidden_bias", c.ann.train.nonpositive_hidden_bias);
    }
    if (j.contains("conversion")) {
      const auto& v = j["conversion"];
      auto& o = c.convert.conversion;
      o.norm_percentile = v.value("norm_percentile", o.norm_percentile);
      o.presentation_ms = v.value("presentation_ms", o.presentation_ms);
      o.input_max_rate_hz = v.value("input_max_rate_hz", o.input_max_rate_hz);
      o.readout_floor = v.value("readout_floor", o.readout_floor);
      c.convert.calibration_samples = v.value("calibration_samples", c.convert.calibration_samples);
    }
    if (j.contains("lif")) c.convert.lif = io::lif_from_json(j["lif"]);
    if (j.contains("quantization")) {
      const auto& q = j["quantization"];
      c.quant.weight_bits = q.value("weight_bits", c.quant.weight_bits);
      c.quant.potential_bits = q.value("potential_bits", c.quant.potential_bits);
    }
    if (j.contains("evaluate")) {
      const auto& e = j["evaluate"];
      c.eval.snn_samples = e.value("snn_samples", c.eval.snn_samples);
      c.eval.presentations_ms = e.value("presentations_ms", c.eval.presentations_ms);
      c.eval.weight_bits = e.value("weight_bits", c.eval.weight_bits);
      c.eval.cost_rates_hz = e.value("cost_rates_hz", c.eval.cost_rates_hz);
      c.eval.threads = e.value("threads", c.eval.threads);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig read_config(const std::string& path) { return config_from_json(io::read_json(path)); }

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(c).dump())));
  return buf;
}

spectra::TemplateSet load_templates(const DatasetConfig& d) {
  return d.templates.empty() ? spectra::default_templates() : io::read_templates(d.templates);
}

spectra::DetectorModel detector(const DatasetConfig& d) { return spectra::detector_with_bins(d.bins); }

std::vector<spectra::AcquisitionConfig> acquisition_grid(const DatasetConfig& d) {
  require(!d.distances_m.empty() && !d.phantom.empty(), "acquisition grid needs distances and phantom settings");
  std::vector<spectra::AcquisitionConfig> grid;
  for (bool ph : d.phantom) {
    for (double dist : d.distances_m) {
      spectra::AcquisitionConfig a;
      a.distance_m = dist;
      a.phantom = ph;
      a.integration_time_s = d.integration_s;
      a.source_rate_ref = d.source_rate_ref;
      a.ambient_rate_cps = d.ambient_rate_cps;
      a.phantom_attenuation = d.phantom_attenuation;
      a.validate();
      grid.push_back(a);
    }
  }
  return grid;
}

spectra::DatasetSplit synthesize(const ExperimentConfig& c) {
  return spectra::generate_dataset(load_templates(c.dataset), detector(c.dataset), acquisition_grid(c.dataset),
                                   c.dataset.per_cell, c.dataset.split, c.seed);
}

preprocess::InputTransform fit_transform(const PreprocessConfig& p, const spectra::Dataset& train) {
  preprocess::InputTransform t;
  if (p.smooth) {
    t.smoother = preprocess::SmootherConfig{p.window_half_width, p.degree};
    t.smoother->validate();
  }
  t.stabilize = p.stabilize;
  if (p.pca_k > 0) {
    require(!train.samples.empty(), "PCA needs a non-empty training set");
    const int n = static_cast<int>(train.samples.front().counts.size());
    const int m = static_cast<int>(train.samples.size());
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m) * n);
    for (const auto& h : train.samples) {
      const auto x = t.apply(std::vector<double>(h.counts.begin(), h.counts.end()));
      data.insert(data.end(), x.begin(), x.end());
    }
    t.pca = preprocess::fit_pca(data, m, n, p.pca_k);
  }
  return t;
}

ann::Batch to_batch(const ann::NetworkModel& model, const spectra::Dataset& ds) {
  ann::Batch b;
  for (const auto& h : ds.samples) {
    require(h.label.has_value(), "dataset sample without a label");
    b.inputs.push_back(ann::prepare_input(model, h.counts));
    b.labels.push_back(*h.label);
  }
  return b;
}

ann::TrainResult train_model(const ExperimentConfig& c, const spectra::Dataset& train) {
  require(!train.samples.empty(), "training set is empty");
  const int raw_len = static_cast<int>(train.samples.front().counts.size());
  auto transform = fit_transform(c.preprocess, train);
  const int n_classes = static_cast<int>(train.class_names.size());
  auto model = ann::build_paper_architecture(transform.output_len(raw_len), n_classes, c.ann.scale,
                                             derive_seed(c.seed, {0x1417u}));
  model.transform = std::move(transform);
  model.class_names = train.class_names;
  auto tc = c.ann.train;
  tc.seed = derive_seed(c.seed, {0x7EA1u});
  const auto batch = to_batch(model, train);
  return ann::train(std::move(model), batch, tc);
}

std::vector<std::size_t> spread_indices(std::size_t size, std::size_t count) {
  std::vector<std::size_t> idx;
  if (size == 0 || count == 0) return idx;
  count = std::min(count, size);
  for (std::size_t i = 0; i < count; ++i) idx.push_back(i * size / count);
  return idx;
}

std::vector<std::vector<double>> calibration_inputs(const ann::NetworkModel& model,
                                                    const spectra::Dataset& train, int count) {
  require(count >= 1, "calibration_samples must be >= 1");
  std::vector<std::vector<double>> out;
  for (auto i : spread_indices(train.samples.size(), static_cast<std::size_t>(count))) {
    out.push_back(ann::prepare_input(model, train.samples[i].counts));
  }
  require(!out.empty(), "calibration set is empty");
  return out;
}

snn::SpikingNetwork convert_model(const ExperimentConfig& c, const ann::NetworkModel& model,
                                  const spectra::Dataset& train) {
  return snn::convert(model, calibration_inputs(model, train, c.convert.calibration_samples),
                      c.convert.conversion, c.convert.lif);
}

std::uint64_t sample_seed(std::uint64_t root, std::size_t index) {
  return derive_seed(root, {0x5EEDu, static_cast<std::uint64_t>(index)});
}

SnnEvaluation evaluate_snn(const snn::SpikingNetwork& net, const spectra::Dataset& ds,
                           const std::vector<std::size_t>& indices, double presentation_ms,
                           double max_rate_hz, std::uint64_t seed, int threads) {
  require(!indices.empty(), "SNN evaluation needs at least one sample");
  struct Item {
    int predicted = 0;
    bool tie = false;
    bool none = false;
    std::uint64_t ops = 0;
    std::uint64_t sat = 0;
  };
  std::vector<Item> items(indices.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto i = indices[k];
      snn::ClassifyConfig cc{presentation_ms, max_rate_hz, sample_seed(seed, i)};
      const auto r = snn::classify(net, ds.samples[i].counts, cc);
      items[k] = {r.predicted, r.tie, r.no_decision, r.run.synaptic_events, r.run.saturation_events};
    }
  };
  const auto nthreads = static_cast<std::size_t>(std::max(1, threads));
  if (nthreads == 1) {
    work(0, items.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (items.size() + nthreads - 1) / nthreads;
    for (std::size_t b = 0; b < items.size(); b += chunk) {
      pool.emplace_back(work, b, std::min(items.size(), b + chunk));
    }
    for (auto& t : pool) t.join();
  }
  SnnEvaluation e;
  e.mode = snn::to_string(net.mode);
  e.soft_reset = net.lif.soft_reset;
  e.weight_bits = net.mode == snn::Mode::FixedPoint ? net.quant.weight_bits : 0;
  e.presentation_ms = presentation_ms;
  std::vector<int> pred, truth;
  double ops = 0.0;
  for (std::size_t k = 0; k < items.size(); ++k) {
    pred.push_back(items[k].predicted);
    truth.push_back(ds.samples[indices[k]].label.value());
    e.ties += items[k].tie ? 1 : 0;
    e.no_decision += items[k].none ? 1 : 0;
    e.saturation_events += items[k].sat;
    ops += static_cast<double>(items[k].ops);
  }
  e.mean_synaptic_ops = ops / static_cast<double>(items.size());
  e.metrics = ann::metrics_from_predictions(pred, truth, net.n_classes);
  return e;
}

std::vector<int> ann_predictions(const ann::NetworkModel& model, const spectra::Dataset& ds,
                                 const std::vector<std::size_t>& indices) {
  std::vector<int> out;
  for (auto i : indices) out.push_back(ann::predict(model, ann::prepare_input(model, ds.samples[i].counts)));
  return out;
}

io::Json evaluation_to_json(const SnnEvaluation& e) {
  return {{"mode", e.mode},
          {"reset", e.soft_reset ? "soft" : "hard"},
          {"weight_bits", e.weight_bits},
          {"presentation_ms", e.presentation_ms},
          {"accuracy", e.metrics.accuracy},
          {"no_decision", e.no_decision},
          {"ties", e.ties},
          {"mean_synaptic_ops", e.mean_synaptic_ops},
          {"saturation_events", e.saturation_events},
          {"metrics", io::metrics_to_json(e.metrics)}};
}

RunOutputs run_evaluation(const ExperimentConfig& c, const ann::NetworkModel& model,
                          const snn::SpikingNetwork& net, const spectra::Dataset& test) {
  using Clock = std::chrono::steady_clock;
  auto seconds = [](Clock::time_point a) {
    return std::chrono::duration<double>(Clock::now() - a).count();
  };
  RunOutputs out;
  out.timings["schema_version"] = io::kSchemaVersion;
  out.timings["kind"] = "timings";

  auto t0 = Clock::now();
  const auto ann_metrics = ann::evaluate(model, to_batch(model, test));
  out.timings["ann_evaluate_s"] = seconds(t0);

  const auto subset = spread_indices(test.samples.size(), static_cast<std::size_t>(c.eval.snn_samples));
  std::vector<int> truth;
  for (auto i : subset) truth.push_back(test.samples[i].label.value());
  const auto ann_subset = ann::metrics_from_predictions(ann_predictions(model, test, subset), truth, model.n_classes);

  const std::uint64_t snn_seed = derive_seed(c.seed, {0x5AAu});
  const double rate = c.convert.conversion.input_max_rate_hz;
  io::Json snn_runs = io::Json::array();
  t0 = Clock::now();
  for (double pres : c.eval.presentations_ms) {
    snn_runs.push_back(evaluation_to_json(evaluate_snn(net, test, subset, pres, rate, snn_seed, c.eval.threads)));
  }
  for (int bits : c.eval.weight_bits) {
    auto qc = c.quant;
    qc.weight_bits = bits;
    const auto qnet = snn::quantize(net, qc);
    snn_runs.push_back(evaluation_to_json(
        evaluate_snn(qnet, test, subset, c.convert.conversion.presentation_ms, rate, snn_seed, c.eval.threads)));
  }
  out.timings["snn_evaluate_s"] = seconds(t0);

  t0 = Clock::now();
  const auto& first = test.samples.at(subset.front());
  const auto x = ann::prepare_input(model, first.counts);
  const auto run = snn::simulate(net, encode::values_to_rates(x, rate), c.convert.conversion.presentation_ms,
                                 sample_seed(snn_seed, subset.front()));
  auto cost = snn::event_cost_report(run, model);
  snn::add_rate_sweep(cost, net, x, c.eval.cost_rates_hz, c.convert.conversion.presentation_ms,
                      sample_seed(snn_seed, subset.front()));
  out.timings["cost_sweep_s"] = seconds(t0);

  io::Json r;
  r["schema_version"] = io::kSchemaVersion;
  r["kind"] = "run_report";
  r["config_hash"] = config_hash(c);
  r["config"] = config_to_json(c);
  r["seeds"] = {{"root", c.seed}, {"snn", snn_seed}};
  r["kernels"] = kernels::isa_name(kernels::active().isa);
  r["class_names"] = model.class_names;
  r["architecture"] = model.architecture;
  r["layer_units"] = model.layer_units();
  r["ann"] = {{"test", io::metrics_to_json(ann_metrics)}, {"snn_subset", io::metrics_to_json(ann_subset)}};
  r["snn_subset_size"] = subset.size();
  r["normalization_factors"] = net.normalization_factors();
  r["snn"] = snn_runs;
  r["event_cost"] = io::cost_to_json(cost);
  out.report = std::move(r);
  return out;
}

}  // namespace spikeid::pipeline
