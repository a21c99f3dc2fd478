#include <cmath>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "spikeid/common.hpp"
#include "spikeid/encode.hpp"
#include "spikeid/io.hpp"
#include "spikeid/kernels.hpp"
#include "spikeid/pipeline.hpp"

namespace fs = std::filesystem;

namespace spikeid::pipeline {
namespace {

// Every artifact (manifest, checkpoint, network, run report) embeds the
// config that produced it, so any of them works as --config.
ExperimentConfig load_config_file(const std::string& path) {
  const auto j = io::read_json(path);
  if (j.is_object() && j.contains("config") && j.value("kind", std::string()) != "") {
    return config_from_json(j["config"]);
  }
  return config_from_json(j);
}

std::string prescan(int argc, const char* const* argv, const std::string& flag) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == flag && i + 1 < argc) return argv[i + 1];
    if (a.rfind(flag + "=", 0) == 0) return a.substr(flag.size() + 1);
  }
  return {};
}

// Base config: --config, else the config embedded in the upstream artifact
// (--network, --model, then the --data manifest), else defaults.
std::string base_config_path(int argc, const char* const* argv) {
  if (auto p = prescan(argc, argv, "--config"); !p.empty()) return p;
  for (const char* flag : {"--network", "--model"}) {
    const auto p = prescan(argc, argv, flag);
    if (p.empty() || !fs::exists(p)) continue;
    const auto j = io::read_json(p);
    if (j.is_object() && j.contains("config")) return p;
  }
  if (auto d = prescan(argc, argv, "--data"); !d.empty() && fs::exists(fs::path(d) / "manifest.json")) {
    return (fs::path(d) / "manifest.json").string();
  }
  return {};
}

struct DataFiles {
  fs::path train, test;
  std::vector<std::string> class_names;
};

// --data is a synth output directory (train.csv, test.csv, manifest.json).
DataFiles data_files(const std::string& dir) {
  require(!dir.empty(), "--data is required");
  DataFiles f;
  const fs::path d(dir);
  f.train = d / "train.csv";
  f.test = d / "test.csv";
  require(fs::exists(f.train), "dataset not found: " + f.train.string());
  const auto manifest = d / "manifest.json";
  if (fs::exists(manifest)) {
    const auto j = io::read_json(manifest);
    if (j.contains("class_names")) f.class_names = j["class_names"].get<std::vector<std::string>>();
  }
  return f;
}

spectra::Dataset load_split(const fs::path& path, const std::vector<std::string>& names) {
  require(fs::exists(path), "dataset not found: " + path.string());
  return io::read_dataset(path, names);
}

void check_model_input(const ann::NetworkModel& model, const spectra::Dataset& ds) {
  require(!ds.samples.empty(), "dataset is empty");
  const auto n = ds.samples.front().counts.size();
  const auto expect = static_cast<std::size_t>(model.transform.output_len(static_cast<int>(n)));
  require(expect == static_cast<std::size_t>(model.input_len),
          "dataset has " + std::to_string(n) + " bins, model expects input " + std::to_string(model.input_len));
  require(ds.class_names.size() <= static_cast<std::size_t>(model.n_classes),
          "dataset has more classes than the model outputs");
}

void write_metrics_csv(const fs::path& path, const std::vector<ann::EpochStats>& trace) {
  std::string s = "epoch,loss,accuracy\n";
  for (const auto& e : trace) {
    s += std::to_string(e.epoch) + ',' + io::format_double(e.loss) + ',' + io::format_double(e.accuracy) + '\n';
  }
  io::write_text(path, s);
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  auto stem = p;
  stem.replace_extension();
  return fs::path(stem.string() + suffix);
}

void print_counts(const char* tag, const spectra::Dataset& ds) {
  std::map<std::string, int> per_class;
  std::map<std::pair<double, int>, int> per_geom;
  for (const auto& h : ds.samples) {
    ++per_class[ds.class_names[static_cast<std::size_t>(*h.label)]];
    ++per_geom[{h.meta.distance_m, h.meta.phantom ? 1 : 0}];
  }
  std::cout << tag << ": " << ds.samples.size() << " histograms\n";
  for (const auto& name : ds.class_names) std::cout << "  class " << name << ": " << per_class[name] << "\n";
  for (const auto& [g, n] : per_geom) {
    std::cout << "  geometry d=" << io::format_double(g.first) << "m phantom=" << g.second << ": " << n << "\n";
  }
}

std::string pct(double v) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << 100.0 * v;
  return o.str();
}

int cmd_synth(const ExperimentConfig& c, const std::string& out, const std::string& dump_templates) {
  if (!dump_templates.empty()) {
    io::write_json(dump_templates, io::templates_to_json(spectra::default_templates()));
    std::cout << "wrote " << dump_templates << "\n";
    return 0;
  }
  const auto split = synthesize(c);
  const fs::path d(out);
  io::write_dataset(d / "train.csv", split.train);
  io::write_dataset(d / "test.csv", split.test);
  io::Json m;
  m["schema_version"] = io::kSchemaVersion;
  m["kind"] = "dataset_manifest";
  m["config_hash"] = config_hash(c);
  m["seed"] = c.seed;
  m["class_names"] = split.train.class_names;
  m["bins"] = c.dataset.bins;
  m["train_size"] = split.train.samples.size();
  m["test_size"] = split.test.samples.size();
  m["config"] = config_to_json(c);
  io::write_json(d / "manifest.json", m);
  print_counts("train", split.train);
  print_counts("test", split.test);
  return 0;
}

int cmd_train(const ExperimentConfig& c, const std::string& data, const std::string& out) {
  const auto files = data_files(data);
  const auto train = load_split(files.train, files.class_names);
  const auto result = train_model(c, train);
  auto j = io::model_to_json(result.model);
  j["config"] = config_to_json(c);
  io::write_json(out, j);
  write_metrics_csv(sibling(out, ".metrics.csv"), result.trace);
  const auto& last = result.trace.back();
  std::cout << "epochs " << last.epoch << " loss " << io::format_double(last.loss) << " train accuracy "
            << pct(last.accuracy) << "%\n";
  if (fs::exists(files.test)) {
    const auto test = load_split(files.test, train.class_names);
    check_model_input(result.model, test);
    const auto m = ann::evaluate(result.model, to_batch(result.model, test));
    std::cout << "test accuracy " << pct(m.accuracy) << "% on " << m.total << " histograms\n";
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_convert(const ExperimentConfig& c, const std::string& model_path, const std::string& data,
                const std::string& out, int weight_bits) {
  require(!model_path.empty(), "--model is required");
  const auto model = io::model_from_json(io::read_json(model_path));
  const auto files = data_files(data);
  const auto train = load_split(files.train, model.class_names);
  check_model_input(model, train);
  auto net = convert_model(c, model, train);
  if (weight_bits > 0) {
    auto q = c.quant;
    q.weight_bits = weight_bits;
    net = snn::quantize(net, q);
  }
  auto j = io::network_to_json(net);
  j["config"] = config_to_json(c);
  io::write_json(out, j);
  std::cout << "normalization factors:";
  for (double l : net.normalization_factors()) std::cout << ' ' << io::format_double(l);
  std::cout << "\nwrote " << out << "\n";
  return 0;
}

struct SimulateArgs {
  std::string network, data;
  int index = 0;
  double presentation_ms = 0.0;  // 0: the network's conversion setting
  double max_rate_hz = 0.0;
  int raster_layer = -1;
  double bin_ms = 10.0;
};

int cmd_simulate(const ExperimentConfig& c, const SimulateArgs& a, const std::string& out) {
  require(!a.network.empty(), "--network is required");
  const auto net = io::network_from_json(io::read_json(a.network));
  const auto files = data_files(a.data);
  const auto test = load_split(fs::exists(files.test) ? files.test : files.train, net.class_names);
  require(a.index >= 0 && static_cast<std::size_t>(a.index) < test.samples.size(), "--index out of range");
  const double pres = a.presentation_ms > 0 ? a.presentation_ms : net.conversion.presentation_ms;
  const double rate = a.max_rate_hz > 0 ? a.max_rate_hz : net.conversion.input_max_rate_hz;

  // Prepare the input exactly as the classifier does.
  ann::NetworkModel shell;
  shell.transform = net.transform;
  const auto x = ann::prepare_input(shell, test.samples[static_cast<std::size_t>(a.index)].counts);
  require(x.size() == static_cast<std::size_t>(net.input_len), "sample length does not match the network input");

  snn::SimulationOptions opt;
  opt.raster_layer = a.raster_layer;
  opt.summary_bin_ms = a.bin_ms;
  const std::uint64_t seed = sample_seed(derive_seed(c.seed, {0x5AAu}), static_cast<std::size_t>(a.index));
  const auto run = snn::simulate(net, encode::values_to_rates(x, rate), pres, seed, opt);

  const fs::path d(out);
  io::write_text(d / "raster.csv", io::events_to_csv(run.raster));
  std::string s = "bin_start_ms,input";
  for (std::size_t l = 0; l < net.layers.size(); ++l) s += ",layer" + std::to_string(l);
  s += '\n';
  for (std::size_t b = 0; b < run.raster_summary.size(); ++b) {
    s += io::format_double(static_cast<double>(b) * a.bin_ms);
    for (auto v : run.raster_summary[b]) s += ',' + std::to_string(v);
    s += '\n';
  }
  io::write_text(d / "summary.csv", s);

  snn::CostReport cost;
  cost.snn_synaptic_ops = run.synaptic_events;
  for (const auto& l : net.layers) cost.ann_macs += l.spec.macs();
  cost.ratio = cost.ann_macs ? static_cast<double>(cost.snn_synaptic_ops) / static_cast<double>(cost.ann_macs) : 0.0;
  snn::add_rate_sweep(cost, net, x, c.eval.cost_rates_hz, pres, seed);
  std::string curve = "input_max_rate_hz,synaptic_ops\n";
  for (const auto& p : cost.curve) curve += io::format_double(p.input_max_rate_hz) + ',' + std::to_string(p.synaptic_ops) + '\n';
  io::write_text(d / "cost_curve.csv", curve);
  io::write_json(d / "cost.json", io::cost_to_json(cost));

  const auto verdict = snn::decide(run.output_counts);
  std::cout << "sample " << a.index << " label "
            << test.class_names[static_cast<std::size_t>(*test.samples[static_cast<std::size_t>(a.index)].label)]
            << " predicted " << net.class_names[static_cast<std::size_t>(verdict.predicted)]
            << (verdict.no_decision ? " (no output spikes)" : "") << "\n";
  std::cout << "output counts:";
  for (auto v : run.output_counts) std::cout << ' ' << v;
  std::cout << "\nsynaptic events " << run.synaptic_events << ", ANN MACs " << cost.ann_macs << "\n";
  std::cout << "wrote " << d.string() << "\n";
  return 0;
}

int cmd_evaluate(const ExperimentConfig& c, const std::string& model_path, const std::string& net_path,
                 const std::string& data, const std::string& out) {
  require(!model_path.empty() && !net_path.empty(), "--model and --network are required");
  const auto model = io::model_from_json(io::read_json(model_path));
  const auto net = io::network_from_json(io::read_json(net_path));
  require(net.mode == snn::Mode::Float, "evaluate expects the float network; fixed-point widths come from the config");
  const auto files = data_files(data);
  require(fs::exists(files.test), "dataset not found: " + files.test.string());
  const auto test = load_split(files.test, model.class_names);
  check_model_input(model, test);
  const auto r = run_evaluation(c, model, net, test);
  io::write_json(out, r.report);
  io::write_json(sibling(out, ".timings.json"), r.timings);
  std::cout << "ANN test accuracy " << pct(r.report["ann"]["test"]["accuracy"].get<double>()) << "%\n";
  for (const auto& e : r.report["snn"]) {
    std::cout << "SNN " << e["mode"].get<std::string>();
    if (e["weight_bits"].get<int>() > 0) std::cout << ' ' << e["weight_bits"].get<int>() << "-bit";
    std::cout << " @" << io::format_double(e["presentation_ms"].get<double>()) << " ms: "
              << pct(e["accuracy"].get<double>()) << "%\n";
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_encode_demo(double energy, int levels, const std::string& out) {
  encode::PulseModel pm;
  const auto bank = encode::log_spaced_bank(pm, levels);
  const auto stream = encode::threshold_encode(encode::synth_pulse(energy, pm), bank, pm);
  std::cout << "time_us,channel,polarity\n";
  for (const auto& e : stream.events) {
    std::cout << io::format_double(e.time_us) << ',' << e.channel << ',' << static_cast<int>(e.polarity) << "\n";
  }
  const auto dec = encode::decode_energy(stream, bank, pm);
  if (dec.below_first_threshold) {
    std::cout << "decoded: below first threshold\n";
    return 0;
  }
  // Step of the level interval that holds the true energy.
  const auto level_energy = [&](std::size_t i) { return (bank.levels_v[i] - pm.baseline_v) / (pm.volts_per_kev * pm.peak_factor()); };
  double step = 0.0;
  for (std::size_t i = 0; i + 1 < bank.size(); ++i) {
    if (energy >= level_energy(i) && energy < level_energy(i + 1)) step = level_energy(i + 1) - level_energy(i);
  }
  if (step == 0.0 && bank.size() >= 2) step = level_energy(bank.size() - 1) - level_energy(bank.size() - 2);
  const double err = std::abs(dec.energy_kev - energy);
  std::cout << "decoded energy " << io::format_double(dec.energy_kev) << " keV (true " << io::format_double(energy)
            << ", level " << dec.highest_level << ", error " << io::format_double(err) << " keV, step "
            << io::format_double(step) << " keV, " << (err <= step ? "within" : "outside") << " one step)\n";
  if (!out.empty()) io::write_text(out, io::events_to_csv(stream));
  return 0;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& out) {
  require(!runs.empty(), "--runs needs at least one report");
  std::vector<double> pres;
  std::vector<int> bits;
  std::vector<io::Json> reports;
  for (const auto& p : runs) {
    auto j = io::read_json(p);
    require(j.value("kind", std::string()) == "run_report", p + " is not a run report");
    for (const auto& e : j["snn"]) {
      if (e["weight_bits"].get<int>() == 0) {
        const double v = e["presentation_ms"].get<double>();
        if (std::find(pres.begin(), pres.end(), v) == pres.end()) pres.push_back(v);
      } else {
        const int b = e["weight_bits"].get<int>();
        if (std::find(bits.begin(), bits.end(), b) == bits.end()) bits.push_back(b);
      }
    }
    reports.push_back(std::move(j));
  }
  std::sort(pres.begin(), pres.end());
  std::sort(bits.begin(), bits.end());
  std::string s = "config_hash,seed,ann_accuracy";
  for (double p : pres) s += ",snn_" + io::format_double(p) + "ms";
  for (int b : bits) s += ",fixed_" + std::to_string(b) + "bit";
  s += ",snn_ops_per_ann_mac\n";
  for (const auto& j : reports) {
    s += j["config_hash"].get<std::string>() + ',' + std::to_string(j["seeds"]["root"].get<std::uint64_t>()) + ',' +
         io::format_double(j["ann"]["test"]["accuracy"].get<double>());
    for (double p : pres) {
      std::string cell;
      for (const auto& e : j["snn"]) {
        if (e["weight_bits"].get<int>() == 0 && e["presentation_ms"].get<double>() == p)
          cell = io::format_double(e["accuracy"].get<double>());
      }
      s += ',' + cell;
    }
    for (int b : bits) {
      std::string cell;
      for (const auto& e : j["snn"]) {
        if (e["weight_bits"].get<int>() == b) cell = io::format_double(e["accuracy"].get<double>());
      }
      s += ',' + cell;
    }
    s += ',' + io::format_double(j["event_cost"]["ratio"].get<double>()) + '\n';
  }
  std::cout << s;
  if (!out.empty()) io::write_text(out, s);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  ExperimentConfig c;
  try {
    const auto cfg = base_config_path(argc, argv);
    if (!cfg.empty()) c = load_config_file(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"spikeid: gamma-spectrum isotope identification with frame-based and spiking classifiers"};
  app.require_subcommand(1);
  std::string config_path, isa = "auto";
  std::string out;

  auto common = [&](CLI::App* s, const std::string& default_out) {
    s->add_option("--seed", c.seed, "Root seed for every random stream")->capture_default_str();
    s->add_option("--config", config_path, "Experiment config JSON (or a run report); flags override it");
    out = default_out;
    s->add_option("--out", out, "Output path")->capture_default_str();
    s->add_option("--threads", c.eval.threads, "Worker threads for per-sample evaluation (1 is the reference mode)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    s->add_option("--isa", isa, "Kernel variant: auto, scalar or avx2")->capture_default_str();
  };
  auto dataset_flags = [&](CLI::App* s) {
    s->add_option("--templates", c.dataset.templates, "Template set JSON (default: built-in templates)");
    s->add_option("--bins", c.dataset.bins, "Calibrated histogram bins")->capture_default_str();
    s->add_option("--per-cell", c.dataset.per_cell, "Histograms per (class, geometry) cell")->capture_default_str();
    s->add_option("--split", c.dataset.split, "Train fraction of each cell")->capture_default_str();
    s->add_option("--integration", c.dataset.integration_s, "Integration time in seconds")->capture_default_str();
    s->add_option("--distances", c.dataset.distances_m, "Source distances in metres")->capture_default_str();
  };

  std::string dump_templates, data, model_path, net_path;
  int weight_bits = 0;
  SimulateArgs sim;
  double energy = 662.0;
  int levels = 16;
  std::vector<std::string> runs;
  std::string optimizer = ann::to_string(c.ann.train.optimizer);

  auto* synth = app.add_subcommand("synth", "Generate train/test histogram datasets");
  common(synth, "runs/dataset");
  dataset_flags(synth);
  synth->add_option("--write-templates", dump_templates, "Write the built-in template set to this file and exit");

  auto* train = app.add_subcommand("train", "Train the ANN classifier on a synthesized dataset");
  common(train, "runs/model.json");
  train->add_option("--data", data, "Dataset directory written by synth")->required();
  train->add_option("--scale", c.ann.scale, "Filter scale of the classifier (1 = full width)")->capture_default_str();
  train->add_option("--epochs", c.ann.train.epochs, "Training epochs")->capture_default_str();
  train->add_option("--batch-size", c.ann.train.batch_size, "Minibatch size")->capture_default_str();
  train->add_option("--lr", c.ann.train.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--optimizer", optimizer, "sgd, momentum or adam")->capture_default_str();
  train->add_flag("--nonpositive-hidden-bias,!--free-hidden-bias", c.ann.train.nonpositive_hidden_bias,
                  "Keep hidden-layer biases <= 0");
  train->add_flag("--smooth,!--no-smooth", c.preprocess.smooth, "Local polynomial smoothing");
  train->add_option("--window", c.preprocess.window_half_width, "Smoothing half-width")->capture_default_str();
  train->add_option("--degree", c.preprocess.degree, "Smoothing polynomial degree")->capture_default_str();
  train->add_flag("--stabilize,!--no-stabilize", c.preprocess.stabilize, "Variance-stabilizing transform");
  train->add_option("--pca-k", c.preprocess.pca_k, "Principal components (0 disables)")->capture_default_str();

  auto* convert = app.add_subcommand("convert", "Convert a trained ANN into a spiking network");
  common(convert, "runs/network.json");
  convert->add_option("--model", model_path, "ANN checkpoint")->required();
  convert->add_option("--data", data, "Dataset directory (calibration uses the training split)")->required();
  convert->add_option("--percentile", c.convert.conversion.norm_percentile, "Normalization percentile")
      ->capture_default_str();
  convert->add_option("--calibration-samples", c.convert.calibration_samples, "Calibration histograms")
      ->capture_default_str();
  convert->add_option("--presentation", c.convert.conversion.presentation_ms, "Presentation duration in ms")
      ->capture_default_str();
  convert->add_option("--max-rate", c.convert.conversion.input_max_rate_hz, "Input max rate in Hz")
      ->capture_default_str();
  convert->add_option("--dt", c.convert.lif.dt_ms, "Timestep in ms")->capture_default_str();
  convert->add_option("--tau-m", c.convert.lif.tau_m_ms, "Membrane time constant in ms")->capture_default_str();
  convert->add_option("--tau-syn", c.convert.lif.tau_syn_ms, "Synaptic time constant in ms")->capture_default_str();
  convert->add_flag("--soft-reset,!--hard-reset", c.convert.lif.soft_reset, "Subtract the threshold on a spike");
  convert->add_option("--weight-bits", weight_bits, "Quantize to this weight width (0 keeps float)")
      ->capture_default_str();
  convert->add_option("--potential-bits", c.quant.potential_bits, "Fixed-point potential width")
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Run one test histogram through a spiking network");
  common(simulate, "runs/simulate");
  simulate->add_option("--network", sim.network, "Spiking network file")->required();
  simulate->add_option("--data", sim.data, "Dataset directory")->required();
  simulate->add_option("--index", sim.index, "Test sample index")->capture_default_str();
  simulate->add_option("--presentation", sim.presentation_ms, "Presentation in ms (0: network setting)");
  simulate->add_option("--max-rate", sim.max_rate_hz, "Input max rate in Hz (0: network setting)");
  simulate->add_option("--raster-layer", sim.raster_layer, "-1 input, 0.. network layers")->capture_default_str();
  simulate->add_option("--bin-ms", sim.bin_ms, "Raster summary bin in ms")->capture_default_str();
  simulate->add_option("--cost-rates", c.eval.cost_rates_hz, "Max rates of the cost sweep")->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate ANN and SNN on the test split and write a run report");
  common(evaluate, "runs/report.json");
  evaluate->add_option("--model", model_path, "ANN checkpoint")->required();
  evaluate->add_option("--network", net_path, "Float spiking network")->required();
  evaluate->add_option("--data", data, "Dataset directory")->required();
  evaluate->add_option("--snn-samples", c.eval.snn_samples, "Size of the SNN test subset")->capture_default_str();
  evaluate->add_option("--presentations", c.eval.presentations_ms, "Presentation durations in ms")
      ->capture_default_str();
  evaluate->add_option("--weight-bits", c.eval.weight_bits, "Fixed-point weight widths")->capture_default_str();

  auto* demo = app.add_subcommand("encode-demo", "Threshold-encode one pulse and decode its energy");
  common(demo, "");
  demo->add_option("--energy", energy, "Deposited energy in keV")->capture_default_str();
  demo->add_option("--levels", levels, "Threshold levels")->capture_default_str();

  auto* report = app.add_subcommand("report", "Compare run reports by config hash");
  common(report, "");
  report->add_option("--runs", runs, "Run report files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (isa != "auto") {
      kernels::select(kernels::parse_isa(isa));
    } else {
      kernels::select_auto();
    }
    c.ann.train.optimizer = ann::parse_optimizer(optimizer);
    if (*synth) return cmd_synth(c, out, dump_templates);
    if (*train) return cmd_train(c, data, out);
    if (*convert) return cmd_convert(c, model_path, data, out, weight_bits);
    if (*simulate) return cmd_simulate(c, sim, out);
    if (*evaluate) return cmd_evaluate(c, model_path, net_path, data, out);
    if (*demo) return cmd_encode_demo(energy, levels, out);
    if (*report) return cmd_report(runs, out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << app.get_subcommands().front()->get_name() << ": malformed file: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace spikeid::pipeline
