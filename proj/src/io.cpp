#include "spikeid/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "spikeid/common.hpp"

namespace spikeid::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(1) + "\n"); }

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("cannot parse " + what + " from '" + s + "'");
  }
  return v;
}

void check_schema(const Json& j, const std::string& kind) {
  if (!j.is_object() || !j.contains("schema_version")) {
    throw ValidationError(kind + ": missing schema_version");
  }
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ValidationError(kind + ": unsupported schema_version " + j.at("schema_version").dump());
  }
  if (j.contains("kind") && j.at("kind").get<std::string>() != kind) {
    throw ValidationError("expected a '" + kind + "' file, found '" + j.at("kind").get<std::string>() + "'");
  }
}

template <class F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(what + ": malformed content (" + e.what() + ")");
  }
}

}  // namespace

std::string dataset_to_csv(const spectra::Dataset& ds) {
  std::string out = "label,distance_m,phantom,integration_s";
  const std::size_t n = ds.samples.empty() ? 0 : ds.samples.front().counts.size();
  for (std::size_t i = 0; i < n; ++i) out += ",c" + std::to_string(i);
  out += '\n';
  for (const auto& h : ds.samples) {
    require(h.counts.size() == n, "dataset rows have differing lengths");
    require(h.label.has_value() && *h.label >= 0 && static_cast<std::size_t>(*h.label) < ds.class_names.size(),
            "dataset row without a valid label");
    out += ds.class_names[static_cast<std::size_t>(*h.label)];
    out += ',' + format_double(h.meta.distance_m);
    out += h.meta.phantom ? ",1," : ",0,";
    out += format_double(h.meta.integration_time_s);
    for (auto c : h.counts) {
      out += ',';
      out += std::to_string(c);
    }
    out += '\n';
  }
  return out;
}

spectra::Dataset dataset_from_csv(const std::string& text, std::vector<std::string> class_names) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "dataset file is empty");
  const auto header = split_line(line);
  require(header.size() >= 5 && header[0] == "label" && header[1] == "distance_m" &&
              header[2] == "phantom" && header[3] == "integration_s",
          "dataset header must start with label,distance_m,phantom,integration_s");
  const std::size_t n = header.size() - 4;
  for (std::size_t i = 0; i < n; ++i) {
    require(header[4 + i] == "c" + std::to_string(i), "dataset header column " + std::to_string(4 + i) + " should be c" + std::to_string(i));
  }
  const bool fixed_classes = !class_names.empty();
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < class_names.size(); ++i) index[class_names[i]] = static_cast<int>(i);

  spectra::Dataset ds;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    require(cells.size() == header.size(), "dataset row " + std::to_string(row) + " has " +
                                               std::to_string(cells.size()) + " columns, expected " +
                                               std::to_string(header.size()));
    auto it = index.find(cells[0]);
    if (it == index.end()) {
      require(!fixed_classes, "dataset row " + std::to_string(row) + ": unknown class '" + cells[0] + "'");
      it = index.emplace(cells[0], static_cast<int>(class_names.size())).first;
      class_names.push_back(cells[0]);
    }
    spectra::EnergyHistogram h;
    h.label = it->second;
    h.meta.distance_m = parse_number<double>(cells[1], "distance_m");
    h.meta.phantom = parse_number<int>(cells[2], "phantom") != 0;
    h.meta.integration_time_s = parse_number<double>(cells[3], "integration_s");
    h.counts.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      h.counts[i] = parse_number<std::int64_t>(cells[4 + i], "count");
      require(h.counts[i] >= 0, "dataset row " + std::to_string(row) + " has a negative count");
    }
    ds.samples.push_back(std::move(h));
  }
  ds.class_names = std::move(class_names);
  return ds;
}

void write_dataset(const fs::path& path, const spectra::Dataset& ds) { write_text(path, dataset_to_csv(ds)); }

spectra::Dataset read_dataset(const fs::path& path, std::vector<std::string> class_names) {
  return dataset_from_csv(read_text(path), std::move(class_names));
}

Json templates_to_json(const spectra::TemplateSet& set) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "template_set";
  Json arr = Json::array();
  for (const auto& t : set) {
    Json tj;
    tj["name"] = t.name;
    Json lines = Json::array();
    for (const auto& l : t.lines) lines.push_back({{"energy_kev", l.energy_kev}, {"relative_intensity", l.relative_intensity}});
    tj["lines"] = lines;
    tj["continuum_amplitude"] = t.continuum_amplitude;
    tj["continuum_decay_kev"] = t.continuum_decay_kev;
    arr.push_back(tj);
  }
  j["templates"] = arr;
  return j;
}

spectra::TemplateSet templates_from_json(const Json& j) {
  check_schema(j, "template_set");
  return guarded("template set", [&] {
    spectra::TemplateSet set;
    for (const auto& tj : j.at("templates")) {
      spectra::IsotopeTemplate t;
      t.name = tj.at("name").get<std::string>();
      for (const auto& lj : tj.at("lines")) {
        t.lines.push_back({lj.at("energy_kev").get<double>(), lj.at("relative_intensity").get<double>()});
      }
      t.continuum_amplitude = tj.at("continuum_amplitude").get<double>();
      t.continuum_decay_kev = tj.at("continuum_decay_kev").get<double>();
      set.push_back(std::move(t));
    }
    return set;
  });
}

spectra::TemplateSet read_templates(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("templates file '" + path.string() + "' does not exist");
  return templates_from_json(read_json(path));
}

Json basis_to_json(const preprocess::ProjectionBasis& b) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "projection_basis";
  j["n"] = b.n;
  j["k"] = b.k;
  j["mean"] = b.mean;
  j["components"] = b.components;
  j["explained_variance"] = b.explained_variance;
  return j;
}

preprocess::ProjectionBasis basis_from_json(const Json& j) {
  check_schema(j, "projection_basis");
  return guarded("projection basis", [&] {
    preprocess::ProjectionBasis b;
    b.n = j.at("n").get<int>();
    b.k = j.at("k").get<int>();
    b.mean = j.at("mean").get<std::vector<double>>();
    b.components = j.at("components").get<std::vector<double>>();
    b.explained_variance = j.value("explained_variance", std::vector<double>{});
    b.validate();
    return b;
  });
}

Json transform_to_json(const preprocess::InputTransform& t) {
  Json j = Json::object();
  if (t.smoother) j["smooth"] = {{"window_half_width", t.smoother->window_half_width}, {"degree", t.smoother->degree}};
  j["stabilize"] = t.stabilize;
  if (t.pca) j["pca"] = basis_to_json(*t.pca);
  return j;
}

preprocess::InputTransform transform_from_json(const Json& j) {
  preprocess::InputTransform t;
  if (j.contains("smooth")) {
    t.smoother = preprocess::SmootherConfig{j["smooth"].at("window_half_width").get<int>(), j["smooth"].at("degree").get<int>()};
  }
  t.stabilize = j.value("stabilize", false);
  if (j.contains("pca")) t.pca = basis_from_json(j["pca"]);
  return t;
}

namespace {

Json spec_to_json(const ann::LayerSpec& s) {
  return {{"kind", ann::to_string(s.kind)},   {"activation", ann::to_string(s.activation)},
          {"in_channels", s.in_channels},     {"out_channels", s.out_channels},
          {"kernel_size", s.kernel_size},     {"stride", s.stride},
          {"in_len", s.in_len},               {"out_len", s.out_len},
          {"in_units", s.in_units},           {"out_units", s.out_units}};
}

ann::LayerSpec spec_from_json(const Json& j) {
  ann::LayerSpec s;
  s.kind = ann::parse_layer_kind(j.at("kind").get<std::string>());
  s.activation = ann::parse_activation(j.at("activation").get<std::string>());
  s.in_channels = j.at("in_channels").get<int>();
  s.out_channels = j.at("out_channels").get<int>();
  s.kernel_size = j.at("kernel_size").get<int>();
  s.stride = j.at("stride").get<int>();
  s.in_len = j.at("in_len").get<int>();
  s.out_len = j.at("out_len").get<int>();
  s.in_units = j.at("in_units").get<int>();
  s.out_units = j.at("out_units").get<int>();
  return s;
}

}  // namespace

Json model_to_json(const ann::NetworkModel& m) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "ann_checkpoint";
  j["architecture"] = m.architecture;
  j["input_len"] = m.input_len;
  j["n_classes"] = m.n_classes;
  j["class_names"] = m.class_names;
  j["input_normalization"] = "per_sample_max_abs";
  j["preprocess"] = transform_to_json(m.transform);
  j["layer_units"] = m.layer_units();
  j["mac_count"] = m.mac_count();
  Json layers = Json::array();
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    Json lj = spec_to_json(m.layers[i]);
    lj["weights"] = m.params[i].weights;
    lj["biases"] = m.params[i].biases;
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j;
}

ann::NetworkModel model_from_json(const Json& j) {
  check_schema(j, "ann_checkpoint");
  return guarded("ANN checkpoint", [&] {
    ann::NetworkModel m;
    m.architecture = j.value("architecture", std::string("custom"));
    m.input_len = j.at("input_len").get<int>();
    m.n_classes = j.at("n_classes").get<int>();
    m.class_names = j.value("class_names", std::vector<std::string>{});
    if (j.contains("preprocess")) m.transform = transform_from_json(j.at("preprocess"));
    for (const auto& lj : j.at("layers")) {
      m.layers.push_back(spec_from_json(lj));
      m.params.push_back({lj.at("weights").get<std::vector<double>>(), lj.at("biases").get<std::vector<double>>()});
    }
    m.validate();
    return m;
  });
}

Json lif_to_json(const snn::LIFParams& p) {
  return {{"tau_m_ms", p.tau_m_ms},     {"tau_syn_ms", p.tau_syn_ms},
          {"v_rest", p.v_rest},         {"v_reset", p.v_reset},
          {"v_thresh", p.v_thresh},     {"refractory_ms", p.refractory_ms},
          {"dt_ms", p.dt_ms},           {"reset", p.soft_reset ? "soft" : "hard"},
          {"compensate_synapse", p.compensate_synapse}, {"compensate_leak", p.compensate_leak}};
}

snn::LIFParams lif_from_json(const Json& j) {
  snn::LIFParams p;
  p.tau_m_ms = j.value("tau_m_ms", p.tau_m_ms);
  p.tau_syn_ms = j.value("tau_syn_ms", p.tau_syn_ms);
  p.v_rest = j.value("v_rest", p.v_rest);
  p.v_reset = j.value("v_reset", p.v_reset);
  p.v_thresh = j.value("v_thresh", p.v_thresh);
  p.refractory_ms = j.value("refractory_ms", p.refractory_ms);
  p.dt_ms = j.value("dt_ms", p.dt_ms);
  const auto reset = j.value("reset", std::string("hard"));
  require(reset == "hard" || reset == "soft", "LIF reset must be 'hard' or 'soft'");
  p.soft_reset = reset == "soft";
  p.compensate_synapse = j.value("compensate_synapse", p.compensate_synapse);
  p.compensate_leak = j.value("compensate_leak", p.compensate_leak);
  p.validate();
  return p;
}

Json network_to_json(const snn::SpikingNetwork& n) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "snn_network";
  j["architecture"] = n.architecture;
  j["mode"] = snn::to_string(n.mode);
  j["input_len"] = n.input_len;
  j["n_classes"] = n.n_classes;
  j["class_names"] = n.class_names;
  j["input_normalization"] = "per_sample_max_abs";
  j["preprocess"] = transform_to_json(n.transform);
  j["lif"] = lif_to_json(n.lif);
  j["conversion"] = {{"norm_percentile", n.conversion.norm_percentile},
                     {"presentation_ms", n.conversion.presentation_ms},
                     {"input_max_rate_hz", n.conversion.input_max_rate_hz},
                     {"readout_floor", n.conversion.readout_floor}};
  j["quantization"] = {{"weight_bits", n.quant.weight_bits}, {"potential_bits", n.quant.potential_bits},
                       {"rounding", "nearest_even"}};
  j["input_lambda"] = n.input_lambda;
  j["readout_shift"] = n.readout_shift;
  j["normalization_factors"] = n.normalization_factors();
  Json layers = Json::array();
  for (const auto& L : n.layers) {
    Json lj = spec_to_json(L.spec);
    lj["lambda"] = L.lambda;
    lj["weights"] = L.weights;
    lj["biases"] = L.biases;
    if (n.mode == snn::Mode::FixedPoint) {
      lj["weight_scale"] = L.weight_scale;
      lj["weight_codes"] = L.weight_codes;
      lj["weight_fixed"] = L.weight_fixed;
      lj["bias_fixed"] = L.bias_fixed;
    }
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j;
}

snn::SpikingNetwork network_from_json(const Json& j) {
  check_schema(j, "snn_network");
  return guarded("spiking network", [&] {
    snn::SpikingNetwork n;
    n.architecture = j.value("architecture", std::string());
    n.mode = snn::parse_mode(j.at("mode").get<std::string>());
    n.input_len = j.at("input_len").get<int>();
    n.n_classes = j.at("n_classes").get<int>();
    n.class_names = j.value("class_names", std::vector<std::string>{});
    if (j.contains("preprocess")) n.transform = transform_from_json(j.at("preprocess"));
    n.lif = lif_from_json(j.at("lif"));
    const auto& c = j.at("conversion");
    n.conversion.norm_percentile = c.at("norm_percentile").get<double>();
    n.conversion.presentation_ms = c.at("presentation_ms").get<double>();
    n.conversion.input_max_rate_hz = c.at("input_max_rate_hz").get<double>();
    n.conversion.readout_floor = c.value("readout_floor", n.conversion.readout_floor);
    const auto& q = j.at("quantization");
    n.quant.weight_bits = q.at("weight_bits").get<int>();
    n.quant.potential_bits = q.at("potential_bits").get<int>();
    n.input_lambda = j.at("input_lambda").get<double>();
    n.readout_shift = j.value("readout_shift", 0.0);
    for (const auto& lj : j.at("layers")) {
      snn::SpikingLayer L;
      L.spec = spec_from_json(lj);
      L.lambda = lj.at("lambda").get<double>();
      L.weights = lj.at("weights").get<std::vector<double>>();
      L.biases = lj.at("biases").get<std::vector<double>>();
      if (n.mode == snn::Mode::FixedPoint) {
        L.weight_scale = lj.at("weight_scale").get<double>();
        L.weight_codes = lj.at("weight_codes").get<std::vector<std::int32_t>>();
        L.weight_fixed = lj.at("weight_fixed").get<std::vector<std::int32_t>>();
        L.bias_fixed = lj.at("bias_fixed").get<std::vector<std::int32_t>>();
      }
      n.layers.push_back(std::move(L));
    }
    n.validate();
    return n;
  });
}

std::string events_to_csv(const encode::EventStream& s) {
  std::string out = "time_us,channel,polarity\n";
  for (const auto& e : s.events) {
    out += format_double(e.time_us);
    out += ',' + std::to_string(e.channel) + ',' + std::to_string(static_cast<int>(e.polarity)) + '\n';
  }
  return out;
}

encode::EventStream events_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "event stream file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "time_us,channel,polarity", "event stream header must be time_us,channel,polarity");
  encode::EventStream s;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    require(cells.size() == 3, "event row must have 3 columns");
    encode::SpikeEvent e;
    e.time_us = parse_number<double>(cells[0], "time_us");
    e.channel = parse_number<std::int32_t>(cells[1], "channel");
    const int pol = parse_number<int>(cells[2], "polarity");
    require(pol == 1 || pol == -1, "event polarity must be +1 or -1");
    require(e.time_us >= 0.0 && e.channel >= 0, "event time and channel must be non-negative");
    e.polarity = static_cast<std::int8_t>(pol);
    s.events.push_back(e);
  }
  require(s.is_sorted(), "event stream is not sorted by (time, channel, polarity)");
  return s;
}

Json metrics_to_json(const ann::Metrics& m) {
  return {{"accuracy", m.accuracy}, {"total", m.total}, {"confusion", m.confusion},
          {"precision", m.precision}, {"recall", m.recall}};
}

Json cost_to_json(const snn::CostReport& r) {
  Json curve = Json::array();
  for (const auto& p : r.curve) curve.push_back({{"input_max_rate_hz", p.input_max_rate_hz}, {"synaptic_ops", p.synaptic_ops}});
  return {{"snn_synaptic_ops", r.snn_synaptic_ops}, {"ann_macs", r.ann_macs}, {"ratio", r.ratio},
          {"ops_vs_input_rate", curve}, {"fit", {{"slope", r.curve_slope}, {"intercept", r.curve_intercept}, {"r2", r.curve_r2}}}};
}

}  // namespace spikeid::io
