#include "spikeid/ann.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spikeid/common.hpp"
#include "spikeid/kernels.hpp"

namespace spikeid::ann {

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv1D: return "conv1d";
    case LayerKind::Dense: return "dense";
    case LayerKind::Flatten: return "flatten";
  }
  return "?";
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::None: return "none";
    case Activation::ReLU: return "relu";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& s) {
  if (s == "conv1d") return LayerKind::Conv1D;
  if (s == "dense") return LayerKind::Dense;
  if (s == "flatten") return LayerKind::Flatten;
  throw ValidationError("unknown layer kind '" + s + "'");
}

Activation parse_activation(const std::string& s) {
  if (s == "none") return Activation::None;
  if (s == "relu") return Activation::ReLU;
  if (s == "softmax") return Activation::Softmax;
  throw ValidationError("unknown activation '" + s + "'");
}

std::string to_string(Optimizer o) {
  switch (o) {
    case Optimizer::SGD: return "sgd";
    case Optimizer::Momentum: return "momentum";
    case Optimizer::Adam: return "adam";
  }
  return "?";
}

Optimizer parse_optimizer(const std::string& s) {
  if (s == "sgd") return Optimizer::SGD;
  if (s == "momentum" || s == "sgd+momentum") return Optimizer::Momentum;
  if (s == "adam") return Optimizer::Adam;
  throw ValidationError("unknown optimizer '" + s + "' (expected sgd, momentum or adam)");
}

std::size_t LayerSpec::weight_count() const {
  switch (kind) {
    case LayerKind::Conv1D:
      return static_cast<std::size_t>(out_channels) * kernel_size * in_channels;
    case LayerKind::Dense:
      return static_cast<std::size_t>(out_units) * in_units;
    case LayerKind::Flatten:
      return 0;
  }
  return 0;
}

std::size_t LayerSpec::bias_count() const {
  switch (kind) {
    case LayerKind::Conv1D: return static_cast<std::size_t>(out_channels);
    case LayerKind::Dense: return static_cast<std::size_t>(out_units);
    case LayerKind::Flatten: return 0;
  }
  return 0;
}

std::size_t LayerSpec::macs() const {
  switch (kind) {
    case LayerKind::Conv1D:
      return static_cast<std::size_t>(out_len) * out_channels * kernel_size * in_channels;
    case LayerKind::Dense:
      return static_cast<std::size_t>(out_units) * in_units;
    case LayerKind::Flatten:
      return 0;
  }
  return 0;
}

LayerSpec conv1d(int in_channels, int out_channels, int kernel_size, int stride, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::Conv1D;
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  s.kernel_size = kernel_size;
  s.stride = stride;
  s.activation = act;
  return s;
}

LayerSpec dense(int out_units, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.out_units = out_units;
  s.activation = act;
  return s;
}

LayerSpec flatten() {
  LayerSpec s;
  s.kind = LayerKind::Flatten;
  return s;
}

namespace {

std::string layer_name(std::size_t i, const LayerSpec& s) {
  return "layer " + std::to_string(i) + " (" + to_string(s.kind) + ")";
}

}  // namespace

NetworkModel make_network(int input_len, std::vector<LayerSpec> specs) {
  require(input_len >= 1, "network input length must be >= 1");
  require(!specs.empty(), "network has no layers");
  NetworkModel m;
  m.input_len = input_len;
  int len = input_len;
  int channels = 1;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& s = specs[i];
    const int flat = len * channels;
    switch (s.kind) {
      case LayerKind::Conv1D: {
        require(s.in_channels == channels,
                layer_name(i, s) + " expects " + std::to_string(s.in_channels) +
                    " input channels, previous layer provides " + std::to_string(channels));
        require(s.kernel_size >= 1 && s.stride >= 1 && s.out_channels >= 1,
                layer_name(i, s) + " needs kernel, stride and filters >= 1");
        require(len >= s.kernel_size, layer_name(i, s) + ": kernel " + std::to_string(s.kernel_size) +
                                          " longer than input length " + std::to_string(len));
        s.in_len = len;
        s.out_len = (len - s.kernel_size) / s.stride + 1;
        s.in_units = flat;
        s.out_units = s.out_len * s.out_channels;
        len = s.out_len;
        channels = s.out_channels;
        break;
      }
      case LayerKind::Dense: {
        require(s.out_units >= 1, layer_name(i, s) + " needs >= 1 unit");
        s.in_units = flat;
        s.in_len = len;
        s.in_channels = channels;
        s.out_len = 1;
        s.out_channels = s.out_units;
        len = 1;
        channels = s.out_units;
        break;
      }
      case LayerKind::Flatten: {
        s.in_units = s.out_units = flat;
        s.in_len = len;
        s.in_channels = channels;
        s.out_len = 1;
        s.out_channels = flat;
        len = 1;
        channels = flat;
        break;
      }
    }
  }
  m.layers = std::move(specs);
  m.n_classes = m.layers.back().out_units;
  m.params.resize(m.layers.size());
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    m.params[i].weights.assign(m.layers[i].weight_count(), 0.0);
    m.params[i].biases.assign(m.layers[i].bias_count(), 0.0);
  }
  m.validate();
  return m;
}

void NetworkModel::validate() const {
  require(!layers.empty(), "network has no layers");
  require(params.size() == layers.size(), "network parameter list does not match its layers");
  require(n_classes >= 2, "network needs n_classes >= 2");
  require(layers.back().out_units == n_classes, "last layer width must equal n_classes");
  int flat = input_len;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& s = layers[i];
    require(s.in_units == flat, layer_name(i, s) + " input size does not match the previous layer");
    require(s.out_len >= 1, layer_name(i, s) + " has no output positions");
    if (s.activation == Activation::Softmax) {
      require(i + 1 == layers.size(), "Softmax is only allowed on the final layer");
    }
    require(params[i].weights.size() == s.weight_count() && params[i].biases.size() == s.bias_count(),
            layer_name(i, s) + " parameter tensor has the wrong size");
    for (double w : params[i].weights) require(std::isfinite(w), layer_name(i, s) + " has a non-finite weight");
    for (double b : params[i].biases) require(std::isfinite(b), layer_name(i, s) + " has a non-finite bias");
    flat = s.out_units;
  }
}

std::size_t NetworkModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.weights.size() + p.biases.size();
  return n;
}

std::vector<std::size_t> NetworkModel::layer_units() const {
  std::vector<std::size_t> u;
  for (const auto& s : layers) {
    if (s.has_params()) u.push_back(static_cast<std::size_t>(s.out_units));
  }
  return u;
}

std::size_t NetworkModel::mac_count() const {
  std::size_t n = 0;
  for (const auto& s : layers) n += s.macs();
  return n;
}

void initialize(NetworkModel& model, std::uint64_t seed) {
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& s = model.layers[i];
    if (!s.has_params()) continue;
    double fan_in, fan_out;
    if (s.kind == LayerKind::Conv1D) {
      fan_in = static_cast<double>(s.kernel_size) * s.in_channels;
      fan_out = static_cast<double>(s.kernel_size) * s.out_channels;
    } else {
      fan_in = s.in_units;
      fan_out = s.out_units;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Rng rng(derive_seed(seed, {0xA11u, i}));
    std::uniform_real_distribution<double> uni(-limit, limit);
    for (auto& w : model.params[i].weights) w = uni(rng);
    std::fill(model.params[i].biases.begin(), model.params[i].biases.end(), 0.0);
  }
}

NetworkModel build_paper_architecture(int input_len, int n_classes, double scale,
                                      std::uint64_t seed) {
  require(input_len >= 32, "reference architecture needs input_len >= 32");
  require(n_classes >= 2, "reference architecture needs n_classes >= 2");
  require(scale > 0.0 && scale <= 1.0, "architecture scale must lie in (0, 1]");
  const int filters = std::max(2, static_cast<int>(std::lround(16.0 * scale)));
  auto m = make_network(input_len, {conv1d(1, filters, 8, 1, Activation::ReLU),
                                    conv1d(filters, filters, 11, 4, Activation::ReLU), flatten(),
                                    dense(n_classes, Activation::Softmax)});
  m.architecture = "conv1d(k8,s1,f" + std::to_string(filters) + ")-conv1d(k11,s4,f" +
                   std::to_string(filters) + ")-dense(" + std::to_string(n_classes) + ")";
  initialize(m, seed);
  return m;
}

std::vector<double> prepare_input(const NetworkModel& model, const std::vector<double>& raw) {
  return preprocess::prepare(model.transform, raw);
}

std::vector<double> prepare_input(const NetworkModel& model, const std::vector<std::int64_t>& counts) {
  return prepare_input(model, std::vector<double>(counts.begin(), counts.end()));
}

namespace {

void layer_forward(const LayerSpec& s, const LayerParams& p, const double* in, double* out) {
  const auto& k = kernels::active();
  switch (s.kind) {
    case LayerKind::Conv1D: {
      const std::size_t window = static_cast<std::size_t>(s.kernel_size) * s.in_channels;
      for (int t = 0; t < s.out_len; ++t) {
        const double* x = in + static_cast<std::size_t>(t) * s.stride * s.in_channels;
        double* y = out + static_cast<std::size_t>(t) * s.out_channels;
        for (int co = 0; co < s.out_channels; ++co) {
          y[co] = p.biases[co] + k.dot(p.weights.data() + co * window, x, window);
        }
      }
      break;
    }
    case LayerKind::Dense: {
      for (int o = 0; o < s.out_units; ++o) {
        out[o] = p.biases[o] + k.dot(p.weights.data() + static_cast<std::size_t>(o) * s.in_units, in,
                                     static_cast<std::size_t>(s.in_units));
      }
      break;
    }
    case LayerKind::Flatten:
      std::copy(in, in + s.in_units, out);
      break;
  }
}

void activate(Activation a, const std::vector<double>& z, std::vector<double>& out) {
  out.resize(z.size());
  switch (a) {
    case Activation::None:
      out = z;
      break;
    case Activation::ReLU:
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] > 0.0 ? z[i] : 0.0;
      break;
    case Activation::Softmax: {
      const double mx = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - mx);
        sum += out[i];
      }
      for (auto& v : out) v /= sum;
      break;
    }
  }
}

void check_input(const NetworkModel& model, const std::vector<double>& input) {
  require(static_cast<int>(input.size()) == model.input_len,
          "input length " + std::to_string(input.size()) + " does not match network input " +
              std::to_string(model.input_len));
  for (double v : input) require(std::isfinite(v), "input contains a non-finite value");
}

// log-softmax cross-entropy of logits z against label y.
double cross_entropy(const std::vector<double>& z, int y) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  return mx + std::log(sum) - z[static_cast<std::size_t>(y)];
}

void check_label(const NetworkModel& model, int y) {
  require(y >= 0 && y < model.n_classes, "label " + std::to_string(y) + " outside [0, " +
                                             std::to_string(model.n_classes) + ")");
}

}  // namespace

ForwardTrace forward_trace(const NetworkModel& model, const std::vector<double>& input) {
  check_input(model, input);
  ForwardTrace tr;
  tr.pre.resize(model.layers.size());
  tr.post.resize(model.layers.size());
  const std::vector<double>* cur = &input;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& s = model.layers[i];
    tr.pre[i].assign(static_cast<std::size_t>(s.out_units), 0.0);
    layer_forward(s, model.params[i], cur->data(), tr.pre[i].data());
    activate(s.activation, tr.pre[i], tr.post[i]);
    cur = &tr.post[i];
  }
  return tr;
}

std::vector<double> forward(const NetworkModel& model, const std::vector<double>& input) {
  auto tr = forward_trace(model, input);
  return std::move(tr.post.back());
}

int predict(const NetworkModel& model, const std::vector<double>& input) {
  const auto p = forward(model, input);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double loss(const NetworkModel& model, const Batch& batch) {
  require(!batch.inputs.empty() && batch.inputs.size() == batch.labels.size(),
          "loss: batch is empty or inputs/labels differ in size");
  double total = 0.0;
  for (std::size_t n = 0; n < batch.inputs.size(); ++n) {
    check_label(model, batch.labels[n]);
    const auto tr = forward_trace(model, batch.inputs[n]);
    total += cross_entropy(tr.pre.back(), batch.labels[n]);
  }
  return total / static_cast<double>(batch.inputs.size());
}

Gradients grad(const NetworkModel& model, const Batch& batch) {
  require(!batch.inputs.empty(), "grad: empty batch");
  require(batch.inputs.size() == batch.labels.size(), "grad: inputs and labels differ in size");
  require(model.layers.back().activation == Activation::Softmax ||
              model.layers.back().activation == Activation::None,
          "grad: final layer must produce logits or softmax");
  const auto& k = kernels::active();
  const double inv_n = 1.0 / static_cast<double>(batch.inputs.size());

  Gradients g;
  g.layers.resize(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    g.layers[i].weights.assign(model.params[i].weights.size(), 0.0);
    g.layers[i].biases.assign(model.params[i].biases.size(), 0.0);
  }

  for (std::size_t n = 0; n < batch.inputs.size(); ++n) {
    const int y = batch.labels[n];
    check_label(model, y);
    const auto tr = forward_trace(model, batch.inputs[n]);
    const auto& logits = tr.pre.back();
    g.loss += cross_entropy(logits, y) * inv_n;

    // dL/dz at the output: softmax(z) - onehot(y), scaled for the batch mean.
    std::vector<double> dz(logits.size());
    {
      std::vector<double> p;
      activate(Activation::Softmax, logits, p);
      for (std::size_t c = 0; c < p.size(); ++c) dz[c] = (p[c] - (static_cast<int>(c) == y ? 1.0 : 0.0)) * inv_n;
    }

    for (std::size_t li = model.layers.size(); li-- > 0;) {
      const auto& s = model.layers[li];
      const auto& p = model.params[li];
      auto& gl = g.layers[li];
      if (li + 1 != model.layers.size() && s.activation == Activation::ReLU) {
        for (std::size_t u = 0; u < dz.size(); ++u) {
          if (!(tr.pre[li][u] > 0.0)) dz[u] = 0.0;
        }
      }
      const std::vector<double>& in = li == 0 ? batch.inputs[n] : tr.post[li - 1];
      std::vector<double> din(static_cast<std::size_t>(s.in_units), 0.0);
      switch (s.kind) {
        case LayerKind::Conv1D: {
          const std::size_t window = static_cast<std::size_t>(s.kernel_size) * s.in_channels;
          for (int t = 0; t < s.out_len; ++t) {
            const std::size_t off = static_cast<std::size_t>(t) * s.stride * s.in_channels;
            for (int co = 0; co < s.out_channels; ++co) {
              const double d = dz[static_cast<std::size_t>(t) * s.out_channels + co];
              if (d == 0.0) continue;
              gl.biases[co] += d;
              k.axpy(d, in.data() + off, gl.weights.data() + co * window, window);
              if (li > 0) k.axpy(d, p.weights.data() + co * window, din.data() + off, window);
            }
          }
          break;
        }
        case LayerKind::Dense: {
          const auto width = static_cast<std::size_t>(s.in_units);
          for (int o = 0; o < s.out_units; ++o) {
            const double d = dz[static_cast<std::size_t>(o)];
            if (d == 0.0) continue;
            gl.biases[o] += d;
            k.axpy(d, in.data(), gl.weights.data() + o * width, width);
            if (li > 0) k.axpy(d, p.weights.data() + o * width, din.data(), width);
          }
          break;
        }
        case LayerKind::Flatten:
          din = dz;
          break;
      }
      dz = std::move(din);
    }
  }
  return g;
}

void TrainConfig::validate() const {
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be >= 0");
  require(epochs >= 1, "epochs must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
}

namespace {

struct OptimizerState {
  std::vector<LayerParams> m;
  std::vector<LayerParams> v;
  std::int64_t t = 0;
};

void zero_like(const NetworkModel& model, std::vector<LayerParams>& out) {
  out.resize(model.params.size());
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    out[i].weights.assign(model.params[i].weights.size(), 0.0);
    out[i].biases.assign(model.params[i].biases.size(), 0.0);
  }
}

void apply_update(NetworkModel& model, const Gradients& g, const TrainConfig& cfg, OptimizerState& st) {
  ++st.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  auto update = [&](std::vector<double>& w, const std::vector<double>& gw, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      switch (cfg.optimizer) {
        case Optimizer::SGD:
          w[j] -= cfg.learning_rate * gw[j];
          break;
        case Optimizer::Momentum:
          m[j] = cfg.momentum * m[j] + gw[j];
          w[j] -= cfg.learning_rate * m[j];
          break;
        case Optimizer::Adam: {
          m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gw[j];
          v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gw[j] * gw[j];
          const double mh = m[j] / bc1;
          const double vh = v[j] / bc2;
          w[j] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);
          break;
        }
      }
    }
  };
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    update(model.params[i].weights, g.layers[i].weights, st.m[i].weights, st.v[i].weights);
    update(model.params[i].biases, g.layers[i].biases, st.m[i].biases, st.v[i].biases);
  }
  if (cfg.nonpositive_hidden_bias) {
    std::size_t last = 0;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
      if (model.layers[i].has_params()) last = i;
    }
    for (std::size_t i = 0; i < last; ++i) {
      for (double& b : model.params[i].biases) b = std::min(b, 0.0);
    }
  }
}

EpochStats full_pass(const NetworkModel& model, const Batch& data, int epoch) {
  EpochStats e;
  e.epoch = epoch;
  std::size_t correct = 0;
  double total = 0.0;
  for (std::size_t n = 0; n < data.inputs.size(); ++n) {
    const auto tr = forward_trace(model, data.inputs[n]);
    const auto& z = tr.pre.back();
    total += cross_entropy(z, data.labels[n]);
    const int pred = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    if (pred == data.labels[n]) ++correct;
  }
  e.loss = total / static_cast<double>(data.inputs.size());
  e.accuracy = static_cast<double>(correct) / static_cast<double>(data.inputs.size());
  return e;
}

}  // namespace

TrainResult train(NetworkModel model, const Batch& data, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  require(!data.inputs.empty(), "train: empty training set");
  require(data.inputs.size() == data.labels.size(), "train: inputs and labels differ in size");
  for (int y : data.labels) check_label(model, y);
  for (const auto& x : data.inputs) check_input(model, x);

  TrainResult res;
  OptimizerState st;
  zero_like(model, st.m);
  zero_like(model, st.v);
  res.trace.push_back(full_pass(model, data, 0));

  std::vector<std::size_t> order(data.inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, {0x5A1Eu, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      Batch batch;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t j = start; j < end; ++j) {
        batch.inputs.push_back(data.inputs[order[j]]);
        batch.labels.push_back(data.labels[order[j]]);
      }
      const auto g = grad(model, batch);
      if (!std::isfinite(g.loss)) {
        throw NumericError("training diverged: loss is " + std::to_string(g.loss) + " at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      apply_update(model, g, cfg, st);
    }
    auto stats = full_pass(model, data, epoch);
    if (!std::isfinite(stats.loss)) {
      throw NumericError("training diverged: loss is non-finite after epoch " + std::to_string(epoch));
    }
    res.trace.push_back(stats);
  }
  res.model = std::move(model);
  return res;
}

Metrics metrics_from_predictions(const std::vector<int>& predicted, const std::vector<int>& truth,
                                 int n_classes) {
  require(!truth.empty(), "evaluate: empty test set");
  require(predicted.size() == truth.size(), "evaluate: prediction count differs from label count");
  require(n_classes >= 1, "evaluate: n_classes must be >= 1");
  Metrics m;
  m.total = truth.size();
  m.confusion.assign(static_cast<std::size_t>(n_classes), std::vector<std::int64_t>(static_cast<std::size_t>(n_classes), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < n_classes, "evaluate: label " + std::to_string(truth[i]) + " out of range");
    require(predicted[i] >= 0 && predicted[i] < n_classes, "evaluate: prediction out of range");
    ++m.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  std::int64_t diag = 0;
  m.precision.assign(static_cast<std::size_t>(n_classes), 0.0);
  m.recall.assign(static_cast<std::size_t>(n_classes), 0.0);
  for (int c = 0; c < n_classes; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    diag += m.confusion[uc][uc];
    std::int64_t row = 0, col = 0;
    for (int j = 0; j < n_classes; ++j) {
      row += m.confusion[uc][static_cast<std::size_t>(j)];
      col += m.confusion[static_cast<std::size_t>(j)][uc];
    }
    m.recall[uc] = row > 0 ? static_cast<double>(m.confusion[uc][uc]) / row : 0.0;
    m.precision[uc] = col > 0 ? static_cast<double>(m.confusion[uc][uc]) / col : 0.0;
  }
  m.accuracy = static_cast<double>(diag) / static_cast<double>(m.total);
  return m;
}

Metrics evaluate(const NetworkModel& model, const Batch& data) {
  require(!data.inputs.empty(), "evaluate: empty test set");
  for (int y : data.labels) check_label(model, y);
  std::vector<int> pred;
  pred.reserve(data.inputs.size());
  for (const auto& x : data.inputs) pred.push_back(predict(model, x));
  return metrics_from_predictions(pred, data.labels, model.n_classes);
}

}  // namespace spikeid::ann
