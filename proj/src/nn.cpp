#include "raylearn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace raylearn {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kSoftmax: return "softmax";
  }
  throw ContractViolation("activation_name: unknown activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "softmax") return Activation::kSoftmax;
  throw IoError("unknown activation name: " + name);
}

size_t TinyMlp::parameter_count() const {
  size_t n = 0;
  for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

static void validate_shape(const std::vector<int>& sizes,
                           const std::vector<Activation>& activations) {
  require(sizes.size() >= 2, "network needs an input and an output layer");
  for (int s : sizes) require(s > 0, "layer sizes must be positive");
  require(activations.size() == sizes.size() - 1,
          "need exactly one activation per weight layer");
  for (size_t l = 0; l + 1 < activations.size(); ++l)
    require(activations[l] != Activation::kSoftmax,
            "softmax is only allowed on the output layer");
}

TinyMlp make_mlp(const std::vector<int>& layer_sizes,
                 const std::vector<Activation>& activations, uint64_t seed) {
  validate_shape(layer_sizes, activations);
  TinyMlp net;
  net.layer_sizes = layer_sizes;
  net.activations = activations;
  Rng rng(seed);
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    int fan_in = layer_sizes[l], fan_out = layer_sizes[l + 1];
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(size_t(fan_in) * fan_out);
    for (double& v : w) v = rng.uniform(-limit, limit);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::vector<double>(fan_out, 0.0));
  }
  return net;
}

std::vector<double> softmax(std::span<const double> scores) {
  require(!scores.empty(), "softmax: empty score vector");
  double peak = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double sum = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - peak);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

const std::vector<double>& forward(const TinyMlp& net, std::span<const double> input,
                                   ForwardCache& cache) {
  require(int(input.size()) == net.input_size(), "forward: input arity mismatch");
  const int layers = net.weight_layer_count();
  cache.layer_sizes = net.layer_sizes;
  cache.pre.resize(layers);
  cache.post.resize(layers + 1);
  cache.post[0].assign(input.begin(), input.end());

  for (int l = 0; l < layers; ++l) {
    const int in_n = net.layer_sizes[l], out_n = net.layer_sizes[l + 1];
    const std::vector<double>& x = cache.post[l];
    std::vector<double>& z = cache.pre[l];
    z.resize(out_n);
    const double* w = net.weights[l].data();
    for (int row = 0; row < out_n; ++row) {
      double acc = net.biases[l][row];
      const double* wr = w + size_t(row) * in_n;
      for (int col = 0; col < in_n; ++col) acc += wr[col] * x[col];
      z[row] = acc;
    }
    std::vector<double>& y = cache.post[l + 1];
    switch (net.activations[l]) {
      case Activation::kIdentity:
        y = z;
        break;
      case Activation::kRelu:
        y.resize(out_n);
        for (int i = 0; i < out_n; ++i) y[i] = z[i] > 0 ? z[i] : 0.0;
        break;
      case Activation::kSoftmax:
        y = softmax(z);
        break;
    }
  }
  return cache.post.back();
}

void Gradients::resize_for(const TinyMlp& net) {
  const int layers = net.weight_layer_count();
  weights.resize(layers);
  biases.resize(layers);
  delta.resize(layers);
  for (int l = 0; l < layers; ++l) {
    weights[l].assign(net.weights[l].size(), 0.0);
    biases[l].assign(net.biases[l].size(), 0.0);
    delta[l].resize(net.biases[l].size());
  }
}

void Gradients::clear() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void backward(const TinyMlp& net, const ForwardCache& cache,
              std::span<const double> output_gradient, Gradients& grads) {
  require(cache.layer_sizes == net.layer_sizes, "backward: cache does not match network");
  require(int(output_gradient.size()) == net.output_size(),
          "backward: output gradient arity mismatch");
  const int layers = net.weight_layer_count();
  if (grads.weights.size() != size_t(layers)) grads.resize_for(net);

  for (int l = layers - 1; l >= 0; --l) {
    const int in_n = net.layer_sizes[l], out_n = net.layer_sizes[l + 1];
    std::vector<double>& d = grads.delta[l];
    d.resize(out_n);

    // dLoss/dPost of this layer, from the output gradient or the layer above.
    auto upstream = [&](int i) -> double {
      if (l == layers - 1) return output_gradient[i];
      const int next_out = net.layer_sizes[l + 2];
      const double* wn = net.weights[l + 1].data();
      const std::vector<double>& dn = grads.delta[l + 1];
      double acc = 0;
      for (int row = 0; row < next_out; ++row) acc += wn[size_t(row) * out_n + i] * dn[row];
      return acc;
    };

    switch (net.activations[l]) {
      case Activation::kIdentity:
        for (int i = 0; i < out_n; ++i) d[i] = upstream(i);
        break;
      case Activation::kRelu:
        for (int i = 0; i < out_n; ++i) d[i] = cache.pre[l][i] > 0 ? upstream(i) : 0.0;
        break;
      case Activation::kSoftmax: {
        // Full Jacobian: dL/dz_i = p_i (g_i - sum_j g_j p_j).
        const std::vector<double>& p = cache.post[l + 1];
        double mix = 0;
        for (int j = 0; j < out_n; ++j) mix += upstream(j) * p[j];
        for (int i = 0; i < out_n; ++i) d[i] = p[i] * (upstream(i) - mix);
        break;
      }
    }

    const std::vector<double>& x = cache.post[l];
    double* gw = grads.weights[l].data();
    for (int row = 0; row < out_n; ++row) {
      const double dr = d[row];
      grads.biases[l][row] += dr;
      double* gwr = gw + size_t(row) * in_n;
      for (int col = 0; col < in_n; ++col) gwr[col] += dr * x[col];
    }
  }
}

void sgd_step(TinyMlp& net, const Gradients& grads, double rate) {
  require(rate > 0, "sgd_step: learning rate must be positive");
  require(grads.weights.size() == net.weights.size(), "sgd_step: gradient shape mismatch");
  for (size_t l = 0; l < net.weights.size(); ++l) {
    require(grads.weights[l].size() == net.weights[l].size() &&
                grads.biases[l].size() == net.biases[l].size(),
            "sgd_step: gradient shape mismatch");
    for (double g : grads.weights[l])
      if (!std::isfinite(g)) throw TrainingError("sgd_step: nonfinite weight gradient");
    for (double g : grads.biases[l])
      if (!std::isfinite(g)) throw TrainingError("sgd_step: nonfinite bias gradient");
  }
  for (size_t l = 0; l < net.weights.size(); ++l) {
    for (size_t i = 0; i < net.weights[l].size(); ++i) net.weights[l][i] -= rate * grads.weights[l][i];
    for (size_t i = 0; i < net.biases[l].size(); ++i) net.biases[l][i] -= rate * grads.biases[l][i];
  }
}

double train_minibatch(TinyMlp& net, const MiniBatch& batch, LossKind kind, double rate) {
  require(!batch.empty(), "train_minibatch: empty batch");
  const double inv_n = 1.0 / double(batch.size());
  ForwardCache cache;
  Gradients grads;
  grads.resize_for(net);
  std::vector<double> out_grad(net.output_size());

  double mean_loss = 0;
  for (const TrainingSample& s : batch) {
    require(s.weight >= 0 && std::isfinite(s.weight), "train_minibatch: bad sample weight");
    const std::vector<double>& out = forward(net, s.input, cache);
    double loss = 0;
    switch (kind) {
      case LossKind::kSquaredError: {
        require(s.target.size() == out.size(), "train_minibatch: target arity mismatch");
        for (size_t i = 0; i < out.size(); ++i) {
          double diff = out[i] - s.target[i];
          loss += diff * diff;
          out_grad[i] = 2.0 * diff * s.weight * inv_n;
        }
        loss *= s.weight;
        break;
      }
      case LossKind::kWeightedNll: {
        require(s.target_class >= 0 && s.target_class < int(out.size()),
                "train_minibatch: target class out of range");
        double p = out[s.target_class];
        loss = -s.weight * std::log(std::max(p, 1e-300));
        std::fill(out_grad.begin(), out_grad.end(), 0.0);
        out_grad[s.target_class] = -s.weight / std::max(p, 1e-300) * inv_n;
        break;
      }
    }
    mean_loss += loss * inv_n;
    backward(net, cache, out_grad, grads);
  }
  sgd_step(net, grads, rate);
  return mean_loss;
}

// ---- serialization ----

namespace {

constexpr uint32_t kNetMagic = 0x314e4e54u;  // "TNN1"

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("network file truncated");
  return v;
}

}  // namespace

void save_network(const TinyMlp& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_pod(os, kNetMagic);
  write_pod(os, uint32_t(net.layer_sizes.size()));
  for (int s : net.layer_sizes) write_pod(os, uint32_t(s));
  for (size_t l = 0; l < net.weights.size(); ++l) {
    os.write(reinterpret_cast<const char*>(net.weights[l].data()),
             std::streamsize(net.weights[l].size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(net.biases[l].data()),
             std::streamsize(net.biases[l].size() * sizeof(double)));
  }
  if (!os) throw IoError("write failed: " + path);

  nlohmann::json meta;
  meta["format"] = "raylearn-network-v1";
  meta["layer_sizes"] = net.layer_sizes;
  std::vector<std::string> names;
  for (Activation a : net.activations) names.push_back(activation_name(a));
  meta["activations"] = names;
  meta["parameter_count"] = net.parameter_count();
  std::ofstream ms(path + ".json");
  if (!ms) throw IoError("cannot open for writing: " + path + ".json");
  ms << meta.dump(2) << "\n";
  if (!ms) throw IoError("write failed: " + path + ".json");
}

TinyMlp load_network(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  if (read_pod<uint32_t>(is) != kNetMagic) throw IoError("not a network file: " + path);
  uint32_t layer_count = read_pod<uint32_t>(is);
  if (layer_count < 2 || layer_count > 64) throw IoError("implausible layer count: " + path);
  std::vector<int> sizes(layer_count);
  for (uint32_t i = 0; i < layer_count; ++i) {
    sizes[i] = int(read_pod<uint32_t>(is));
    if (sizes[i] <= 0 || sizes[i] > (1 << 20)) throw IoError("implausible layer size: " + path);
  }

  std::ifstream ms(path + ".json");
  if (!ms) throw IoError("missing metadata sidecar: " + path + ".json");
  nlohmann::json meta;
  try {
    ms >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad metadata sidecar: " + std::string(e.what()));
  }
  if (meta.value("layer_sizes", std::vector<int>{}) != sizes)
    throw IoError("sidecar layer sizes disagree with binary: " + path);
  std::vector<Activation> acts;
  for (const auto& name : meta.at("activations")) acts.push_back(activation_from_name(name));
  if (acts.size() != sizes.size() - 1) throw IoError("sidecar activation count mismatch: " + path);

  TinyMlp net;
  net.layer_sizes = sizes;
  net.activations = acts;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    std::vector<double> w(size_t(sizes[l]) * sizes[l + 1]);
    std::vector<double> b(size_t(sizes[l + 1]));
    is.read(reinterpret_cast<char*>(w.data()), std::streamsize(w.size() * sizeof(double)));
    is.read(reinterpret_cast<char*>(b.data()), std::streamsize(b.size() * sizeof(double)));
    if (!is) throw IoError("network file truncated: " + path);
    for (double v : w)
      if (!std::isfinite(v)) throw IoError("nonfinite parameter in: " + path);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

void append_network_blob(const TinyMlp& net, std::vector<uint8_t>& out) {
  auto push_pod = [&out](const auto& v) {
    const uint8_t* p = reinterpret_cast<const uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(v));
  };
  push_pod(uint32_t(net.layer_sizes.size()));
  for (int s : net.layer_sizes) push_pod(uint32_t(s));
  for (Activation a : net.activations) out.push_back(uint8_t(a));
  for (size_t l = 0; l < net.weights.size(); ++l) {
    for (double v : net.weights[l]) push_pod(v);
    for (double v : net.biases[l]) push_pod(v);
  }
}

TinyMlp read_network_blob(const uint8_t*& cursor, const uint8_t* end) {
  auto take = [&cursor, end](void* dst, size_t n) {
    if (cursor + n > end) throw IoError("embedded network blob truncated");
    std::memcpy(dst, cursor, n);
    cursor += n;
  };
  uint32_t layer_count = 0;
  take(&layer_count, sizeof(layer_count));
  if (layer_count < 2 || layer_count > 64) throw IoError("implausible embedded layer count");
  std::vector<int> sizes(layer_count);
  for (auto& s : sizes) {
    uint32_t v = 0;
    take(&v, sizeof(v));
    if (v == 0 || v > (1u << 20)) throw IoError("implausible embedded layer size");
    s = int(v);
  }
  TinyMlp net;
  net.layer_sizes = sizes;
  for (uint32_t l = 0; l + 1 < layer_count; ++l) {
    uint8_t code = 0;
    take(&code, 1);
    if (code > 2) throw IoError("bad embedded activation code");
    net.activations.push_back(Activation(code));
  }
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    std::vector<double> w(size_t(sizes[l]) * sizes[l + 1]);
    std::vector<double> b(size_t(sizes[l + 1]));
    take(w.data(), w.size() * sizeof(double));
    take(b.data(), b.size() * sizeof(double));
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  validate_shape(net.layer_sizes, net.activations);
  return net;
}

}  // namespace raylearn
