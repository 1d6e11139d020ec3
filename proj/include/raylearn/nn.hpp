#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "raylearn/common.hpp"

namespace raylearn {

enum class Activation : uint8_t { kIdentity = 0, kRelu = 1, kSoftmax = 2 };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Dense multilayer perceptron. Weights are stored row-major per layer:
// weights[l][row * layer_sizes[l] + col] feeds neuron `row` of layer l+1
// from neuron `col` of layer l. Softmax is only valid on the output layer.
struct TinyMlp {
  std::vector<int> layer_sizes;
  std::vector<Activation> activations;        // one entry per weight layer
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  int weight_layer_count() const { return int(weights.size()); }
  size_t parameter_count() const;
};

// Glorot-uniform initialization in +-sqrt(6/(fan_in+fan_out)) from the
// portable seeded generator, so identical seeds give identical networks on
// every platform.
TinyMlp make_mlp(const std::vector<int>& layer_sizes,
                 const std::vector<Activation>& activations, uint64_t seed);

// Per-layer activations recorded by forward() and consumed by backward().
// Reusable across calls; buffers are grown once and overwritten in place.
struct ForwardCache {
  std::vector<int> layer_sizes;               // shape stamp for mismatch checks
  std::vector<std::vector<double>> pre;       // pre-activation per weight layer
  std::vector<std::vector<double>> post;      // post[0] is the input copy
};

// Evaluates the network; returns a reference to the output activations held
// by the cache. Pure with respect to the network.
const std::vector<double>& forward(const TinyMlp& net, std::span<const double> input,
                                   ForwardCache& cache);

// Parameter gradients plus scratch space for the backward sweep.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::vector<std::vector<double>> delta;     // scratch: dLoss/dPre per layer

  void resize_for(const TinyMlp& net);
  void clear();
};

// Accumulates dLoss/dParameter into `grads` given dLoss/dOutput. The cache
// must come from a forward() call on a network of the same shape.
void backward(const TinyMlp& net, const ForwardCache& cache,
              std::span<const double> output_gradient, Gradients& grads);

// Applies one gradient-descent step. A nonfinite gradient rejects the whole
// step and raises TrainingError, leaving the network untouched.
void sgd_step(TinyMlp& net, const Gradients& grads, double rate);

// Numerically stable softmax (max-subtracted, normalized).
std::vector<double> softmax(std::span<const double> scores);

enum class LossKind {
  kSquaredError,   // weight * sum((out - target)^2)
  kWeightedNll,    // -weight * log(out[target_class])
};

struct TrainingSample {
  std::vector<double> input;
  std::vector<double> target;   // squared error
  int target_class = -1;        // weighted NLL
  double weight = 1.0;
};

using MiniBatch = std::vector<TrainingSample>;

// One SGD step on the mean gradient of the batch; returns the pre-step mean
// loss.
double train_minibatch(TinyMlp& net, const MiniBatch& batch, LossKind kind, double rate);

// Step-count learning-rate schedule: halves the base rate after each quarter
// of the training budget.
inline double scheduled_rate(double base, uint64_t step, uint64_t budget) {
  if (budget == 0) return base;
  uint64_t quarter = (4 * step) / budget;
  if (quarter > 3) quarter = 3;
  double rate = base;
  for (uint64_t i = 0; i < quarter; ++i) rate *= 0.5;
  return rate;
}

// Flat little-endian binary (sizes header, then row-major weights and biases
// per layer as 64-bit reals) plus a JSON sidecar at path + ".json" carrying
// the activation names.
void save_network(const TinyMlp& net, const std::string& path);
TinyMlp load_network(const std::string& path);

// Compact embedded form used inside aggregate files: sizes, activation
// codes, then parameters.
void append_network_blob(const TinyMlp& net, std::vector<uint8_t>& out);
TinyMlp read_network_blob(const uint8_t*& cursor, const uint8_t* end);

}  // namespace raylearn
