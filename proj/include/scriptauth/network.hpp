#pragma once

// Fully connected feedforward network with the bipolar sigmoid
// f(x) = 2 / (1 + e^-x) - 1, trained by per-sample backpropagation on
// E = 1/2 * sum (target - output)^2.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace scriptauth::nn {

struct NetworkTopology {
  std::size_t input_units = 0;
  std::vector<std::size_t> hidden_layers;
  std::size_t output_units = 0;

  void validate() const;
  /// Unit counts from input to output, e.g. {256, 30, 5}.
  std::vector<std::size_t> layer_sizes() const;

  friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;
};

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// One non-input layer: weights are fan_out x fan_in.
struct Layer {
  Matrix weights;
  std::vector<double> biases;

  friend bool operator==(const Layer&, const Layer&) = default;
};

class Network {
 public:
  /// Throws Error{InvalidConfig} on a shape mismatch or non-finite weight.
  Network(NetworkTopology topology, std::vector<Layer> layers);

  /// Weights and biases ~ U[-0.5, 0.5) from std::mt19937_64(seed). Layers are
  /// filled input side first; within a layer the weight matrix row-major,
  /// then the biases. Each draw x maps to -0.5 + (x >> 11) * 2^-53.
  static Network initialize(const NetworkTopology& topology, std::uint64_t seed);

  const NetworkTopology& topology() const noexcept { return topology_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& layers() noexcept { return layers_; }

  std::size_t parameter_count() const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  NetworkTopology topology_;
  std::vector<Layer> layers_;
};

struct TrainingConfig {
  double learning_rate = 0.25;
  double max_error = 0.5;
  std::size_t max_iterations = 10000;
  std::uint64_t seed = 42;

  void validate() const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct TrainingSample {
  std::vector<double> input;
  std::vector<double> target;
};

struct TrainingReport {
  double final_error = 0.0;
  std::size_t iterations_run = 0;
  bool converged = false;
  double elapsed_seconds = 0.0;
};

double activation(double x);
/// Derivative expressed through the activated value y = f(x).
double activation_derivative(double y);

/// Activations of every non-input layer; back() is the network output.
using LayerActivations = std::vector<std::vector<double>>;

LayerActivations forward(const Network& net, std::span<const double> input);
std::vector<double> predict(const Network& net, std::span<const double> input);

double sample_error(std::span<const double> output, std::span<const double> target);

/// dE/dparameter for a single sample, shaped like the network.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  double error = 0.0;
};

Gradients compute_gradients(const Network& net, const TrainingSample& sample);

/// One SGD update; returns the sample's error before the update.
double train_step(Network& net, const TrainingSample& sample, double learning_rate);

struct EpochProgress {
  std::size_t epoch = 0;
  double error = 0.0;
};

/// Return false to stop training early.
using EpochObserver = std::function<bool(const EpochProgress&)>;

/// Epoch = train_step over every sample in the given order. The epoch error
/// is the sum of pre-update sample errors; training stops as soon as it is
/// <= cfg.max_error, or after cfg.max_iterations epochs.
TrainingReport train(Network& net, std::span<const TrainingSample> samples,
                     const TrainingConfig& cfg, const EpochObserver& observer = {});

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-12) over every
/// weight and bias, using central differences of sample_error.
double gradient_deviation(const Network& net, const TrainingSample& sample,
                          const Gradients& analytic, double epsilon);
double gradient_check(const Network& net, const TrainingSample& sample, double epsilon);

}  // namespace scriptauth::nn
