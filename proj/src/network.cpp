#include "scriptauth/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "scriptauth/error.hpp"

namespace scriptauth::nn {

namespace {

void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " has length " +
                                                  std::to_string(got) + ", expected " +
                                                  std::to_string(want));
  }
}

void check_sample(const Network& net, const TrainingSample& sample) {
  require_length(sample.input.size(), net.topology().input_units, "input");
  require_length(sample.target.size(), net.topology().output_units, "target");
}

constexpr double kLargestBelowOne = 1.0 - 0x1.0p-53;

}  // namespace

void NetworkTopology::validate() const {
  if (input_units < 1 || output_units < 1) {
    throw Error(ErrorKind::InvalidConfig, "input and output unit counts must be >= 1");
  }
  if (hidden_layers.empty()) {
    throw Error(ErrorKind::InvalidConfig, "at least one hidden layer is required");
  }
  if (std::ranges::any_of(hidden_layers, [](std::size_t n) { return n < 1; })) {
    throw Error(ErrorKind::InvalidConfig, "hidden layers need at least one unit");
  }
}

std::vector<std::size_t> NetworkTopology::layer_sizes() const {
  std::vector<std::size_t> sizes{input_units};
  sizes.insert(sizes.end(), hidden_layers.begin(), hidden_layers.end());
  sizes.push_back(output_units);
  return sizes;
}

Network::Network(NetworkTopology topology, std::vector<Layer> layers)
    : topology_(std::move(topology)), layers_(std::move(layers)) {
  topology_.validate();
  const auto sizes = topology_.layer_sizes();
  if (layers_.size() + 1 != sizes.size()) {
    throw Error(ErrorKind::InvalidConfig, "layer count does not match topology");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weights.rows() != sizes[l + 1] || layer.weights.cols() != sizes[l] ||
        layer.biases.size() != sizes[l + 1]) {
      throw Error(ErrorKind::InvalidConfig,
                  "layer " + std::to_string(l) + " shape does not match topology");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::ranges::all_of(layer.weights.data(), finite) ||
        !std::ranges::all_of(layer.biases, finite)) {
      throw Error(ErrorKind::InvalidConfig, "non-finite parameter in layer " + std::to_string(l));
    }
  }
}

Network Network::initialize(const NetworkTopology& topology, std::uint64_t seed) {
  topology.validate();
  std::mt19937_64 rng(seed);
  const auto draw = [&rng] { return -0.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  const auto sizes = topology.layer_sizes();
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Layer layer{Matrix(sizes[l + 1], sizes[l]), std::vector<double>(sizes[l + 1])};
    for (double& w : layer.weights.data()) w = draw();
    for (double& b : layer.biases) b = draw();
    layers.push_back(std::move(layer));
  }
  return Network(topology, std::move(layers));
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) n += layer.weights.data().size() + layer.biases.size();
  return n;
}

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::InvalidConfig, "learning_rate must be positive");
  }
  if (!(max_error > 0.0) || !std::isfinite(max_error)) {
    throw Error(ErrorKind::InvalidConfig, "max_error must be positive");
  }
  if (max_iterations < 1) throw Error(ErrorKind::InvalidConfig, "max_iterations must be >= 1");
}

// 2 / (1 + e^-x) - 1 == tanh(x / 2); tanh avoids overflow of e^-x. Results
// are kept strictly inside (-1, 1) so the derivative never collapses to 0.
double activation(double x) {
  return std::clamp(std::tanh(0.5 * x), -kLargestBelowOne, kLargestBelowOne);
}

double activation_derivative(double y) { return 0.5 * (1.0 + y) * (1.0 - y); }

LayerActivations forward(const Network& net, std::span<const double> input) {
  require_length(input.size(), net.topology().input_units, "input");
  LayerActivations acts;
  acts.reserve(net.layers().size());
  std::span<const double> prev = input;
  for (const Layer& layer : net.layers()) {
    std::vector<double> out(layer.weights.rows());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto w = layer.weights.row(i);
      double z = layer.biases[i];
      for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * prev[j];
      out[i] = activation(z);
    }
    acts.push_back(std::move(out));
    prev = acts.back();
  }
  return acts;
}

std::vector<double> predict(const Network& net, std::span<const double> input) {
  return std::move(forward(net, input).back());
}

double sample_error(std::span<const double> output, std::span<const double> target) {
  require_length(output.size(), target.size(), "output");
  double sum = 0.0;
  for (std::size_t i = 0; i < output.size(); ++i) {
    const double d = target[i] - output[i];
    sum += d * d;
  }
  return 0.5 * sum;
}

namespace {

// Backpropagated deltas dE/dz per non-input layer.
std::vector<std::vector<double>> backward_deltas(const Network& net, const LayerActivations& acts,
                                                 std::span<const double> target) {
  const auto& layers = net.layers();
  std::vector<std::vector<double>> deltas(layers.size());

  const auto& out = acts.back();
  deltas.back().resize(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    deltas.back()[i] = -(target[i] - out[i]) * activation_derivative(out[i]);
  }

  for (std::size_t l = layers.size() - 1; l-- > 0;) {
    const Matrix& w_next = layers[l + 1].weights;
    const auto& a = acts[l];
    const auto& d_next = deltas[l + 1];
    auto& d = deltas[l];
    d.assign(a.size(), 0.0);
    for (std::size_t k = 0; k < w_next.rows(); ++k) {
      for (std::size_t j = 0; j < w_next.cols(); ++j) d[j] += w_next(k, j) * d_next[k];
    }
    for (std::size_t j = 0; j < d.size(); ++j) d[j] *= activation_derivative(a[j]);
  }
  return deltas;
}

}  // namespace

Gradients compute_gradients(const Network& net, const TrainingSample& sample) {
  check_sample(net, sample);
  const auto acts = forward(net, sample.input);
  const auto deltas = backward_deltas(net, acts, sample.target);

  Gradients g;
  g.error = sample_error(acts.back(), sample.target);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const std::span<const double> prev = l == 0 ? std::span<const double>(sample.input)
                                                : std::span<const double>(acts[l - 1]);
    Matrix gw(deltas[l].size(), prev.size());
    for (std::size_t i = 0; i < gw.rows(); ++i) {
      for (std::size_t j = 0; j < gw.cols(); ++j) gw(i, j) = deltas[l][i] * prev[j];
    }
    g.weights.push_back(std::move(gw));
    g.biases.push_back(deltas[l]);
  }
  return g;
}

double train_step(Network& net, const TrainingSample& sample, double learning_rate) {
  // Every delta is computed from the pre-update weights, then all layers move.
  const Gradients g = compute_gradients(net, sample);
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto w = layers[l].weights.data();
    const auto gw = g.weights[l].data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= learning_rate * gw[k];
    auto& b = layers[l].biases;
    for (std::size_t k = 0; k < b.size(); ++k) b[k] -= learning_rate * g.biases[l][k];
  }
  return g.error;
}

TrainingReport train(Network& net, std::span<const TrainingSample> samples,
                     const TrainingConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  if (samples.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training samples");
  for (const auto& s : samples) check_sample(net, s);

  const auto start = std::chrono::steady_clock::now();
  TrainingReport report;
  for (std::size_t epoch = 1; epoch <= cfg.max_iterations; ++epoch) {
    double epoch_error = 0.0;
    for (const auto& s : samples) epoch_error += train_step(net, s, cfg.learning_rate);
    report.final_error = epoch_error;
    report.iterations_run = epoch;
    if (epoch_error <= cfg.max_error) {
      report.converged = true;
      break;
    }
    if (observer && !observer({epoch, epoch_error})) break;
  }
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double gradient_deviation(const Network& net, const TrainingSample& sample,
                          const Gradients& analytic, double epsilon) {
  check_sample(net, sample);
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidConfig, "epsilon must be positive");

  Network probe = net;
  const auto loss = [&] { return sample_error(predict(probe, sample.input), sample.target); };
  double worst = 0.0;
  const auto compare = [&](double& param, double g_analytic) {
    const double saved = param;
    param = saved + epsilon;
    const double plus = loss();
    param = saved - epsilon;
    const double minus = loss();
    param = saved;
    const double g_numeric = (plus - minus) / (2.0 * epsilon);
    const double scale = std::max({std::abs(g_analytic), std::abs(g_numeric), 1e-12});
    worst = std::max(worst, std::abs(g_analytic - g_numeric) / scale);
  };

  for (std::size_t l = 0; l < probe.layers().size(); ++l) {
    auto w = probe.layers()[l].weights.data();
    const auto gw = analytic.weights.at(l).data();
    for (std::size_t k = 0; k < w.size(); ++k) compare(w[k], gw[k]);
    auto& b = probe.layers()[l].biases;
    for (std::size_t k = 0; k < b.size(); ++k) compare(b[k], analytic.biases.at(l).at(k));
  }
  return worst;
}

double gradient_check(const Network& net, const TrainingSample& sample, double epsilon) {
  return gradient_deviation(net, sample, compute_gradients(net, sample), epsilon);
}

}  // namespace scriptauth::nn
