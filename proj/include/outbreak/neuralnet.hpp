#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "outbreak/features.hpp"

namespace outbreak {

enum class Activation { relu, identity };

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::relu;
};

/// Dense feed-forward regressor: ReLU hidden layers, linear scalar output.
struct Network {
  std::vector<DenseLayer> layers;

  std::vector<std::size_t> layer_sizes() const;
  std::size_t input_dim() const;
  std::size_t parameter_count() const;
  /// Sum of squared weight entries; biases are not included.
  double weight_sq_sum() const;
};

/// input -> 256 -> 128 -> 64 -> 32 -> 1: five dense layers.
std::vector<std::size_t> default_layer_sizes(std::size_t input_dim);

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from a seeded mt19937_64,
/// zero biases. Throws Errc::BadArchitecture.
Network init_network(std::span<const std::size_t> layer_sizes, std::uint64_t seed);

/// Everything backward needs. Index k refers to layer k.
struct ForwardTrace {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> pre_activations;
  std::vector<Eigen::VectorXd> activations;
  double prediction = 0.0;
};

/// Throws Errc::DimMismatch.
ForwardTrace forward(const Network& net, std::span<const double> x);

struct LossValue {
  double data = 0.0;
  double regularized = 0.0;
};

/// Squared error plus lambda * sum of squared weights.
LossValue loss(double prediction, double target, const Network& net, double lambda);

/// Parameter-shaped storage used for gradients and Adam moments.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;

  static Gradients zeros_like(const Network& net);
};

/// Exact gradient of the regularized single-example loss. The ReLU
/// derivative at 0 is 0. Throws Errc::TraceMismatch.
Gradients backward(const Network& net, const ForwardTrace& trace, double target, double lambda);

struct BatchGradients {
  double data_loss = 0.0;  // mean over the batch
  Gradients gradients;     // of mean data loss + lambda * sum W^2
};

/// Column-per-example batch version of forward + backward.
BatchGradients batch_gradients(const Network& net, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                               double lambda);

struct HyperParams {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lambda = 1e-4;
  std::size_t epochs = 1000;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;

  /// Throws Errc::BadValue naming the first offending field.
  void validate() const;
};

struct AdamState {
  Gradients m;
  Gradients v;
  std::uint64_t t = 0;

  static AdamState for_network(const Network& net);
};

/// One bias-corrected Adam update of every parameter. Throws
/// Errc::ShapeMismatch when state, parameters and gradients disagree.
void adam_step(AdamState& state, Network& net, const Gradients& grads, const HyperParams& hp);

struct EpochLoss {
  double data = 0.0;         // sample-weighted mean of the epoch's batch losses
  double regularized = 0.0;  // data + lambda * sum W^2 at epoch end
};

struct TrainingHistory {
  std::vector<EpochLoss> epochs;
  std::uint64_t steps = 0;
};

/// Mini-batch Adam on batch-mean gradients, reshuffling each epoch from
/// hp.seed. Throws Errc::EmptyDataset, Errc::DimMismatch, or
/// NonFiniteLossError carrying the 0-based epoch.
TrainingHistory train(Network& net, std::span<const TrainingRow> rows, const HyperParams& hp);

/// Forward pass, inverse target scaling, clamp at 0.
double predict(const Network& net, const ScalerParams& scaler, const FeatureVector& x);

/// Largest relative disagreement between `analytic` and central differences
/// of the regularized loss, relative to max(|analytic|, |numeric|, 1e-12).
double compare_gradients(const Network& net, std::span<const double> x, double target, double lambda, double h,
                         const Gradients& analytic);

/// compare_gradients against backward() at (x, target).
double grad_check(const Network& net, std::span<const double> x, double target, double lambda, double h);

struct Checkpoint {
  Network net;
  ScalerParams scaler;
};

/// `OUTBREAKNET v1 sizes=...`, weight rows and bias per layer, then the
/// scaler. Values use 17 significant digits so load/save is bit-exact.
void write_checkpoint(std::ostream& out, const Network& net, const ScalerParams& scaler);

/// Throws Errc::BadCheckpoint.
Checkpoint read_checkpoint(std::istream& in);

}  // namespace outbreak
