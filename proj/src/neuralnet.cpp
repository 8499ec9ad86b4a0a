#include "outbreak/neuralnet.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "outbreak/io.hpp"

namespace outbreak {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Fisher-Yates with an explicit draw so the permutation does not depend on
// the standard library's shuffle.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

Eigen::VectorXd activate(const Eigen::VectorXd& z, Activation a) {
  return a == Activation::relu ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
}

template <typename Derived>
auto relu_mask(const Eigen::MatrixBase<Derived>& z) {
  return (z.array() > 0.0).template cast<double>();
}

void check_same_shape(const Gradients& g, const Network& net, std::string_view what) {
  bool ok = g.weights.size() == net.layers.size() && g.bias.size() == net.layers.size();
  for (std::size_t l = 0; ok && l < net.layers.size(); ++l) {
    ok = g.weights[l].rows() == net.layers[l].weights.rows() && g.weights[l].cols() == net.layers[l].weights.cols() &&
         g.bias[l].size() == net.layers[l].bias.size();
  }
  if (!ok) throw Error(Errc::ShapeMismatch, std::string(what) + " do not match the network parameters");
}

}  // namespace

std::vector<std::size_t> Network::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(static_cast<std::size_t>(layers.front().weights.cols()));
  for (const auto& l : layers) sizes.push_back(static_cast<std::size_t>(l.weights.rows()));
  return sizes;
}

std::size_t Network::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weights.cols());
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

double Network::weight_sq_sum() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.weights.squaredNorm();
  return s;
}

std::vector<std::size_t> default_layer_sizes(std::size_t input_dim) { return {input_dim, 256, 128, 64, 32, 1}; }

Network init_network(std::span<const std::size_t> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw Error(Errc::BadArchitecture, "need at least an input and an output size");
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw Error(Errc::BadArchitecture, "layer sizes must be positive");
  }
  if (layer_sizes.back() != 1) throw Error(Errc::BadArchitecture, "output size must be 1");

  std::mt19937_64 rng(seed);
  Network net;
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const auto in = static_cast<Eigen::Index>(layer_sizes[k]);
    const auto out = static_cast<Eigen::Index>(layer_sizes[k + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer;
    layer.weights.resize(out, in);
    for (Eigen::Index i = 0; i < out; ++i) {
      for (Eigen::Index j = 0; j < in; ++j) layer.weights(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
    layer.bias = Eigen::VectorXd::Zero(out);
    layer.activation = k + 2 == layer_sizes.size() ? Activation::identity : Activation::relu;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

ForwardTrace forward(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_dim()) {
    throw Error(Errc::DimMismatch,
                "input has " + std::to_string(x.size()) + " values, network expects " + std::to_string(net.input_dim()));
  }
  ForwardTrace trace;
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (const auto& layer : net.layers) {
    trace.inputs.push_back(a);
    Eigen::VectorXd z = layer.weights * a + layer.bias;
    a = activate(z, layer.activation);
    trace.pre_activations.push_back(std::move(z));
    trace.activations.push_back(a);
  }
  trace.prediction = a(0);
  return trace;
}

LossValue loss(double prediction, double target, const Network& net, double lambda) {
  const double r = prediction - target;
  const double data = r * r;
  return {data, data + lambda * net.weight_sq_sum()};
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  for (const auto& l : net.layers) {
    g.weights.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

Gradients backward(const Network& net, const ForwardTrace& trace, double target, double lambda) {
  const std::size_t n = net.layers.size();
  bool ok = n > 0 && trace.inputs.size() == n && trace.pre_activations.size() == n && trace.activations.size() == n;
  for (std::size_t l = 0; ok && l < n; ++l) {
    ok = trace.inputs[l].size() == net.layers[l].weights.cols() &&
         trace.pre_activations[l].size() == net.layers[l].weights.rows();
  }
  if (!ok) throw Error(Errc::TraceMismatch, "trace was not produced by this network");

  Gradients g = Gradients::zeros_like(net);
  // dL/da for the output, then pushed back layer by layer as dL/dz.
  Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, 2.0 * (trace.prediction - target));
  for (std::size_t k = n; k-- > 0;) {
    const auto& layer = net.layers[k];
    if (layer.activation == Activation::relu) delta = delta.cwiseProduct(relu_mask(trace.pre_activations[k]).matrix());
    g.weights[k] = delta * trace.inputs[k].transpose() + 2.0 * lambda * layer.weights;
    g.bias[k] = delta;
    if (k > 0) delta = layer.weights.transpose() * delta;
  }
  return g;
}

BatchGradients batch_gradients(const Network& net, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                               double lambda) {
  const auto batch = inputs.cols();
  if (batch == 0 || targets.size() != batch || inputs.rows() != static_cast<Eigen::Index>(net.input_dim())) {
    throw Error(Errc::DimMismatch, "batch shape does not match network or targets");
  }
  const std::size_t n = net.layers.size();
  std::vector<Eigen::MatrixXd> acts;  // acts[k] is the input of layer k
  std::vector<Eigen::MatrixXd> pre;
  acts.reserve(n + 1);
  pre.reserve(n);
  acts.push_back(inputs);
  for (const auto& layer : net.layers) {
    Eigen::MatrixXd z = layer.weights * acts.back();
    z.colwise() += layer.bias;
    Eigen::MatrixXd a = layer.activation == Activation::relu ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    pre.push_back(std::move(z));
    acts.push_back(std::move(a));
  }

  const Eigen::RowVectorXd residual = acts.back().row(0) - targets.transpose();
  BatchGradients out;
  out.data_loss = residual.squaredNorm() / static_cast<double>(batch);
  out.gradients = Gradients::zeros_like(net);

  Eigen::MatrixXd delta = (2.0 / static_cast<double>(batch)) * residual;
  for (std::size_t k = n; k-- > 0;) {
    const auto& layer = net.layers[k];
    if (layer.activation == Activation::relu) delta = delta.cwiseProduct(relu_mask(pre[k]).matrix());
    out.gradients.weights[k].noalias() = delta * acts[k].transpose();
    out.gradients.weights[k] += 2.0 * lambda * layer.weights;
    out.gradients.bias[k] = delta.rowwise().sum();
    if (k > 0) delta = layer.weights.transpose() * delta;
  }
  return out;
}

void HyperParams::validate() const {
  auto bad = [](const char* field, const std::string& why) { throw Error(Errc::BadValue, std::string(field) + ": " + why); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate", "must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) bad("beta1", "must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) bad("beta2", "must be in [0, 1)");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) bad("epsilon", "must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) bad("lambda", "must be >= 0");
  if (epochs == 0) bad("epochs", "must be positive");
  if (batch_size == 0) bad("batch_size", "must be positive");
}

AdamState AdamState::for_network(const Network& net) {
  return AdamState{Gradients::zeros_like(net), Gradients::zeros_like(net), 0};
}

void adam_step(AdamState& state, Network& net, const Gradients& grads, const HyperParams& hp) {
  check_same_shape(grads, net, "gradients");
  check_same_shape(state.m, net, "first moments");
  check_same_shape(state.v, net, "second moments");

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double m_correction = 1.0 - std::pow(hp.beta1, t);
  const double v_correction = 1.0 - std::pow(hp.beta2, t);

  auto update = [&](auto& theta, auto& m, auto& v, const auto& g) {
    m.array() = hp.beta1 * m.array() + (1.0 - hp.beta1) * g.array();
    v.array() = hp.beta2 * v.array() + (1.0 - hp.beta2) * g.array().square();
    theta.array() -= hp.learning_rate * (m.array() / m_correction) /
                     ((v.array() / v_correction).sqrt() + hp.epsilon);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].weights, state.m.weights[l], state.v.weights[l], grads.weights[l]);
    update(net.layers[l].bias, state.m.bias[l], state.v.bias[l], grads.bias[l]);
  }
}

TrainingHistory train(Network& net, std::span<const TrainingRow> rows, const HyperParams& hp) {
  // Zero epochs is a valid no-op here even though configs require >= 1.
  HyperParams checked = hp;
  checked.epochs = std::max<std::size_t>(hp.epochs, 1);
  checked.validate();
  if (rows.empty()) throw Error(Errc::EmptyDataset, "no training rows");
  const auto in = static_cast<Eigen::Index>(net.input_dim());
  const auto count = static_cast<Eigen::Index>(rows.size());

  Eigen::MatrixXd x(in, count);
  Eigen::VectorXd y(count);
  for (Eigen::Index c = 0; c < count; ++c) {
    const auto& row = rows[static_cast<std::size_t>(c)];
    if (static_cast<Eigen::Index>(row.features.values.size()) != in) {
      throw Error(Errc::DimMismatch, "row " + std::to_string(c) + " has " +
                                         std::to_string(row.features.values.size()) + " features, network expects " +
                                         std::to_string(in));
    }
    x.col(c) = Eigen::Map<const Eigen::VectorXd>(row.features.values.data(), in);
    y(c) = row.target;
  }

  std::mt19937_64 rng(hp.seed);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  AdamState state = AdamState::for_network(net);
  TrainingHistory history;
  history.epochs.reserve(hp.epochs);

  Eigen::MatrixXd xb;
  Eigen::VectorXd yb;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      const auto b = static_cast<Eigen::Index>(end - start);
      xb.resize(in, b);
      yb.resize(b);
      for (Eigen::Index k = 0; k < b; ++k) {
        const auto idx = static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(k)]);
        xb.col(k) = x.col(idx);
        yb(k) = y(idx);
      }
      auto batch = batch_gradients(net, xb, yb, hp.lambda);
      if (!std::isfinite(batch.data_loss)) {
        throw NonFiniteLossError(epoch, "non-finite batch loss in epoch " + std::to_string(epoch));
      }
      loss_sum += batch.data_loss * static_cast<double>(b);
      adam_step(state, net, batch.gradients, hp);
    }
    const double data = loss_sum / static_cast<double>(rows.size());
    const double reg = data + hp.lambda * net.weight_sq_sum();
    if (!std::isfinite(reg)) throw NonFiniteLossError(epoch, "non-finite loss after epoch " + std::to_string(epoch));
    history.epochs.push_back({data, reg});
  }
  history.steps = state.t;
  return history;
}

double predict(const Network& net, const ScalerParams& scaler, const FeatureVector& x) {
  const double raw = forward(net, x.values).prediction;
  return std::max(0.0, scaler.unscale_target(raw));
}

double compare_gradients(const Network& net, std::span<const double> x, double target, double lambda, double h,
                         const Gradients& analytic) {
  check_same_shape(analytic, net, "analytic gradients");
  const ForwardTrace base = forward(net, x);
  const std::size_t n = net.layers.size();

  // Change in the prediction after adding `dz` to pre-activation `unit` of
  // layer k. Only deltas are propagated, so the difference carries no
  // rounding noise from the base activations.
  auto step = [](double z, double dz, Activation act) {
    if (act == Activation::identity) return dz;
    if (z > 0.0 && z + dz > 0.0) return dz;
    if (z <= 0.0 && z + dz <= 0.0) return 0.0;
    return std::max(z + dz, 0.0) - std::max(z, 0.0);
  };
  auto prediction_delta = [&](std::size_t k, Eigen::Index unit, double dz) {
    double da = step(base.pre_activations[k](unit), dz, net.layers[k].activation);
    if (k + 1 == n || da == 0.0) return da;
    Eigen::VectorXd delta = net.layers[k + 1].weights.col(unit) * da;
    for (std::size_t j = k + 1;; ++j) {
      for (Eigen::Index u = 0; u < delta.size(); ++u) {
        delta(u) = step(base.pre_activations[j](u), delta(u), net.layers[j].activation);
      }
      if (j + 1 == n) return delta(0);
      delta = net.layers[j + 1].weights * delta;
    }
  };
  // (r + d+)^2 - (r + d-)^2 without cancelling against r^2.
  const double r0 = base.prediction - target;
  auto data_diff = [&](std::size_t k, Eigen::Index unit, double dz) {
    const double up = prediction_delta(k, unit, dz);
    const double down = prediction_delta(k, unit, -dz);
    return (up - down) * (2.0 * r0 + up + down);
  };

  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12}); };

  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& layer = net.layers[k];
    const Eigen::VectorXd& input = base.inputs[k];
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        const double w = layer.weights(i, j);
        // The penalty's central difference is exactly 2 * lambda * w.
        const double numeric = data_diff(k, i, h * input(j)) / (2.0 * h) + 2.0 * lambda * w;
        worst = std::max(worst, rel(analytic.weights[k](i, j), numeric));
      }
      const double numeric = data_diff(k, i, h) / (2.0 * h);
      worst = std::max(worst, rel(analytic.bias[k](i), numeric));
    }
  }
  return worst;
}

double grad_check(const Network& net, std::span<const double> x, double target, double lambda, double h) {
  return compare_gradients(net, x, target, lambda, h, backward(net, forward(net, x), target, lambda));
}

}  // namespace outbreak
