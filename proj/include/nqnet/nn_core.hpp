#pragma once

// Dense ReLU feed-forward networks: forward pass, reverse-mode gradients
// and Adam. Batches are stored column-major with one sample per column,
// so an input batch of B vectors is a (layer_dims[0] x B) matrix.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nqnet/rng.hpp"

namespace nqnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

struct DenseNet {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;  // weights[l] is layer_dims[l+1] x layer_dims[l]
  std::vector<Vector> biases;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  /// Checks the structural invariants; throws ShapeError on violation.
  void validate() const {
    require_shape(layer_dims.size() >= 2, "DenseNet: need at least input and output dims");
    require_shape(weights.size() == layer_dims.size() - 1 && biases.size() == weights.size(),
                  "DenseNet: layer count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
      require_shape(static_cast<std::size_t>(weights[l].rows()) == layer_dims[l + 1] &&
                        static_cast<std::size_t>(weights[l].cols()) == layer_dims[l] &&
                        static_cast<std::size_t>(biases[l].size()) == layer_dims[l + 1],
                    "DenseNet: parameter shape mismatch at layer " + std::to_string(l));
      if (!weights[l].allFinite() || !biases[l].allFinite())
        throw std::domain_error("DenseNet: non-finite parameter at layer " + std::to_string(l));
    }
  }
};

/// Per-layer pre-activations (z) and post-activations (a) of one batch.
/// post[0] is the input; post[L] equals pre[L-1] (no output activation).
struct ForwardCache {
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
  Eigen::Index batch_size = 0;
};

/// Parameter-shaped buffer, used for gradients and Adam moments alike.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static Gradients zeros_like(const DenseNet& net) {
    Gradients g;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      g.weights.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
      g.biases.push_back(Vector::Zero(net.biases[l].size()));
    }
    return g;
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
  }

  bool matches(const DenseNet& net) const {
    if (weights.size() != net.num_layers() || biases.size() != net.num_layers()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows() != net.weights[l].rows() || weights[l].cols() != net.weights[l].cols() ||
          biases[l].size() != net.biases[l].size())
        return false;
    }
    return true;
  }
};

/// Glorot-uniform weights, a = sqrt(6 / (fan_in + fan_out)), zero biases.
inline DenseNet init_net(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2)
    throw std::invalid_argument("init_net: layer_dims needs at least 2 entries");
  for (auto d : layer_dims)
    if (d == 0) throw std::invalid_argument("init_net: layer dims must be positive");

  DenseNet net;
  net.layer_dims = layer_dims;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(layer_dims[l]);
    const auto fan_out = static_cast<Eigen::Index>(layer_dims[l + 1]);
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    // Fill row-major so the draw order does not depend on Eigen's storage.
    for (Eigen::Index i = 0; i < fan_out; ++i)
      for (Eigen::Index j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-a, a);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(fan_out));
  }
  return net;
}

namespace detail {
inline void check_input(const DenseNet& net, const Matrix& x) {
  require_shape(static_cast<std::size_t>(x.rows()) == net.input_dim(),
                "forward: input has " + std::to_string(x.rows()) + " rows, net expects " +
                    std::to_string(net.input_dim()));
}
}  // namespace detail

/// Forward pass keeping every intermediate for backward().
inline std::pair<Matrix, ForwardCache> forward(const DenseNet& net, const Matrix& x) {
  detail::check_input(net, x);
  if (!x.allFinite()) throw std::domain_error("forward: non-finite input");
  ForwardCache cache;
  cache.batch_size = x.cols();
  cache.post.reserve(net.num_layers() + 1);
  cache.pre.reserve(net.num_layers());
  cache.post.push_back(x);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Matrix z = net.weights[l] * cache.post.back();
    z.colwise() += net.biases[l];
    cache.pre.push_back(z);
    if (l + 1 < net.num_layers()) {
      cache.post.push_back(z.cwiseMax(0.0));
    } else {
      cache.post.push_back(std::move(z));
    }
  }
  return {cache.post.back(), std::move(cache)};
}

/// Forward pass without a cache, evaluated in column chunks to bound memory
/// on large test sets.
inline Matrix predict(const DenseNet& net, const Matrix& x, Eigen::Index chunk = 4096) {
  detail::check_input(net, x);
  Matrix out(static_cast<Eigen::Index>(net.output_dim()), x.cols());
  for (Eigen::Index start = 0; start < x.cols(); start += chunk) {
    const Eigen::Index n = std::min(chunk, x.cols() - start);
    Matrix a = x.middleCols(start, n);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      Matrix z = net.weights[l] * a;
      z.colwise() += net.biases[l];
      a = (l + 1 < net.num_layers()) ? Matrix(z.cwiseMax(0.0)) : std::move(z);
    }
    out.middleCols(start, n) = a;
  }
  return out;
}

/// Gradients of a scalar loss, summed over the batch, given dL/d(output).
/// The ReLU derivative at exactly zero is taken as 0.
inline Gradients backward(const DenseNet& net, const ForwardCache& cache, const Matrix& d_output) {
  require_shape(cache.pre.size() == net.num_layers() && cache.post.size() == net.num_layers() + 1,
                "backward: cache does not belong to this net");
  require_shape(d_output.rows() == static_cast<Eigen::Index>(net.output_dim()) &&
                    d_output.cols() == cache.batch_size,
                "backward: output-gradient shape mismatch");
  if (!d_output.allFinite()) throw std::domain_error("backward: non-finite upstream gradient");

  Gradients grads = Gradients::zeros_like(net);
  Matrix delta = d_output;
  for (std::size_t l = net.num_layers(); l-- > 0;) {
    grads.weights[l].noalias() = delta * cache.post[l].transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Matrix upstream = net.weights[l].transpose() * delta;
    delta = upstream.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return grads;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;

  void validate() const {
    if (!(lr > 0.0) || !(eps > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) ||
        !(beta2 >= 0.0 && beta2 < 1.0))
      throw std::invalid_argument("AdamConfig: need lr > 0, eps > 0, 0 <= beta < 1");
  }
};

struct AdamState {
  AdamConfig config;
  Gradients first_moment;
  Gradients second_moment;
  std::uint64_t step = 0;

  static AdamState for_net(const DenseNet& net, AdamConfig config = {}) {
    config.validate();
    return {config, Gradients::zeros_like(net), Gradients::zeros_like(net), 0};
  }
};

/// One bias-corrected Adam update, in place.
inline void adam_step(DenseNet& net, const Gradients& grads, AdamState& state) {
  require_shape(grads.matches(net), "adam_step: gradient shapes do not match net");
  require_shape(state.first_moment.matches(net) && state.second_moment.matches(net),
                "adam_step: optimizer state shapes do not match net");
  if (!grads.all_finite()) throw std::domain_error("adam_step: non-finite gradient");

  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    param.array() -= c.lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + c.eps);
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    update(net.weights[l], grads.weights[l], state.first_moment.weights[l],
           state.second_moment.weights[l]);
    update(net.biases[l], grads.biases[l], state.first_moment.biases[l],
           state.second_moment.biases[l]);
  }
}

}  // namespace nqnet
