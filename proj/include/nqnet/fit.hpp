#pragma once

// Minibatch Adam with validation-based early stopping, shared by the
// supervised trainer and the fitted distributional iterations.

#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nqnet/nn_core.hpp"
#include "nqnet/rng.hpp"

namespace nqnet {

enum class Split { Train, Validation };

/// A training problem seen from the optimizer: fixed input matrices for the
/// two splits and a loss over a subset of columns of the network output.
/// loss() returns the mean loss over idx and, when d_raw is non-null, writes
/// its gradient with respect to raw (same shape as raw).
template <class T>
concept FitObjective = requires(const T& obj, Split split, std::span<const std::size_t> idx,
                                const Matrix& raw, Matrix* d_raw) {
  { obj.inputs(split) } -> std::convertible_to<const Matrix&>;
  { obj.loss(split, idx, raw, d_raw) } -> std::convertible_to<double>;
};

struct FitOptions {
  std::size_t batch_size = 128;
  std::size_t max_epochs = 1000;
  std::size_t patience = 50;
  AdamConfig adam;
  bool restore_best = true;

  void validate() const {
    if (batch_size < 1 || max_epochs < 1 || patience < 1)
      throw std::invalid_argument("FitOptions: batch_size, max_epochs and patience must be >= 1");
    adam.validate();
  }
};

struct FitHistory {
  double initial_train_loss = 0.0;
  double initial_val_loss = 0.0;
  std::vector<double> train_loss;  // full training objective after each epoch
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;  // 0 means the initial parameters were never beaten
  std::size_t stop_epoch = 0;
  double best_val_loss = 0.0;
  double seconds = 0.0;
};

class FitDiverged : public std::runtime_error {
 public:
  explicit FitDiverged(std::size_t epoch)
      : std::runtime_error("fit diverged: non-finite loss at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

namespace detail {

inline Matrix gather_columns(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(idx[i]));
  return out;
}

inline std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

template <FitObjective Obj>
double full_loss(const DenseNet& net, const Obj& obj, Split split) {
  const Matrix& x = obj.inputs(split);
  const auto idx = iota_indices(static_cast<std::size_t>(x.cols()));
  return obj.loss(split, idx, predict(net, x), nullptr);
}

}  // namespace detail

/// Trains net in place. The shuffle order is drawn from shuffle_seed; the
/// epoch is one pass over the shuffled training columns. If the
/// validation split is empty the training objective is monitored instead.
template <FitObjective Obj>
FitHistory fit_network(DenseNet& net, const Obj& obj, const FitOptions& opts,
                       std::uint64_t shuffle_seed) {
  opts.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto n_train = static_cast<std::size_t>(obj.inputs(Split::Train).cols());
  if (n_train == 0) throw std::invalid_argument("fit_network: empty training split");
  const bool has_val = obj.inputs(Split::Validation).cols() > 0;

  FitHistory hist;
  hist.initial_train_loss = detail::full_loss(net, obj, Split::Train);
  hist.initial_val_loss = has_val ? detail::full_loss(net, obj, Split::Validation) : hist.initial_train_loss;
  if (!std::isfinite(hist.initial_train_loss) || !std::isfinite(hist.initial_val_loss))
    throw FitDiverged(0);

  AdamState adam = AdamState::for_net(net, opts.adam);
  DenseNet best = net;
  hist.best_val_loss = hist.initial_val_loss;
  std::size_t since_best = 0;

  Rng rng(shuffle_seed);
  auto order = detail::iota_indices(n_train);
  const Matrix& x_train = obj.inputs(Split::Train);
  Matrix d_raw;

  for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    for (std::size_t i = n_train; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t b = 0; b < n_train; b += opts.batch_size) {
      const std::span<const std::size_t> idx(order.data() + b, std::min(opts.batch_size, n_train - b));
      auto [raw, cache] = forward(net, detail::gather_columns(x_train, idx));
      const double l = obj.loss(Split::Train, idx, raw, &d_raw);
      if (!std::isfinite(l) || !d_raw.allFinite()) throw FitDiverged(epoch);
      adam_step(net, backward(net, cache, d_raw), adam);
    }
    const double tr = detail::full_loss(net, obj, Split::Train);
    const double va = has_val ? detail::full_loss(net, obj, Split::Validation) : tr;
    if (!std::isfinite(tr) || !std::isfinite(va)) throw FitDiverged(epoch);
    hist.train_loss.push_back(tr);
    hist.val_loss.push_back(va);
    hist.stop_epoch = epoch;
    if (va < hist.best_val_loss) {
      hist.best_val_loss = va;
      hist.best_epoch = epoch;
      best = net;
      since_best = 0;
    } else if (++since_best >= opts.patience) {
      break;
    }
  }
  if (opts.restore_best) net = std::move(best);
  hist.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return hist;
}

}  // namespace nqnet
