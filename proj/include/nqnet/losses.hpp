#pragma once

// Pinball (check) loss, quantile Huber loss, and the averaged multi-level
// risks used for supervised training and for fitted distributional
// Bellman iterations.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "nqnet/heads.hpp"
#include "nqnet/nn_core.hpp"

namespace nqnet {

enum class LossKind { Check, QuantileHuber };

struct LossSpec {
  LossKind kind = LossKind::Check;
  double kappa = 1.0;

  void validate() const {
    if (kind == LossKind::QuantileHuber && !(kappa > 0.0))
      throw std::invalid_argument("LossSpec: kappa must be positive");
  }
};

inline LossKind parse_loss_kind(std::string_view name) {
  if (name == "check" || name == "CHECK" || name == "pinball") return LossKind::Check;
  if (name == "qhuber" || name == "QHUBER") return LossKind::QuantileHuber;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "' (valid: check, qhuber)");
}

inline std::string_view to_string(LossKind k) {
  return k == LossKind::Check ? "check" : "qhuber";
}

namespace detail {
inline void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
}
}  // namespace detail

/// rho_tau(u) = u (tau - 1{u < 0}).
inline double check_loss(double tau, double u) {
  detail::check_tau(tau);
  return u >= 0.0 ? tau * u : (tau - 1.0) * u;
}

/// d rho_tau / du; the value at u = 0 is the right derivative tau.
inline double check_loss_derivative(double tau, double u) {
  detail::check_tau(tau);
  return u >= 0.0 ? tau : tau - 1.0;
}

/// |tau - 1{u<0}| * L_kappa(u) / kappa, with the Huber kernel
/// L_kappa(u) = u^2/2 for |u| <= kappa and kappa (|u| - kappa/2) otherwise.
inline double qhuber_loss(double tau, double u, double kappa) {
  detail::check_tau(tau);
  if (!(kappa > 0.0)) throw std::invalid_argument("qhuber_loss: kappa must be positive");
  const double w = u < 0.0 ? 1.0 - tau : tau;
  const double a = std::abs(u);
  const double huber = a <= kappa ? 0.5 * u * u : kappa * (a - 0.5 * kappa);
  return w * huber / kappa;
}

inline double qhuber_loss_derivative(double tau, double u, double kappa) {
  detail::check_tau(tau);
  if (!(kappa > 0.0)) throw std::invalid_argument("qhuber_loss: kappa must be positive");
  const double w = u < 0.0 ? 1.0 - tau : tau;
  const double a = std::abs(u);
  const double dhuber = a <= kappa ? u : (u < 0.0 ? -kappa : kappa);
  return w * dhuber / kappa;
}

inline double loss_value(const LossSpec& spec, double tau, double u) {
  return spec.kind == LossKind::Check ? check_loss(tau, u) : qhuber_loss(tau, u, spec.kappa);
}

inline double loss_derivative(const LossSpec& spec, double tau, double u) {
  return spec.kind == LossKind::Check ? check_loss_derivative(tau, u)
                                      : qhuber_loss_derivative(tau, u, spec.kappa);
}

struct RiskResult {
  double value = 0.0;
  Matrix grad;  // dRisk / dprediction, same shape as the predictions
};

/// (1/N) sum_i (1/K) sum_k rho_{tau_k}(y_i - f_k(x_i)).
/// predictions is K x N (one column per sample), targets has length N.
inline RiskResult empirical_risk(const QuantileLevels& levels, const Matrix& predictions,
                                 std::span<const double> targets, const LossSpec& spec = {}) {
  const auto k = static_cast<Eigen::Index>(levels.size());
  const auto n = predictions.cols();
  if (n == 0) throw std::invalid_argument("empirical_risk: empty batch");
  require_shape(predictions.rows() == k, "empirical_risk: prediction rows != number of levels");
  require_shape(static_cast<std::size_t>(n) == targets.size(),
                "empirical_risk: predictions and targets differ in batch size");
  spec.validate();

  RiskResult out;
  out.grad.resize(k, n);
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(k));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double u = targets[static_cast<std::size_t>(i)] - predictions(j, i);
      row += loss_value(spec, levels[static_cast<std::size_t>(j)], u);
      out.grad(j, i) = -loss_derivative(spec, levels[static_cast<std::size_t>(j)], u) * scale;
    }
    total += row;
  }
  out.value = total * scale;
  return out;
}

/// Same risk over a batch of already-evaluated fans.
inline double empirical_risk(const QuantileLevels& levels, std::span<const QuantileFan> fans,
                             std::span<const double> targets, const LossSpec& spec = {}) {
  if (fans.empty()) throw std::invalid_argument("empirical_risk: empty batch");
  Matrix pred(static_cast<Eigen::Index>(levels.size()), static_cast<Eigen::Index>(fans.size()));
  for (std::size_t i = 0; i < fans.size(); ++i) {
    require_shape(fans[i].f.size() == levels.size(), "empirical_risk: fan size != number of levels");
    for (std::size_t j = 0; j < levels.size(); ++j)
      pred(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = fans[i].f[j];
  }
  return empirical_risk(levels, pred, targets, spec).value;
}

/// Risk against a set of K' target samples per data point (fitted
/// distributional iterations):
///   (1/N) sum_i (1/(K K')) sum_k sum_j rho_{tau_k}(t_{j,i} - f_k(x_i)).
/// predictions is K x N, targets is K' x N.
inline RiskResult target_sample_risk(const QuantileLevels& levels, const Matrix& predictions,
                                     const Matrix& targets, const LossSpec& spec = {}) {
  const auto k = static_cast<Eigen::Index>(levels.size());
  const auto n = predictions.cols();
  if (n == 0) throw std::invalid_argument("target_sample_risk: empty batch");
  require_shape(predictions.rows() == k, "target_sample_risk: prediction rows != number of levels");
  require_shape(targets.cols() == n && targets.rows() >= 1,
                "target_sample_risk: targets shape mismatch");
  spec.validate();

  RiskResult out;
  out.grad.resize(k, n);
  const double scale =
      1.0 / (static_cast<double>(n) * static_cast<double>(k) * static_cast<double>(targets.rows()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double tau = levels[static_cast<std::size_t>(j)];
      const double f = predictions(j, i);
      double value = 0.0, deriv = 0.0;
      for (Eigen::Index t = 0; t < targets.rows(); ++t) {
        const double u = targets(t, i) - f;
        value += loss_value(spec, tau, u);
        deriv += loss_derivative(spec, tau, u);
      }
      total += value;
      out.grad(j, i) = -deriv * scale;
    }
  }
  out.value = total * scale;
  return out;
}

}  // namespace nqnet
