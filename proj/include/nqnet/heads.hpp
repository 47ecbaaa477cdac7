#pragma once

// Quantile heads: maps from a raw network output vector to K quantile
// predictions, together with their exact backward rules.
//
//   NqElu    raw = (v, g_1..g_K)       f_k = v - gbar + sum_{i<=k} sigma(g_i)
//                                      gbar = (1/K) sum_j (K+1-j) sigma(g_j)
//                                      sigma(x) = ELU(x) + 1
//   NqRelu   as NqElu with sigma = ReLU
//   Dqr      raw = (f_1..f_K)          identity, no ordering
//   DqrStar  raw = (b, h_2..h_K)       f_1 = b, f_k = f_{k-1} + softplus(h_k)
//   NcQrDqn  raw = (alpha, beta, phi)  f_k = beta + ReLU(alpha) sum_{t<=k} softmax(phi)_t

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nqnet/nn_core.hpp"

namespace nqnet {

enum class HeadKind { NqElu, NqRelu, Dqr, DqrStar, NcQrDqn };

inline constexpr std::string_view to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::NqElu: return "NQ";
    case HeadKind::NqRelu: return "NQ_RELU";
    case HeadKind::Dqr: return "DQR";
    case HeadKind::DqrStar: return "DQR_STAR";
    case HeadKind::NcQrDqn: return "NCQRDQN";
  }
  return "?";
}

inline HeadKind parse_head_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "NQ" || s == "NQ_ELU" || s == "NQ-NET") return HeadKind::NqElu;
  if (s == "NQ_RELU" || s == "NQ-NET*") return HeadKind::NqRelu;
  if (s == "DQR") return HeadKind::Dqr;
  if (s == "DQR_STAR" || s == "DQR*") return HeadKind::DqrStar;
  if (s == "NCQRDQN" || s == "NC-QR-DQN") return HeadKind::NcQrDqn;
  throw std::invalid_argument("unknown head '" + std::string(name) +
                              "' (valid: NQ, NQ_RELU, DQR, DQR_STAR, NCQRDQN)");
}

/// Length of the raw vector the head consumes for K quantiles.
inline constexpr std::size_t raw_dim(HeadKind kind, std::size_t k) {
  switch (kind) {
    case HeadKind::NqElu:
    case HeadKind::NqRelu: return k + 1;
    case HeadKind::Dqr:
    case HeadKind::DqrStar: return k;
    case HeadKind::NcQrDqn: return k + 2;
  }
  return 0;
}

/// Strictly increasing quantile levels in (0, 1).
class QuantileLevels {
 public:
  explicit QuantileLevels(std::vector<double> taus) : taus_(std::move(taus)) {
    if (taus_.empty()) throw std::invalid_argument("QuantileLevels: need at least one level");
    for (std::size_t i = 0; i < taus_.size(); ++i) {
      if (!(taus_[i] > 0.0 && taus_[i] < 1.0))
        throw std::invalid_argument("QuantileLevels: levels must lie in (0,1)");
      if (i > 0 && !(taus_[i] > taus_[i - 1]))
        throw std::invalid_argument("QuantileLevels: levels must be strictly increasing");
    }
  }

  /// tau_k = k / (K+1), k = 1..K.
  static QuantileLevels uniform(std::size_t k) {
    std::vector<double> t(k);
    for (std::size_t i = 0; i < k; ++i) t[i] = static_cast<double>(i + 1) / static_cast<double>(k + 1);
    return QuantileLevels(std::move(t));
  }

  /// The 19-level benchmark grid 0.05, 0.10, ..., 0.95.
  static QuantileLevels benchmark_grid() {
    std::vector<double> t(19);
    for (std::size_t i = 0; i < 19; ++i) t[i] = 0.05 * static_cast<double>(i + 1);
    return QuantileLevels(std::move(t));
  }

  std::size_t size() const { return taus_.size(); }
  double operator[](std::size_t i) const { return taus_[i]; }
  std::span<const double> taus() const { return taus_; }

 private:
  std::vector<double> taus_;
};

inline double elu_plus_one(double x) { return x >= 0.0 ? x + 1.0 : std::exp(x); }
inline double elu_plus_one_derivative(double x) { return x >= 0.0 ? 1.0 : std::exp(x); }

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// One sample's head evaluation. For the NQ kinds v, g and sigma_g hold the
/// mean, pre-activated gaps and activated gaps; for the other kinds v is
/// mean(f) and g / sigma_g are empty.
struct QuantileFan {
  HeadKind kind = HeadKind::NqElu;
  std::vector<double> raw;
  double v = 0.0;
  std::vector<double> g;
  std::vector<double> sigma_g;
  std::vector<double> f;

  std::size_t size() const { return f.size(); }
};

namespace detail {

inline double gap_activation(HeadKind kind, double x) {
  return kind == HeadKind::NqElu ? elu_plus_one(x) : std::max(x, 0.0);
}
inline double gap_activation_derivative(HeadKind kind, double x) {
  return kind == HeadKind::NqElu ? elu_plus_one_derivative(x) : (x > 0.0 ? 1.0 : 0.0);
}

inline void require_raw(HeadKind kind, std::size_t k, std::size_t n) {
  if (k == 0) throw ShapeError("head: K must be at least 1");
  if (n != raw_dim(kind, k))
    throw ShapeError("head " + std::string(to_string(kind)) + ": raw length " + std::to_string(n) +
                     ", expected " + std::to_string(raw_dim(kind, k)));
}

// NQ forward on raw = (v, g). When gaps is non-empty it receives sigma(g).
inline void nq_forward_into(HeadKind kind, std::span<const double> raw, std::span<double> f,
                            std::span<double> gaps = {}) {
  const std::size_t k = f.size();
  const double v = raw[0];
  double weighted = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double s = gap_activation(kind, raw[j + 1]);
    if (!gaps.empty()) gaps[j] = s;
    weighted += static_cast<double>(k - j) * s;
  }
  const double gbar = weighted / static_cast<double>(k);
  double cum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    cum += gap_activation(kind, raw[i + 1]);
    f[i] = v - gbar + cum;
    // A positive gap can fall below half an ulp of f; bump to the next
    // representable value so the ordering stays strict in floating point.
    if (kind == HeadKind::NqElu && i > 0 && !(f[i] > f[i - 1]))
      f[i] = std::nextafter(f[i - 1], std::numeric_limits<double>::infinity());
  }
}

inline void nq_backward_into(HeadKind kind, std::span<const double> raw,
                             std::span<const double> df, std::span<double> draw) {
  const std::size_t k = df.size();
  double total = 0.0;
  for (double d : df) total += d;
  draw[0] = total;
  // dL/dsigma_j = sum_{k>=j} dL/df_k - (K+1-j)/K * sum_k dL/df_k
  double suffix = 0.0;
  for (std::size_t j = k; j-- > 0;) {
    suffix += df[j];
    const double weight = static_cast<double>(k - j) / static_cast<double>(k);
    draw[j + 1] = (suffix - weight * total) * gap_activation_derivative(kind, raw[j + 1]);
  }
}

}  // namespace detail

/// Evaluates the head for one sample. raw.size() must equal raw_dim(kind, f.size()).
inline void head_forward(HeadKind kind, std::span<const double> raw, std::span<double> f) {
  const std::size_t k = f.size();
  detail::require_raw(kind, k, raw.size());
  switch (kind) {
    case HeadKind::NqElu:
    case HeadKind::NqRelu:
      detail::nq_forward_into(kind, raw, f);
      return;
    case HeadKind::Dqr:
      std::copy(raw.begin(), raw.end(), f.begin());
      return;
    case HeadKind::DqrStar:
      f[0] = raw[0];
      for (std::size_t i = 1; i < k; ++i) f[i] = f[i - 1] + softplus(raw[i]);
      return;
    case HeadKind::NcQrDqn: {
      const double slope = std::max(raw[0], 0.0);
      const double intercept = raw[1];
      const auto logits = raw.subspan(2);
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (double l : logits) z += std::exp(l - mx);
      double cum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        cum += std::exp(logits[i] - mx) / z;
        f[i] = intercept + slope * cum;
      }
      return;
    }
  }
}

/// dL/draw for one sample given dL/df. Recomputes what it needs from raw.
inline void head_backward(HeadKind kind, std::span<const double> raw, std::span<const double> df,
                          std::span<double> draw) {
  const std::size_t k = df.size();
  detail::require_raw(kind, k, raw.size());
  if (draw.size() != raw.size()) throw ShapeError("head_backward: output span has wrong length");
  switch (kind) {
    case HeadKind::NqElu:
    case HeadKind::NqRelu:
      detail::nq_backward_into(kind, raw, df, draw);
      return;
    case HeadKind::Dqr:
      std::copy(df.begin(), df.end(), draw.begin());
      return;
    case HeadKind::DqrStar: {
      // f_k depends on b and on h_i for i <= k.
      double suffix = 0.0;
      for (std::size_t i = k; i-- > 1;) {
        suffix += df[i];
        draw[i] = suffix * logistic(raw[i]);
      }
      draw[0] = suffix + df[0];
      return;
    }
    case HeadKind::NcQrDqn: {
      const double alpha = raw[0];
      const double slope = std::max(alpha, 0.0);
      const auto logits = raw.subspan(2);
      const double mx = *std::max_element(logits.begin(), logits.end());
      std::vector<double> p(k);
      double z = 0.0;
      for (std::size_t i = 0; i < k; ++i) z += (p[i] = std::exp(logits[i] - mx));
      for (auto& pi : p) pi /= z;
      double d_beta = 0.0, cum = 0.0, sum_df_cum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        cum += p[i];
        d_beta += df[i];
        sum_df_cum += df[i] * cum;
      }
      draw[0] = alpha > 0.0 ? sum_df_cum : 0.0;
      draw[1] = d_beta;
      // df_k/dphi_j = slope * p_j * (1{j<=k} - c_k)
      double suffix = 0.0;
      for (std::size_t j = k; j-- > 0;) {
        suffix += df[j];
        draw[2 + j] = slope * p[j] * (suffix - sum_df_cum);
      }
      return;
    }
  }
}

/// Batched head: raw is raw_dim x B, result is K x B.
inline Matrix head_forward(HeadKind kind, std::size_t k, const Matrix& raw) {
  detail::require_raw(kind, k, static_cast<std::size_t>(raw.rows()));
  Matrix f(static_cast<Eigen::Index>(k), raw.cols());
  for (Eigen::Index c = 0; c < raw.cols(); ++c)
    head_forward(kind, std::span<const double>(raw.col(c).data(), raw.rows()),
                 std::span<double>(f.col(c).data(), k));
  return f;
}

inline Matrix head_backward(HeadKind kind, const Matrix& raw, const Matrix& df) {
  require_shape(raw.cols() == df.cols(), "head_backward: batch size mismatch");
  detail::require_raw(kind, static_cast<std::size_t>(df.rows()), static_cast<std::size_t>(raw.rows()));
  Matrix draw(raw.rows(), raw.cols());
  for (Eigen::Index c = 0; c < raw.cols(); ++c)
    head_backward(kind, std::span<const double>(raw.col(c).data(), raw.rows()),
                  std::span<const double>(df.col(c).data(), df.rows()),
                  std::span<double>(draw.col(c).data(), raw.rows()));
  return draw;
}

/// NQ head on an explicit (v, g).
inline QuantileFan nq_forward(double v, std::span<const double> g) {
  if (g.empty()) throw ShapeError("nq_forward: K must be at least 1");
  QuantileFan fan;
  fan.kind = HeadKind::NqElu;
  fan.raw.reserve(g.size() + 1);
  fan.raw.push_back(v);
  fan.raw.insert(fan.raw.end(), g.begin(), g.end());
  fan.v = v;
  fan.g.assign(g.begin(), g.end());
  fan.sigma_g.resize(g.size());
  fan.f.resize(g.size());
  detail::nq_forward_into(HeadKind::NqElu, fan.raw, fan.f, fan.sigma_g);
  return fan;
}

struct NqGradient {
  double d_v = 0.0;
  std::vector<double> d_g;
};

inline NqGradient nq_backward(const QuantileFan& fan, std::span<const double> df) {
  if (fan.kind != HeadKind::NqElu && fan.kind != HeadKind::NqRelu)
    throw std::invalid_argument("nq_backward: fan was not produced by an NQ head");
  if (df.size() != fan.f.size()) throw ShapeError("nq_backward: dL/df has wrong length");
  std::vector<double> draw(fan.raw.size());
  detail::nq_backward_into(fan.kind, fan.raw, df, draw);
  return {draw[0], std::vector<double>(draw.begin() + 1, draw.end())};
}

/// Any head kind on a raw vector; K is inferred from the raw length.
inline QuantileFan baseline_forward(HeadKind kind, std::span<const double> raw) {
  std::size_t k = 0;
  switch (kind) {
    case HeadKind::NqElu:
    case HeadKind::NqRelu: k = raw.size() >= 2 ? raw.size() - 1 : 0; break;
    case HeadKind::Dqr:
    case HeadKind::DqrStar: k = raw.size(); break;
    case HeadKind::NcQrDqn: k = raw.size() >= 3 ? raw.size() - 2 : 0; break;
  }
  if (k == 0)
    throw ShapeError("baseline_forward: raw length " + std::to_string(raw.size()) +
                     " too short for head " + std::string(to_string(kind)));
  QuantileFan fan;
  fan.kind = kind;
  fan.raw.assign(raw.begin(), raw.end());
  fan.f.resize(k);
  if (kind == HeadKind::NqElu || kind == HeadKind::NqRelu) {
    fan.v = raw[0];
    fan.g.assign(raw.begin() + 1, raw.end());
    fan.sigma_g.resize(k);
    detail::nq_forward_into(kind, raw, fan.f, fan.sigma_g);
  } else {
    head_forward(kind, raw, fan.f);
    double s = 0.0;
    for (double x : fan.f) s += x;
    fan.v = s / static_cast<double>(k);
  }
  return fan;
}

inline std::vector<double> baseline_backward(const QuantileFan& fan, std::span<const double> df) {
  if (df.size() != fan.f.size()) throw ShapeError("baseline_backward: dL/df has wrong length");
  std::vector<double> draw(fan.raw.size());
  head_backward(fan.kind, fan.raw, df, draw);
  return draw;
}

/// True when some adjacent pair is strictly out of order.
inline bool has_crossing(std::span<const double> f) {
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] < f[i - 1]) return true;
  return false;
}

}  // namespace nqnet
