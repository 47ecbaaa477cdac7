#pragma once

// Helpers shared by the unit and acceptance tests: random small end-to-end
// problems (net -> head -> loss) and a central-difference gradient check
// that skips coordinates whose perturbation crosses a kink.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nqnet/heads.hpp"
#include "nqnet/losses.hpp"
#include "nqnet/nn_core.hpp"
#include "nqnet/rng.hpp"

namespace nqtest {

using namespace nqnet;

struct EndToEndProblem {
  DenseNet net;
  HeadKind kind = HeadKind::NqElu;
  QuantileLevels levels = QuantileLevels::uniform(1);
  Matrix x;
  std::vector<double> y;
  LossSpec loss;
};

inline EndToEndProblem random_problem(HeadKind kind, std::uint64_t seed) {
  Rng rng(seed);
  EndToEndProblem p;
  p.kind = kind;
  const std::size_t k = 1 + rng.below(5);
  const std::size_t d = 1 + rng.below(3);
  const std::size_t depth = 1 + rng.below(2);
  std::vector<std::size_t> dims{d};
  for (std::size_t l = 0; l < depth; ++l) dims.push_back(3 + rng.below(4));
  dims.push_back(raw_dim(kind, k));
  p.net = init_net(dims, seed ^ 0x5eedULL);
  for (auto& b : p.net.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.3 * rng.normal();
  p.levels = QuantileLevels::uniform(k);
  const std::size_t n = 1 + rng.below(4);
  p.x.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < p.x.size(); ++i) p.x(i) = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) p.y.push_back(2.0 * rng.normal());
  if (rng.below(2) == 1) p.loss = LossSpec{LossKind::QuantileHuber, 0.5};
  return p;
}

/// Loss value; `signature` receives every branch decision along the way
/// (ReLU signs, head branches, residual regions).
inline double objective(const EndToEndProblem& p, std::vector<int>* signature = nullptr) {
  auto [raw, cache] = forward(p.net, p.x);
  const Matrix f = head_forward(p.kind, p.levels.size(), raw);
  if (signature) {
    signature->clear();
    for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l)
      for (Eigen::Index i = 0; i < cache.pre[l].size(); ++i) signature->push_back(cache.pre[l](i) > 0.0);
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
      if (p.kind == HeadKind::NqElu || p.kind == HeadKind::NqRelu)
        for (Eigen::Index r = 1; r < raw.rows(); ++r) signature->push_back(raw(r, c) > 0.0);
      if (p.kind == HeadKind::NcQrDqn) signature->push_back(raw(0, c) > 0.0);
    }
    for (Eigen::Index c = 0; c < f.cols(); ++c)
      for (Eigen::Index k = 0; k < f.rows(); ++k) {
        const double u = p.y[static_cast<std::size_t>(c)] - f(k, c);
        signature->push_back(u < 0.0);
        if (p.loss.kind == LossKind::QuantileHuber) signature->push_back(std::abs(u) <= p.loss.kappa);
      }
  }
  return empirical_risk(p.levels, f, p.y, p.loss).value;
}

inline Gradients analytic_gradient(const EndToEndProblem& p) {
  auto [raw, cache] = forward(p.net, p.x);
  const Matrix f = head_forward(p.kind, p.levels.size(), raw);
  const auto risk = empirical_risk(p.levels, f, p.y, p.loss);
  return backward(p.net, cache, head_backward(p.kind, raw, risk.grad));
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t masked = 0;
};

/// Central differences with step h over every parameter. A coordinate is
/// masked when the +h and -h evaluations take different branches.
inline GradCheck finite_difference_check(EndToEndProblem p, double h = 1e-5) {
  const Gradients g = analytic_gradient(p);
  GradCheck out;
  std::vector<int> s_plus, s_minus;
  auto visit = [&](double& param, double analytic) {
    const double keep = param;
    param = keep + h;
    const double lp = objective(p, &s_plus);
    param = keep - h;
    const double lm = objective(p, &s_minus);
    param = keep;
    if (s_plus != s_minus) {
      ++out.masked;
      return;
    }
    const double numeric = (lp - lm) / (2.0 * h);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    ++out.checked;
    if (scale < 1e-7) return;
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / scale);
  };
  for (std::size_t l = 0; l < p.net.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < p.net.weights[l].size(); ++i) visit(p.net.weights[l](i), g.weights[l](i));
    for (Eigen::Index i = 0; i < p.net.biases[l].size(); ++i) visit(p.net.biases[l](i), g.biases[l](i));
  }
  return out;
}

}  // namespace nqtest
