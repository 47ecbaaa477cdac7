#pragma once

// Distributional RL with fitted NQ iterations on a one-dimensional toy MDP,
// plus a grid value-iteration oracle for measuring the learned policy.
//
// Toy MDP: state s in [0,1], actions {0, 1},
//   s' = clip(s + (2a - 1) drift + transition_noise * xi, 0, 1),  xi ~ N(0,1)
//   r  = sin(3 s) + 0.5 (2a - 1)(s - 0.5) + noise_scale * t_df
// with initial state U(0,1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nqnet/fit.hpp"
#include "nqnet/heads.hpp"
#include "nqnet/losses.hpp"
#include "nqnet/nn_core.hpp"
#include "nqnet/rng.hpp"

namespace nqnet {

struct MDPSpec {
  static constexpr std::size_t num_actions = 2;
  double gamma = 0.9;
  double drift = 0.1;
  double transition_noise = 0.02;
  double noise_scale = 0.5;
  double noise_df = 10.0;  // Student-t degrees of freedom, must exceed 1
  // Replaces the default mean reward when set.
  std::function<double(double, std::size_t)> reward_override;

  void validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("MDPSpec: gamma must lie in [0,1)");
    if (!(noise_df > 1.0)) throw std::invalid_argument("MDPSpec: reward noise df must exceed 1");
    if (!(noise_scale >= 0.0) || !(transition_noise >= 0.0))
      throw std::invalid_argument("MDPSpec: noise scales must be non-negative");
  }

  static double action_sign(std::size_t a) { return a == 0 ? -1.0 : 1.0; }

  double mean_reward(double s, std::size_t a) const {
    if (reward_override) return reward_override(s, a);
    return std::sin(3.0 * s) + 0.5 * action_sign(a) * (s - 0.5);
  }

  double mean_next_state(double s, std::size_t a) const { return s + action_sign(a) * drift; }

  double next_state(double s, std::size_t a, double xi) const {
    return std::clamp(mean_next_state(s, a) + transition_noise * xi, 0.0, 1.0);
  }

  double sample_reward_noise(Rng& rng) const {
    if (noise_scale == 0.0) return 0.0;
    std::gamma_distribution<double> chi2_half(0.5 * noise_df, 2.0);
    const double z = rng.normal();
    return noise_scale * z / std::sqrt(chi2_half(rng) / noise_df);
  }
};

struct TransitionTuple {
  double state = 0.0;
  std::size_t action = 0;
  double reward = 0.0;
  double next_state = 0.0;
};

/// Z^(m): one network whose output holds |A| NQ heads, block a occupying
/// rows [a (K+1), (a+1)(K+1)).
struct FittedIterate {
  std::size_t index = 0;
  DenseNet net;
  QuantileLevels levels = QuantileLevels::uniform(1);
  std::size_t num_actions = MDPSpec::num_actions;

  std::size_t k() const { return levels.size(); }

  /// states is 1 x B; result is (|A| K) x B with action blocks of K rows.
  Matrix quantiles(const Matrix& states) const {
    const Matrix raw = predict(net, states);
    const std::size_t kk = k();
    require_shape(static_cast<std::size_t>(raw.rows()) == num_actions * (kk + 1),
                  "FittedIterate: network output does not match |A| (K+1)");
    Matrix out(static_cast<Eigen::Index>(num_actions * kk), raw.cols());
    for (Eigen::Index c = 0; c < raw.cols(); ++c)
      for (std::size_t a = 0; a < num_actions; ++a)
        head_forward(HeadKind::NqElu,
                     std::span<const double>(raw.col(c).data() + a * (kk + 1), kk + 1),
                     std::span<double>(out.col(c).data() + a * kk, kk));
    return out;
  }

  /// Q(s, a) = (1/K) sum_k Z_k(s, a); result is |A| x B.
  Matrix q_values(const Matrix& states) const {
    const Matrix z = quantiles(states);
    Matrix q(static_cast<Eigen::Index>(num_actions), z.cols());
    const auto kk = static_cast<Eigen::Index>(k());
    for (std::size_t a = 0; a < num_actions; ++a)
      q.row(static_cast<Eigen::Index>(a)) =
          z.middleRows(static_cast<Eigen::Index>(a) * kk, kk).colwise().mean();
    return q;
  }

  std::vector<std::size_t> greedy_actions(const Matrix& states) const {
    const Matrix q = q_values(states);
    std::vector<std::size_t> out(static_cast<std::size_t>(q.cols()));
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
      Eigen::Index best = 0;
      for (Eigen::Index a = 1; a < q.rows(); ++a)
        if (q(a, c) > q(best, c)) best = a;
      out[static_cast<std::size_t>(c)] = static_cast<std::size_t>(best);
    }
    return out;
  }
};

/// Batched policy: states (1 x B) to one action per column.
using Policy = std::function<std::vector<std::size_t>(const Matrix& states)>;

inline Policy greedy_policy(const FittedIterate& it) {
  return [&it](const Matrix& s) { return it.greedy_actions(s); };
}

inline double k_quantile_mean(std::span<const double> quantiles) {
  if (quantiles.empty()) throw std::invalid_argument("k_quantile_mean: need at least one quantile");
  double s = 0.0;
  for (double q : quantiles) s += q;
  return s / static_cast<double>(quantiles.size());
}

inline Matrix states_matrix(std::span<const double> s) {
  Matrix m(1, static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = s[i];
  return m;
}

/// Target samples r_i + gamma Z_j(s'_i, a*) with a* the mean-greedy action
/// at s'_i (ties to the lowest index). Result is K x N.
inline Matrix bellman_targets(const FittedIterate& it, std::span<const TransitionTuple> batch, double gamma) {
  if (batch.empty()) throw std::invalid_argument("bellman_targets: empty batch");
  std::vector<double> next(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) next[i] = batch[i].next_state;
  const Matrix z = it.quantiles(states_matrix(next));
  const auto kk = static_cast<Eigen::Index>(it.k());
  Matrix targets(kk, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    Eigen::Index best = 0;
    double best_sum = z.col(c).segment(0, kk).sum();
    for (Eigen::Index a = 1; a < static_cast<Eigen::Index>(it.num_actions); ++a) {
      const double s = z.col(c).segment(a * kk, kk).sum();
      if (s > best_sum) {
        best_sum = s;
        best = a;
      }
    }
    targets.col(c) = (batch[i].reward + gamma * z.col(c).segment(best * kk, kk).array()).matrix();
  }
  return targets;
}

struct DrlConfig {
  std::size_t k = 32;
  std::vector<std::size_t> hidden{64, 64};
  FitOptions fit{128, 200, 20, AdamConfig{}, true};
  LossSpec loss;
  double epsilon = 0.2;
  std::size_t episode_length = 20;
  std::size_t parallel_envs = 50;
  double validation_fraction = 0.2;
  bool warm_start = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (k < 1) throw std::invalid_argument("DrlConfig: K must be at least 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("DrlConfig: epsilon must lie in [0,1]");
    if (episode_length < 1 || parallel_envs < 1) throw std::invalid_argument("DrlConfig: episode_length and parallel_envs must be >= 1");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw std::invalid_argument("DrlConfig: validation_fraction must lie in [0,1)");
    fit.validate();
    loss.validate();
  }
};

inline FittedIterate initial_iterate(const DrlConfig& config) {
  std::vector<std::size_t> dims{1};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(MDPSpec::num_actions * (config.k + 1));
  return FittedIterate{0, init_net(dims, derive_seed(derive_seed(config.seed, Stream::kInit), 0)),
                       QuantileLevels::uniform(config.k), MDPSpec::num_actions};
}

/// epsilon-greedy data collection. parallel_envs episodes advance in
/// lockstep; each resets to a U(0,1) state every episode_length steps.
/// Tuples are emitted step-major, env-minor.
inline std::vector<TransitionTuple> collect(const Policy& policy, const MDPSpec& mdp, std::size_t n,
                                            double epsilon, std::uint64_t seed,
                                            std::size_t episode_length = 20, std::size_t parallel_envs = 50) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("collect: epsilon must lie in [0,1]");
  if (episode_length < 1 || parallel_envs < 1) throw std::invalid_argument("collect: episode_length and parallel_envs must be >= 1");
  Rng rng(seed);
  const std::size_t envs = std::min(parallel_envs, std::max<std::size_t>(n, 1));
  std::vector<double> states(envs);
  std::vector<TransitionTuple> out;
  out.reserve(n);
  for (std::size_t t = 0; out.size() < n; ++t) {
    if (t % episode_length == 0)
      for (auto& s : states) s = rng.uniform01();
    const auto greedy = policy(states_matrix(states));
    for (std::size_t e = 0; e < envs && out.size() < n; ++e) {
      std::size_t a = greedy[e];
      if (rng.uniform01() < epsilon) a = rng.below(MDPSpec::num_actions);
      const double r = mdp.mean_reward(states[e], a) + mdp.sample_reward_noise(rng);
      const double s_next = mdp.next_state(states[e], a, rng.normal());
      out.push_back({states[e], a, r, s_next});
      states[e] = s_next;
    }
  }
  return out;
}

/// Averaged K x K pinball objective of the NQ heads selected by each
/// tuple's action against frozen Bellman target samples.
class DistributionalObjective {
 public:
  DistributionalObjective(std::span<const TransitionTuple> data, const Matrix& targets,
                          const QuantileLevels& levels, LossSpec loss, double validation_fraction)
      : levels_(levels), loss_(loss) {
    const std::size_t n = data.size();
    const auto n_val = static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(n)));
    // Every stride-th tuple goes to validation.
    const std::size_t stride = n_val > 0 ? n / n_val : n + 1;
    for (std::size_t i = 0; i < n; ++i) {
      auto& part = (n_val > 0 && i % stride == stride - 1 && parts_[1].actions.size() < n_val) ? parts_[1] : parts_[0];
      part.states.push_back(data[i].state);
      part.actions.push_back(data[i].action);
      part.columns.push_back(i);
    }
    for (auto& p : parts_) {
      p.x = states_matrix(p.states);
      p.targets.resize(targets.rows(), static_cast<Eigen::Index>(p.columns.size()));
      for (std::size_t j = 0; j < p.columns.size(); ++j)
        p.targets.col(static_cast<Eigen::Index>(j)) = targets.col(static_cast<Eigen::Index>(p.columns[j]));
    }
  }

  const Matrix& inputs(Split s) const { return part(s).x; }

  double loss(Split s, std::span<const std::size_t> idx, const Matrix& raw, Matrix* d_raw) const {
    const auto& p = part(s);
    const std::size_t kk = levels_.size();
    const auto b = static_cast<Eigen::Index>(idx.size());
    Matrix f(static_cast<Eigen::Index>(kk), b);
    Matrix tgt(p.targets.rows(), b);
    for (Eigen::Index c = 0; c < b; ++c) {
      const std::size_t a = p.actions[idx[static_cast<std::size_t>(c)]];
      head_forward(HeadKind::NqElu, std::span<const double>(raw.col(c).data() + a * (kk + 1), kk + 1),
                   std::span<double>(f.col(c).data(), kk));
      tgt.col(c) = p.targets.col(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
    }
    auto risk = target_sample_risk(levels_, f, tgt, loss_);
    if (d_raw) {
      d_raw->setZero(raw.rows(), raw.cols());
      for (Eigen::Index c = 0; c < b; ++c) {
        const std::size_t a = p.actions[idx[static_cast<std::size_t>(c)]];
        head_backward(HeadKind::NqElu, std::span<const double>(raw.col(c).data() + a * (kk + 1), kk + 1),
                      std::span<const double>(risk.grad.col(c).data(), kk),
                      std::span<double>(d_raw->col(c).data() + a * (kk + 1), kk + 1));
      }
    }
    return risk.value;
  }

 private:
  struct Part {
    std::vector<double> states;
    std::vector<std::size_t> actions;
    std::vector<std::size_t> columns;
    Matrix x;
    Matrix targets;
  };
  const Part& part(Split s) const { return parts_[s == Split::Train ? 0 : 1]; }

  Part parts_[2];
  const QuantileLevels& levels_;
  LossSpec loss_;
};

struct FitStepResult {
  FittedIterate next;
  FitHistory history;
};

/// One refit: Z^(m+1) minimizes the K x K pinball objective against
/// targets built from the frozen Z^(m).
inline FitStepResult fitted_nq_step(const FittedIterate& current, std::span<const TransitionTuple> data,
                                    double gamma, const DrlConfig& config) {
  if (data.empty()) throw std::invalid_argument("fitted_nq_step: empty data");
  config.validate();
  const Matrix targets = bellman_targets(current, data, gamma);
  const std::uint64_t step_seed = derive_seed(config.seed, current.index + 1);
  FittedIterate next = current;
  next.index = current.index + 1;
  if (!config.warm_start)
    next.net = init_net(current.net.layer_dims, derive_seed(derive_seed(config.seed, Stream::kInit), next.index));
  DistributionalObjective obj(data, targets, next.levels, config.loss, config.validation_fraction);
  auto hist = fit_network(next.net, obj, config.fit, derive_seed(step_seed, Stream::kShuffle));
  return {std::move(next), std::move(hist)};
}

// ---------------------------------------------------------------------------
// Oracle

/// Value iteration on a uniform state grid using mean rewards; the
/// transition noise is integrated with a fixed Gaussian rule and values
/// between grid points are linearly interpolated.
struct OracleSolution {
  std::vector<double> grid;
  std::vector<double> value;
  std::vector<std::size_t> policy;  // optimal action at each grid point
  double j_star = 0.0;              // E_{s0 ~ U(0,1)} V*(s0)
  std::size_t iterations = 0;
  MDPSpec mdp;
  std::vector<double> xi_nodes, xi_weights;

  double interpolate(double s) const {
    const double h = 1.0 / static_cast<double>(grid.size() - 1);
    const double pos = std::clamp(s, 0.0, 1.0) / h;
    const auto i = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * value[i] + w * value[i + 1];
  }

  double q(double s, std::size_t a) const {
    double ev = 0.0;
    for (std::size_t n = 0; n < xi_nodes.size(); ++n)
      ev += xi_weights[n] * interpolate(mdp.next_state(s, a, xi_nodes[n]));
    return mdp.mean_reward(s, a) + mdp.gamma * ev;
  }

  std::size_t action(double s) const {
    std::size_t best = 0;
    for (std::size_t a = 1; a < MDPSpec::num_actions; ++a)
      if (q(s, a) > q(s, best)) best = a;
    return best;
  }
};

class OracleNotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline OracleSolution dp_oracle(const MDPSpec& mdp, std::size_t grid_points = 2001,
                                std::size_t max_iterations = 100000, double tol = 1e-8) {
  mdp.validate();
  if (grid_points < 2) throw std::invalid_argument("dp_oracle: need at least 2 grid points");
  OracleSolution sol;
  sol.mdp = mdp;
  // Normal expectation on a fine uniform grid over [-8, 8].
  const std::size_t nodes = mdp.transition_noise > 0.0 ? 321 : 1;
  double wsum = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const double x = nodes == 1 ? 0.0 : -8.0 + 16.0 * static_cast<double>(i) / static_cast<double>(nodes - 1);
    const double w = std::exp(-0.5 * x * x);
    sol.xi_nodes.push_back(x);
    sol.xi_weights.push_back(w);
    wsum += w;
  }
  for (auto& w : sol.xi_weights) w /= wsum;

  const std::size_t g = grid_points;
  const double h = 1.0 / static_cast<double>(g - 1);
  sol.grid.resize(g);
  for (std::size_t i = 0; i < g; ++i) sol.grid[i] = static_cast<double>(i) * h;

  // Sparse transition stencils: for (i, a) a list of (grid index, weight).
  struct Entry { std::size_t idx; double w; };
  std::vector<std::vector<Entry>> stencil(g * MDPSpec::num_actions);
  std::vector<double> reward(g * MDPSpec::num_actions);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t a = 0; a < MDPSpec::num_actions; ++a) {
      auto& st = stencil[i * MDPSpec::num_actions + a];
      std::vector<double> dense;  // accumulated weight per touched index
      std::size_t lo = g, hi = 0;
      std::vector<std::pair<std::size_t, double>> raw;
      for (std::size_t n = 0; n < sol.xi_nodes.size(); ++n) {
        const double pos = mdp.next_state(sol.grid[i], a, sol.xi_nodes[n]) / h;
        const auto j = std::min(static_cast<std::size_t>(pos), g - 2);
        const double w = pos - static_cast<double>(j);
        raw.emplace_back(j, sol.xi_weights[n] * (1.0 - w));
        raw.emplace_back(j + 1, sol.xi_weights[n] * w);
        lo = std::min(lo, j);
        hi = std::max(hi, j + 1);
      }
      dense.assign(hi - lo + 1, 0.0);
      for (auto [j, w] : raw) dense[j - lo] += w;
      for (std::size_t j = 0; j < dense.size(); ++j)
        if (dense[j] > 0.0) st.push_back({lo + j, dense[j]});
      reward[i * MDPSpec::num_actions + a] = mdp.mean_reward(sol.grid[i], a);
    }
  }

  sol.value.assign(g, 0.0);
  std::vector<double> next(g);
  sol.policy.assign(g, 0);
  for (sol.iterations = 1; sol.iterations <= max_iterations; ++sol.iterations) {
    double change = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < MDPSpec::num_actions; ++a) {
        double ev = 0.0;
        for (const auto& e : stencil[i * MDPSpec::num_actions + a]) ev += e.w * sol.value[e.idx];
        const double q = reward[i * MDPSpec::num_actions + a] + mdp.gamma * ev;
        if (q > best) {
          best = q;
          sol.policy[i] = a;
        }
      }
      next[i] = best;
      change = std::max(change, std::abs(best - sol.value[i]));
    }
    sol.value.swap(next);
    if (change < tol) break;
  }
  if (sol.iterations > max_iterations)
    throw OracleNotConverged("dp_oracle: value iteration did not converge");

  // Trapezoid rule integrates the piecewise-linear interpolant exactly.
  double j = 0.0;
  for (std::size_t i = 0; i + 1 < g; ++i) j += 0.5 * h * (sol.value[i] + sol.value[i + 1]);
  sol.j_star = j;
  return sol;
}

/// Fraction of grid states where policy and oracle choose the same action.
inline double policy_agreement(const Policy& policy, const OracleSolution& oracle, std::size_t grid_points = 101) {
  std::vector<double> s(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i)
    s[i] = grid_points == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(grid_points - 1);
  const auto actions = policy(states_matrix(s));
  std::size_t agree = 0;
  for (std::size_t i = 0; i < grid_points; ++i) agree += actions[i] == oracle.action(s[i]);
  return static_cast<double>(agree) / static_cast<double>(grid_points);
}

/// Monte-Carlo estimate of J(pi) = E[sum_t gamma^t r_t], s0 ~ U(0,1). The
/// horizon is truncated once gamma^t drops below 1e-10.
inline double monte_carlo_return(const Policy& policy, const MDPSpec& mdp, std::size_t rollouts,
                                 std::uint64_t seed) {
  if (rollouts == 0) throw std::invalid_argument("monte_carlo_return: need at least one rollout");
  Rng rng(seed);
  std::vector<double> s(rollouts), ret(rollouts, 0.0);
  for (auto& x : s) x = rng.uniform01();
  double discount = 1.0;
  while (discount > 1e-10) {
    const auto act = policy(states_matrix(s));
    for (std::size_t i = 0; i < rollouts; ++i) {
      ret[i] += discount * (mdp.mean_reward(s[i], act[i]) + mdp.sample_reward_noise(rng));
      s[i] = mdp.next_state(s[i], act[i], rng.normal());
    }
    discount *= mdp.gamma;
    if (mdp.gamma == 0.0) break;
  }
  double total = 0.0;
  for (double r : ret) total += r;
  return total / static_cast<double>(rollouts);
}

// ---------------------------------------------------------------------------
// Algorithm loop

struct IterationDiagnostics {
  std::size_t iteration = 0;  // m; the fit produced Z^(m+1)
  double mean_q_on_grid = 0.0;
  std::optional<double> agreement;  // vs oracle, for pi_{m+1}
  double fit_loss_initial = 0.0;
  double fit_loss_final = 0.0;
  std::size_t stop_epoch = 0;
  double seconds = 0.0;
};

struct Algorithm1Result {
  FittedIterate final_iterate;
  std::vector<IterationDiagnostics> diagnostics;
};

class IterationFailed : public std::runtime_error {
 public:
  IterationFailed(std::size_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// For m = 0..M-1: greedy policy of Q^(m), epsilon-greedy collection of N
/// tuples, Bellman targets from Z^(m), refit. Returns Z^(M), whose greedy
/// policy is pi_M. `on_iteration` (optional) sees each diagnostic record as
/// soon as it is produced.
inline Algorithm1Result run_algorithm1(
    const MDPSpec& mdp, std::size_t iterations, std::size_t n, const DrlConfig& config,
    const OracleSolution* oracle = nullptr,
    const std::function<void(const IterationDiagnostics&)>& on_iteration = {}) {
  mdp.validate();
  config.validate();
  if (n == 0) throw std::invalid_argument("run_algorithm1: N must be at least 1");
  Algorithm1Result res{initial_iterate(config), {}};
  std::vector<double> grid(101);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i) / 100.0;
  const Matrix grid_states = states_matrix(grid);

  for (std::size_t m = 0; m < iterations; ++m) {
    const auto start = std::chrono::steady_clock::now();
    const auto data = collect(greedy_policy(res.final_iterate), mdp, n, config.epsilon,
                              derive_seed(derive_seed(config.seed, Stream::kCollect), m),
                              config.episode_length, config.parallel_envs);
    FitStepResult step;
    try {
      step = fitted_nq_step(res.final_iterate, data, mdp.gamma, config);
    } catch (const std::exception& e) {
      throw IterationFailed(m, e.what());
    }
    res.final_iterate = std::move(step.next);

    IterationDiagnostics d;
    d.iteration = m;
    d.mean_q_on_grid = res.final_iterate.q_values(grid_states).mean();
    if (oracle) d.agreement = policy_agreement(greedy_policy(res.final_iterate), *oracle);
    d.fit_loss_initial = step.history.initial_train_loss;
    // Training objective of the restored (best-validation) parameters.
    d.fit_loss_final = step.history.best_epoch == 0 ? d.fit_loss_initial
                                                    : step.history.train_loss[step.history.best_epoch - 1];
    d.stop_epoch = step.history.stop_epoch;
    d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_iteration) on_iteration(d);
    res.diagnostics.push_back(d);
  }
  return res;
}

}  // namespace nqnet
