#pragma once

// Supervised quantile regression on the simulation models: training with
// early stopping, evaluation against the analytic quantile curves, and the
// multi-seed replication harness.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nqnet/fit.hpp"
#include "nqnet/heads.hpp"
#include "nqnet/losses.hpp"
#include "nqnet/nn_core.hpp"
#include "nqnet/rng.hpp"
#include "nqnet/simdata.hpp"

namespace nqnet {

/// Hidden widths used for a model: [128,128,128] for univariate inputs,
/// [256,256,256] for the 8-dimensional ones.
inline std::vector<std::size_t> default_hidden_widths(const SimModel& model) {
  return model.input_dim == 1 ? std::vector<std::size_t>{128, 128, 128}
                              : std::vector<std::size_t>{256, 256, 256};
}

struct TrainConfig {
  HeadKind head = HeadKind::NqElu;
  QuantileLevels levels = QuantileLevels::benchmark_grid();
  std::vector<std::size_t> hidden;  // empty: default_hidden_widths(model)
  FitOptions fit;
  LossSpec loss;
  std::uint64_t seed = 0;

  void validate() const {
    fit.validate();
    loss.validate();
    for (auto w : hidden)
      if (w == 0) throw std::invalid_argument("TrainConfig: hidden widths must be positive");
  }
};

/// A trained network plus the head that turns its raw output into quantiles.
struct QuantilePredictor {
  DenseNet net;
  HeadKind head = HeadKind::NqElu;
  QuantileLevels levels = QuantileLevels::benchmark_grid();

  const QuantileLevels& quantile_levels() const { return levels; }

  /// x is input_dim x T; result is K x T.
  Matrix predict(const Matrix& x) const {
    return head_forward(head, levels.size(), nqnet::predict(net, x));
  }
};

/// Exact ground-truth curves packaged as a predictor.
struct TrueQuantilePredictor {
  SimModel model;
  QuantileLevels levels;

  const QuantileLevels& quantile_levels() const { return levels; }

  Matrix predict(const Matrix& x) const {
    Matrix out(static_cast<Eigen::Index>(levels.size()), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const std::span<const double> xc(x.col(c).data(), static_cast<std::size_t>(x.rows()));
      for (std::size_t k = 0; k < levels.size(); ++k)
        out(static_cast<Eigen::Index>(k), c) = true_quantile(model, xc, levels[k]);
    }
    return out;
  }
};

template <class P>
concept Predictor = requires(const P& p, const Matrix& x) {
  { p.quantile_levels() } -> std::convertible_to<const QuantileLevels&>;
  { p.predict(x) } -> std::convertible_to<Matrix>;
};

struct EvalReport {
  std::vector<double> taus;
  std::vector<double> l1;    // mean |f_tau(X) - Q_tau(X)| per level
  std::vector<double> l2sq;  // mean squared difference per level
  double crossing_fraction = 0.0;
  double non_strict_fraction = 0.0;  // some adjacent pair not strictly increasing
  std::size_t test_size = 0;
  std::optional<FitHistory> training;  // filled by train_and_evaluate
};

/// Errors on a fixed set of test inputs (input_dim x T).
template <Predictor P>
EvalReport evaluate_on(const P& predictor, const SimModel& model, const Matrix& x_test) {
  const auto& levels = predictor.quantile_levels();
  const std::size_t k = levels.size();
  const auto t = x_test.cols();
  if (t == 0) throw std::invalid_argument("evaluate: empty test set");
  const Matrix pred = predictor.predict(x_test);
  require_shape(pred.rows() == static_cast<Eigen::Index>(k) && pred.cols() == t,
                "evaluate: predictor output shape mismatch");

  std::vector<double> noise_q(k);
  const bool t2 = location_scale(model, std::vector<double>(model.input_dim, 0.5)).t2_noise;
  for (std::size_t j = 0; j < k; ++j)
    noise_q[j] = t2 ? student_t2_quantile(levels[j]) : std_normal_quantile(levels[j]);

  EvalReport rep;
  rep.taus.assign(levels.taus().begin(), levels.taus().end());
  rep.l1.assign(k, 0.0);
  rep.l2sq.assign(k, 0.0);
  rep.test_size = static_cast<std::size_t>(t);
  std::size_t crossings = 0, non_strict = 0;
  for (Eigen::Index c = 0; c < t; ++c) {
    const std::span<const double> xc(x_test.col(c).data(), model.input_dim);
    const auto ls = location_scale(model, xc);
    for (std::size_t j = 0; j < k; ++j) {
      const double diff = pred(static_cast<Eigen::Index>(j), c) - (ls.location + ls.scale * noise_q[j]);
      rep.l1[j] += std::abs(diff);
      rep.l2sq[j] += diff * diff;
    }
    if (has_crossing(std::span<const double>(pred.col(c).data(), k))) ++crossings;
    for (std::size_t j = 1; j < k; ++j) {
      if (!(pred(static_cast<Eigen::Index>(j), c) > pred(static_cast<Eigen::Index>(j - 1), c))) {
        ++non_strict;
        break;
      }
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    rep.l1[j] /= static_cast<double>(t);
    rep.l2sq[j] /= static_cast<double>(t);
  }
  rep.crossing_fraction = static_cast<double>(crossings) / static_cast<double>(t);
  rep.non_strict_fraction = static_cast<double>(non_strict) / static_cast<double>(t);
  return rep;
}

/// Errors on a fresh test draw of size T from the model's covariate law.
template <Predictor P>
EvalReport evaluate(const P& predictor, const SimModel& model, std::size_t test_size,
                    std::uint64_t seed) {
  if (test_size == 0) throw std::invalid_argument("evaluate: T must be at least 1");
  return evaluate_on(predictor, model, sample(model, test_size, seed).x);
}

/// Multi-level pinball risk of a head on a dataset.
class SupervisedObjective {
 public:
  SupervisedObjective(const Dataset& train, const Dataset& val, HeadKind head,
                      const QuantileLevels& levels, LossSpec loss)
      : train_(train), val_(val), head_(head), levels_(levels), loss_(loss) {}

  const Matrix& inputs(Split s) const { return s == Split::Train ? train_.x : val_.x; }

  double loss(Split s, std::span<const std::size_t> idx, const Matrix& raw, Matrix* d_raw) const {
    const auto& ys = s == Split::Train ? train_.y : val_.y;
    std::vector<double> targets(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) targets[i] = ys[idx[i]];
    const Matrix f = head_forward(head_, levels_.size(), raw);
    auto risk = empirical_risk(levels_, f, targets, loss_);
    if (d_raw) *d_raw = head_backward(head_, raw, risk.grad);
    return risk.value;
  }

 private:
  const Dataset& train_;
  const Dataset& val_;
  HeadKind head_;
  const QuantileLevels& levels_;
  LossSpec loss_;
};

struct TrainResult {
  QuantilePredictor predictor;
  FitHistory history;
};

inline std::vector<std::size_t> layer_dims_for(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                                               std::size_t output_dim) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);
  return dims;
}

/// Fits config.head on given train / validation sets.
inline TrainResult train_on(const Dataset& train_set, const Dataset& val_set, const TrainConfig& config) {
  config.validate();
  const auto d = train_set.input_dim();
  const auto hidden = config.hidden.empty()
                          ? default_hidden_widths(make_model(train_set.model_id))
                          : config.hidden;
  QuantilePredictor pred{
      init_net(layer_dims_for(d, hidden, raw_dim(config.head, config.levels.size())),
               derive_seed(config.seed, Stream::kInit)),
      config.head, config.levels};
  SupervisedObjective obj(train_set, val_set, config.head, pred.levels, config.loss);
  auto hist = fit_network(pred.net, obj, config.fit, derive_seed(config.seed, Stream::kShuffle));
  return {std::move(pred), std::move(hist)};
}

/// Draws N training points and N/4 validation points from the model and fits.
inline TrainResult train(const SimModel& model, std::size_t n, const TrainConfig& config) {
  if (n < 8) throw std::invalid_argument("train: need at least 8 training samples");
  const Dataset tr = sample(model, n, derive_seed(config.seed, Stream::kData));
  const Dataset va = sample(model, n / 4, derive_seed(config.seed, Stream::kValidation));
  return train_on(tr, va, config);
}

// ---------------------------------------------------------------------------
// Replication harness

struct ReplicateOptions {
  std::vector<ModelId> models;
  std::vector<HeadKind> methods;
  std::size_t n = 512;
  std::size_t replicates = 1;
  std::uint64_t base_seed = 0;
  TrainConfig train;  // head and seed are overwritten per run
  std::size_t test_size = 100000;
  std::size_t workers = 1;
};

struct RunRecord {
  ModelId model = ModelId::Linear1D;
  HeadKind method = HeadKind::NqElu;
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::size_t failed_epoch = 0;
  EvalReport report;
};

struct SummaryRow {
  ModelId model = ModelId::Linear1D;
  HeadKind method = HeadKind::NqElu;
  std::size_t n = 0;
  double tau = 0.0;
  double l1_mean = 0.0, l1_std = 0.0;
  double l2sq_mean = 0.0, l2sq_std = 0.0;
  double crossing_fraction_mean = 0.0;
  std::size_t runs_completed = 0;
};

struct ReplicationSummary {
  std::vector<SummaryRow> rows;  // ordered by model, method, tau
  std::vector<RunRecord> runs;   // ordered by model, replicate, method
  std::size_t failures = 0;

  /// Row for (model, method, level index) or nullptr.
  const SummaryRow* find(ModelId model, HeadKind method, std::size_t level) const {
    std::size_t seen = 0;
    for (const auto& r : rows) {
      if (r.model != model || r.method != method) continue;
      if (seen++ == level) return &r;
    }
    return nullptr;
  }
};

/// Seed of replicate r for a model; independent of which other models or
/// methods are requested, so cells can be recomputed in isolation.
inline std::uint64_t replicate_seed(std::uint64_t base_seed, ModelId model, std::size_t r) {
  return derive_seed(derive_seed(derive_seed(base_seed, Stream::kReplicate), static_cast<std::uint64_t>(model)), r);
}

/// Trains and evaluates one (model, method, replicate) cell.
inline RunRecord run_cell(const ReplicateOptions& opts, ModelId model_id, HeadKind method, std::size_t r) {
  RunRecord rec;
  rec.model = model_id;
  rec.method = method;
  rec.n = opts.n;
  rec.replicate = r;
  rec.seed = replicate_seed(opts.base_seed, model_id, r);
  const SimModel model = make_model(model_id);
  TrainConfig cfg = opts.train;
  cfg.head = method;
  cfg.seed = rec.seed;
  try {
    auto res = train(model, opts.n, cfg);
    rec.report = evaluate(res.predictor, model, opts.test_size, derive_seed(rec.seed, Stream::kTest));
    rec.report.training = std::move(res.history);
    rec.ok = true;
  } catch (const FitDiverged& e) {
    rec.error = e.what();
    rec.failed_epoch = e.epoch();
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Aggregates per-level errors over the completed runs of each cell.
inline std::vector<SummaryRow> summarize(const ReplicateOptions& opts, const std::vector<RunRecord>& runs) {
  std::vector<SummaryRow> rows;
  const auto& levels = opts.train.levels;
  for (auto model : opts.models) {
    for (auto method : opts.methods) {
      std::vector<const RunRecord*> done;
      for (const auto& r : runs)
        if (r.model == model && r.method == method && r.ok) done.push_back(&r);
      std::vector<double> cross;
      for (auto* r : done) cross.push_back(r->report.crossing_fraction);
      for (std::size_t j = 0; j < levels.size(); ++j) {
        std::vector<double> l1, l2;
        for (auto* r : done) {
          l1.push_back(r->report.l1[j]);
          l2.push_back(r->report.l2sq[j]);
        }
        rows.push_back({model, method, opts.n, levels[j], detail::mean_of(l1), detail::std_of(l1),
                        detail::mean_of(l2), detail::std_of(l2), detail::mean_of(cross), done.size()});
      }
    }
  }
  return rows;
}

/// R independent (data, init, test) seeds per model; every requested method
/// sees the same data for a given replicate. Results are merged in a fixed
/// order regardless of the worker count.
inline ReplicationSummary replicate(const ReplicateOptions& opts) {
  if (opts.replicates < 1) throw std::invalid_argument("replicate: R must be at least 1");
  if (opts.models.empty() || opts.methods.empty())
    throw std::invalid_argument("replicate: need at least one model and one method");
  opts.train.validate();

  const std::size_t per_model = opts.replicates * opts.methods.size();
  std::vector<RunRecord> runs(opts.models.size() * per_model);
  detail::parallel_for(runs.size(), opts.workers, [&](std::size_t i) {
    const std::size_t m = i / per_model;
    const std::size_t r = (i % per_model) / opts.methods.size();
    const std::size_t h = i % opts.methods.size();
    runs[i] = run_cell(opts, opts.models[m], opts.methods[h], r);
  });

  ReplicationSummary out;
  for (const auto& r : runs) out.failures += r.ok ? 0 : 1;
  out.rows = summarize(opts, runs);
  out.runs = std::move(runs);
  return out;
}

}  // namespace nqnet
