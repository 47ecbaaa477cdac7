// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Progress and details go to stderr.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../support.hpp"
#include "nqnet/drl.hpp"
#include "nqnet/simdata.hpp"
#include "nqnet/trainer.hpp"

using namespace nqnet;

namespace {

constexpr std::uint64_t kBaseSeed = 2024;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t default_workers() {
  return std::max<std::size_t>(1, std::min<std::size_t>(4, std::thread::hardware_concurrency()));
}

// Strict ordering of every column of K x B quantile outputs.
bool strictly_ordered(const Matrix& f) {
  for (Eigen::Index c = 0; c < f.cols(); ++c)
    for (Eigen::Index k = 1; k < f.rows(); ++k)
      if (!(f(k, c) > f(k - 1, c))) return false;
  return true;
}

// Predictions of criteria 4-7 feed the monotonicity check of criterion 1.
struct MonotoneLedger {
  std::size_t checked_predictions = 0;
  std::size_t violations = 0;

  void add(const EvalReport& r) {
    checked_predictions += r.test_size;
    violations += static_cast<std::size_t>(std::llround(r.non_strict_fraction * static_cast<double>(r.test_size)));
  }
};

Outcome head_algebra() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(kBaseSeed, 2));
  double worst_mean = 0, worst_gap = 0;
  for (std::size_t k : {1u, 5u, 19u, 200u}) {
    std::vector<double> g(k);
    for (int rep = 0; rep < 10000; ++rep) {
      const double v = rng.uniform(-50, 50);
      for (auto& x : g) x = rng.uniform(-50, 50);
      const auto fan = nq_forward(v, g);
      double mean = 0;
      for (double f : fan.f) mean += f;
      mean /= static_cast<double>(k);
      worst_mean = std::max(worst_mean, std::abs(mean - v) / (1 + std::abs(v)));
      for (std::size_t i = 0; i + 1 < k; ++i)
        worst_gap = std::max(worst_gap, std::abs(fan.f[i + 1] - fan.f[i] - fan.sigma_g[i + 1]));
    }
  }
  std::ostringstream d;
  d << "max |mean(f)-v|/(1+|v|) = " << worst_mean << ", max gap error = " << worst_gap << " ("
    << seconds_since(t0) << " s)";
  return {worst_mean <= 1e-9 && worst_gap <= 1e-9, d.str()};
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::size_t checked = 0, masked = 0;
  for (auto kind : {HeadKind::NqElu, HeadKind::NqRelu, HeadKind::Dqr, HeadKind::DqrStar, HeadKind::NcQrDqn}) {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const auto r = nqtest::finite_difference_check(
          nqtest::random_problem(kind, derive_seed(derive_seed(kBaseSeed, 3), static_cast<std::uint64_t>(kind) * 100 + i)));
      worst = std::max(worst, r.max_rel_error);
      checked += r.checked;
      masked += r.masked;
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "max relative error " << worst << " over " << checked << " coordinates (" << masked << " kink-adjacent masked), "
    << secs << " s";
  return {worst < 1e-4 && checked > 0 && secs < 120, d.str()};
}

Outcome linear_recovery(MonotoneLedger& ledger) {
  const auto t0 = Clock::now();
  TrainConfig cfg;
  cfg.seed = kBaseSeed;
  const auto model = make_model(ModelId::Linear1D);
  const auto res = train(model, 512, cfg);
  const auto rep = evaluate(res.predictor, model, 100000, derive_seed(kBaseSeed, Stream::kTest));
  ledger.add(rep);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "L2^2 at tau=0.5: " << rep.l2sq[9] << " (bound 0.08), stopped at epoch " << res.history.stop_epoch << ", "
    << secs << " s";
  return {rep.l2sq[9] <= 0.08 && secs < 600, d.str()};
}

struct WaveRun {
  ReplicationSummary summary;
  double seconds = 0;
};

WaveRun wave_replication() {
  ReplicateOptions o;
  o.models = {ModelId::Wave};
  o.methods = {HeadKind::NqElu, HeadKind::DqrStar, HeadKind::Dqr};
  o.n = 512;
  o.replicates = 10;
  o.base_seed = kBaseSeed;
  o.test_size = 100000;
  o.workers = default_workers();
  const auto t0 = Clock::now();
  WaveRun w{replicate(o), 0};
  w.seconds = seconds_since(t0);
  return w;
}

Outcome wave_comparison(const WaveRun& w, MonotoneLedger& ledger) {
  double avg_nq = 0, avg_star = 0;
  for (std::size_t j = 0; j < 19; ++j) {
    avg_nq += w.summary.find(ModelId::Wave, HeadKind::NqElu, j)->l1_mean / 19.0;
    avg_star += w.summary.find(ModelId::Wave, HeadKind::DqrStar, j)->l1_mean / 19.0;
  }
  const auto* mid = w.summary.find(ModelId::Wave, HeadKind::NqElu, 9);
  for (const auto& r : w.summary.runs)
    if (r.ok && r.method == HeadKind::NqElu) ledger.add(r.report);
  std::ostringstream d;
  d << "NQ L1(0.5) = " << mid->l1_mean << " (sd " << mid->l1_std << ", bound 0.35); mean L1 over levels NQ "
    << avg_nq << " vs DQR* " << avg_star << "; " << mid->runs_completed << "/10 NQ runs, " << w.seconds << " s";
  return {w.summary.failures == 0 && mid->runs_completed == 10 && mid->l1_mean <= 0.35 && avg_nq <= avg_star &&
              w.seconds < 90 * 60,
          d.str()};
}

Outcome crossing_demo(const WaveRun& w) {
  std::size_t dqr_crossing = 0, dqr_runs = 0, nq_zero = 0, nq_runs = 0;
  std::ostringstream fractions;
  for (const auto& r : w.summary.runs) {
    if (!r.ok) continue;
    if (r.method == HeadKind::Dqr) {
      ++dqr_runs;
      dqr_crossing += r.report.crossing_fraction > 0.0;
      fractions << (dqr_runs > 1 ? " " : "") << r.report.crossing_fraction;
    } else if (r.method == HeadKind::NqElu) {
      ++nq_runs;
      nq_zero += r.report.crossing_fraction == 0.0;
    }
  }
  std::ostringstream d;
  d << "DQR crossing on " << dqr_crossing << "/" << dqr_runs << " seeds (need >= 8; fractions " << fractions.str()
    << "); NQ zero crossing on " << nq_zero << "/" << nq_runs;
  return {dqr_runs == 10 && dqr_crossing >= 8 && nq_runs == 10 && nq_zero == 10, d.str()};
}

Outcome drl_setting(double df, MonotoneLedger& ledger, std::string& label) {
  const auto t0 = Clock::now();
  MDPSpec mdp;
  mdp.noise_df = df;
  const auto oracle = dp_oracle(mdp);
  DrlConfig cfg;
  cfg.seed = kBaseSeed;
  const auto res = run_algorithm1(mdp, 20, 2000, cfg, &oracle, [](const IterationDiagnostics& d) {
    std::fprintf(stderr, "  iteration %zu: agreement %.3f, mean Q %.4f\n", d.iteration, *d.agreement,
                 d.mean_q_on_grid);
  });
  const Policy pi = greedy_policy(res.final_iterate);
  const double agreement = policy_agreement(pi, oracle);
  const double j_pi = monte_carlo_return(pi, mdp, 10000, derive_seed(kBaseSeed, Stream::kRollout));
  const double rel = std::abs(oracle.j_star - j_pi) / std::abs(oracle.j_star);

  Matrix states(1, 10001);
  for (Eigen::Index i = 0; i < states.cols(); ++i) states(0, i) = static_cast<double>(i) / 10000.0;
  const Matrix z = res.final_iterate.quantiles(states);
  const auto k = static_cast<Eigen::Index>(res.final_iterate.k());
  for (Eigen::Index a = 0; a < 2; ++a) {
    EvalReport r;
    r.test_size = static_cast<std::size_t>(states.cols());
    r.non_strict_fraction = strictly_ordered(z.middleRows(a * k, k)) ? 0.0 : 1.0;
    ledger.add(r);
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "df=" << df << ": agreement " << agreement << " (need >= 0.9), J(pi_M) = " << j_pi << " vs J* = " << oracle.j_star
    << " (rel. gap " << rel << ", need <= 0.1), " << secs << " s";
  label = d.str();
  return {agreement >= 0.9 && rel <= 0.1 && secs < 30 * 60, label};
}

Outcome k_quantile_rate() {
  const auto t0 = Clock::now();
  double worst_uniform = 0;
  for (std::size_t k = 1; k <= 1000; ++k) {
    std::vector<double> q(k);
    for (std::size_t i = 0; i < k; ++i) q[i] = static_cast<double>(i + 1) / static_cast<double>(k + 1);
    worst_uniform = std::max(worst_uniform, std::abs(k_quantile_mean(q) - 0.5));
  }
  auto exp_err = [](std::size_t k) {
    std::vector<double> q(k);
    for (std::size_t i = 0; i < k; ++i) q[i] = -std::log1p(-static_cast<double>(i + 1) / static_cast<double>(k + 1));
    return std::abs(k_quantile_mean(q) - 1.0);
  };
  const double e100 = exp_err(100), e1000 = exp_err(1000);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "uniform max error " << worst_uniform << " (K = 1..1000); Exp(1) error K=100 " << e100 << ", K=1000 " << e1000
    << " (ratio " << e1000 / e100 << ")";
  return {worst_uniform <= 1e-12 && e1000 < e100 / 5.0 && secs < 1.0, d.str()};
}

Outcome oracle_equivalences() {
  Rng rng(derive_seed(kBaseSeed, 9));
  // Empirical risk against a plain double loop.
  double worst_risk = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t k = 1 + rng.below(6), n = 1 + rng.below(8);
    std::vector<double> taus(k);
    for (std::size_t i = 0; i < k; ++i) taus[i] = (static_cast<double>(i) + rng.uniform(0.05, 0.95)) / static_cast<double>(k);
    const QuantileLevels lv(taus);
    Matrix pred(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
    std::vector<double> y(n);
    for (Eigen::Index i = 0; i < pred.size(); ++i) pred(i) = rng.normal();
    for (auto& v : y) v = rng.normal();
    double brute = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const double u = y[i] - pred(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        brute += u >= 0 ? taus[j] * u : (taus[j] - 1) * u;
      }
    brute /= static_cast<double>(n * k);
    const double got = empirical_risk(lv, pred, y).value;
    worst_risk = std::max(worst_risk, std::abs(got - brute) / std::max(std::abs(brute), 1e-300));
  }

  // Bellman targets against an explicit argmax construction.
  std::size_t target_mismatches = 0;
  for (int rep = 0; rep < 50; ++rep) {
    DrlConfig c;
    c.k = 1 + rng.below(8);
    c.hidden = {8};
    c.seed = rng();
    FittedIterate it = initial_iterate(c);
    for (auto& b : it.net.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.normal();
    std::vector<TransitionTuple> batch(10);
    for (auto& t : batch) t = {rng.uniform01(), rng.below(2), rng.normal(), rng.uniform01()};
    const double gamma = rng.uniform(0, 0.99);
    const Matrix got = bellman_targets(it, batch, gamma);
    // Network outputs come from the same batched evaluation; argmax and
    // target assembly are rebuilt by hand.
    Matrix next(1, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) next(0, static_cast<Eigen::Index>(i)) = batch[i].next_state;
    const Matrix all = it.quantiles(next);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Matrix z = all.col(static_cast<Eigen::Index>(i));
      std::size_t best = 0;
      double best_sum = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < 2; ++a) {
        double s = 0;
        for (std::size_t j = 0; j < c.k; ++j) s += z(static_cast<Eigen::Index>(a * c.k + j), 0);
        if (s > best_sum) {
          best_sum = s;
          best = a;
        }
      }
      for (std::size_t j = 0; j < c.k; ++j)
        target_mismatches += got(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) !=
                             batch[i].reward + gamma * z(static_cast<Eigen::Index>(best * c.k + j), 0);
    }
  }

  // t2 closed-form quantile against bisection on the CDF.
  double worst_t2 = 0;
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    double lo = -1e4, hi = 1e4;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (student_t2_cdf(mid) < p ? lo : hi) = mid;
    }
    worst_t2 = std::max(worst_t2, std::abs(student_t2_quantile(p) - 0.5 * (lo + hi)));
  }
  std::ostringstream d;
  d << "risk rel. error " << worst_risk << ", bellman target mismatches " << target_mismatches << ", t2 max error "
    << worst_t2;
  return {worst_risk < 1e-12 && target_mismatches == 0 && worst_t2 <= 1e-9, d.str()};
}

Outcome monotonicity(const MonotoneLedger& ledger) {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(kBaseSeed, 1));
  std::size_t violations = 0;
  std::vector<double> raw, f;
  for (int rep = 0; rep < 1000000; ++rep) {
    const std::size_t k = 2 + rng.below(31);
    raw.resize(k + 1);
    f.resize(k);
    for (auto& x : raw) x = rng.uniform(-50, 50);
    head_forward(HeadKind::NqElu, raw, f);
    for (std::size_t i = 0; i + 1 < k; ++i) violations += !(f[i + 1] - f[i] > 0.0);
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << violations << " violations in 10^6 random heads (" << secs << " s); " << ledger.violations
    << " non-strict predictions among " << ledger.checked_predictions << " NQ predictions from criteria 4-7";
  return {violations == 0 && ledger.violations == 0 && ledger.checked_predictions > 0 && secs < 60, d.str()};
}

}  // namespace

int main() {
  std::vector<Outcome> results(10);
  MonotoneLedger ledger;
  auto run = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    std::fprintf(stderr, "criterion %d (%s) ...\n", id, name.c_str());
    try {
      results[static_cast<std::size_t>(id)] = fn();
    } catch (const std::exception& e) {
      results[static_cast<std::size_t>(id)] = {false, std::string("exception: ") + e.what()};
    }
    std::fprintf(stderr, "  %s\n", results[static_cast<std::size_t>(id)].detail.c_str());
  };

  run(2, "head algebra", head_algebra);
  run(3, "gradient suite", gradient_suite);
  run(8, "k-quantile mean", k_quantile_rate);
  run(9, "oracle equivalences", oracle_equivalences);
  run(4, "linear recovery", [&] { return linear_recovery(ledger); });
  WaveRun wave;
  run(5, "wave comparison", [&] {
    wave = wave_replication();
    return wave_comparison(wave, ledger);
  });
  run(6, "crossing demonstration", [&] { return crossing_demo(wave); });
  run(7, "distributional RL", [&] {
    std::string a, b;
    const Outcome light = drl_setting(10.0, ledger, a);
    const Outcome heavy = drl_setting(2.5, ledger, b);
    return Outcome{light.pass && heavy.pass, a + "; " + b};
  });
  run(1, "monotonicity", [&] { return monotonicity(ledger); });

  const char* names[] = {"",
                         "monotonicity invariant",
                         "head algebra",
                         "gradient suite",
                         "linear recovery",
                         "wave comparison",
                         "crossing demonstration",
                         "distributional RL regret",
                         "k-quantile mean rate",
                         "oracle equivalences"};
  bool all = true;
  for (int id = 1; id <= 9; ++id) {
    const auto& r = results[static_cast<std::size_t>(id)];
    all = all && r.pass;
    std::printf("%s criterion %d %s: %s\n", r.pass ? "PASS" : "FAIL", id, names[id], r.detail.c_str());
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
