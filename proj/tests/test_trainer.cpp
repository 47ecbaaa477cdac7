#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nqnet/trainer.hpp"

using namespace nqnet;

namespace {

TrainConfig small_config(HeadKind head, std::size_t k = 5) {
  TrainConfig c;
  c.head = head;
  c.levels = QuantileLevels::uniform(k);
  c.hidden = {16, 16};
  c.fit.max_epochs = 60;
  c.fit.patience = 60;
  c.seed = 3;
  return c;
}

// Fixed-output predictor for evaluation tests.
struct TablePredictor {
  QuantileLevels levels;
  Matrix values;  // K x T
  const QuantileLevels& quantile_levels() const { return levels; }
  Matrix predict(const Matrix&) const { return values; }
};

}  // namespace

TEST(Train, ConstantTargetRecovered) {
  Dataset tr, va;
  tr.x = Matrix::Zero(1, 64);
  va.x = Matrix::Zero(1, 16);
  for (Eigen::Index i = 0; i < 64; ++i) tr.x(0, i) = static_cast<double>(i) / 63.0;
  for (Eigen::Index i = 0; i < 16; ++i) va.x(0, i) = static_cast<double>(i) / 15.0;
  tr.y.assign(64, 1.7);
  va.y.assign(16, 1.7);
  TrainConfig c = small_config(HeadKind::NqElu, 1);
  c.levels = QuantileLevels({0.5});
  c.fit.max_epochs = 800;
  c.fit.patience = 800;
  c.fit.batch_size = 16;
  c.fit.adam.lr = 1e-2;
  const auto res = train_on(tr, va, c);
  Matrix grid(1, 101);
  for (Eigen::Index i = 0; i < 101; ++i) grid(0, i) = static_cast<double>(i) / 100.0;
  const Matrix f = res.predictor.predict(grid);
  EXPECT_LT((f.array() - 1.7).abs().maxCoeff(), 0.05);
}

TEST(Train, FirstEpochDescends) {
  for (auto head : {HeadKind::NqElu, HeadKind::Dqr, HeadKind::DqrStar}) {
    TrainConfig c = small_config(head);
    c.fit.max_epochs = 1;
    const auto res = train(make_model(ModelId::Wave), 256, c);
    ASSERT_EQ(res.history.train_loss.size(), 1u);
    EXPECT_LT(res.history.train_loss[0], res.history.initial_train_loss) << to_string(head);
  }
}

TEST(Train, DeterministicForSeed) {
  const auto c = small_config(HeadKind::NqElu);
  const auto a = train(make_model(ModelId::Angle), 64, c), b = train(make_model(ModelId::Angle), 64, c);
  EXPECT_EQ(a.history.train_loss, b.history.train_loss);
  EXPECT_EQ(a.predictor.net.weights.back(), b.predictor.net.weights.back());
}

TEST(Train, EarlyStoppingRestoresBest) {
  TrainConfig c = small_config(HeadKind::NqElu);
  c.fit.max_epochs = 400;
  c.fit.patience = 5;
  const auto res = train(make_model(ModelId::Wave), 64, c);
  EXPECT_LE(res.history.stop_epoch, 400u);
  EXPECT_EQ(res.history.stop_epoch, res.history.train_loss.size());
  if (res.history.best_epoch > 0) {
    EXPECT_EQ(res.history.best_val_loss, res.history.val_loss[res.history.best_epoch - 1]);
  }
}

TEST(Train, RejectsTinyN) {
  EXPECT_THROW(train(make_model(ModelId::Wave), 4, small_config(HeadKind::NqElu)), std::invalid_argument);
}

TEST(Evaluate, ExactPredictorHasZeroError) {
  for (auto id : kAllModels) {
    const auto m = make_model(id);
    const TrueQuantilePredictor p{m, QuantileLevels::benchmark_grid()};
    const auto rep = evaluate(p, m, 500, 1);
    for (std::size_t k = 0; k < rep.l1.size(); ++k) {
      EXPECT_NEAR(rep.l1[k], 0.0, 1e-12);
      EXPECT_NEAR(rep.l2sq[k], 0.0, 1e-20);
    }
    EXPECT_EQ(rep.crossing_fraction, 0.0);
  }
}

TEST(Evaluate, ThreePointBruteForce) {
  const auto m = make_model(ModelId::Linear1D);
  const QuantileLevels lv({0.25, 0.75});
  Matrix x(1, 3);
  x << 0.0, 0.5, 1.0;
  TablePredictor p{lv, Matrix(2, 3)};
  p.values << 0.0, 1.0, 3.0, 1.0, 0.5, 2.5;  // columns 2 and 3 cross
  const auto rep = evaluate_on(p, m, x);
  // Brute force: Q(x, tau) = 2x + t2 quantile(tau).
  double l1[2] = {0, 0}, l2[2] = {0, 0};
  const double z[2] = {-1.0 / std::sqrt(2.0 * 0.25 * 0.75) * 0.5, 1.0 / std::sqrt(2.0 * 0.25 * 0.75) * 0.5};
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 2; ++k) {
      const double d = p.values(k, c) - (2.0 * x(0, c) + z[k]);
      l1[k] += std::abs(d) / 3.0;
      l2[k] += d * d / 3.0;
    }
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(rep.l1[static_cast<std::size_t>(k)], l1[k], 1e-14);
    EXPECT_NEAR(rep.l2sq[static_cast<std::size_t>(k)], l2[k], 1e-14);
  }
  EXPECT_NEAR(rep.crossing_fraction, 2.0 / 3.0, 1e-15);
}

TEST(Evaluate, NqNeverCrosses) {
  const auto c = small_config(HeadKind::NqElu, 19);
  const auto res = train(make_model(ModelId::Wave), 128, c);
  EXPECT_EQ(evaluate(res.predictor, make_model(ModelId::Wave), 20000, 4).crossing_fraction, 0.0);
}

TEST(Evaluate, DqrCrossesOnWave) {
  // Unconstrained outputs on heteroscedastic data cross somewhere for at
  // least one of a few short fits.
  bool crossed = false;
  for (std::uint64_t s = 1; s <= 4 && !crossed; ++s) {
    TrainConfig c = small_config(HeadKind::Dqr, 19);
    c.seed = s;
    const auto res = train(make_model(ModelId::Wave), 256, c);
    crossed = evaluate(res.predictor, make_model(ModelId::Wave), 20000, s).crossing_fraction > 0.0;
  }
  EXPECT_TRUE(crossed);
}

TEST(Train, Linear1DLargeSampleMedian) {
  TrainConfig c;
  c.seed = 11;
  const auto res = train(make_model(ModelId::Linear1D), 2048, c);
  const auto rep = evaluate(res.predictor, make_model(ModelId::Linear1D), 100000, 12);
  EXPECT_LE(rep.l2sq[9], 0.05);
}

TEST(Replicate, SingleReplicateHasZeroStd) {
  ReplicateOptions o;
  o.models = {ModelId::Wave};
  o.methods = {HeadKind::NqElu, HeadKind::Dqr};
  o.n = 64;
  o.replicates = 1;
  o.base_seed = 5;
  o.train = small_config(HeadKind::NqElu);
  o.test_size = 2000;
  o.workers = 2;
  const auto s = replicate(o);
  ASSERT_EQ(s.rows.size(), 10u);
  for (const auto& r : s.rows) {
    EXPECT_EQ(r.l1_std, 0.0);
    EXPECT_EQ(r.l2sq_std, 0.0);
    EXPECT_EQ(r.runs_completed, 1u);
    if (r.method == HeadKind::NqElu) {
      EXPECT_EQ(r.crossing_fraction_mean, 0.0);
    }
  }
}

TEST(Replicate, DeterministicAcrossWorkerCounts) {
  ReplicateOptions o;
  o.models = {ModelId::Angle};
  o.methods = {HeadKind::NqElu, HeadKind::DqrStar};
  o.n = 64;
  o.replicates = 3;
  o.base_seed = 8;
  o.train = small_config(HeadKind::NqElu);
  o.test_size = 1000;
  o.workers = 1;
  const auto a = replicate(o);
  o.workers = 4;
  const auto b = replicate(o);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].l1_mean, b.rows[i].l1_mean);
    EXPECT_EQ(a.rows[i].l2sq_std, b.rows[i].l2sq_std);
  }
}

TEST(Replicate, StdUsesSampleDenominator) {
  EXPECT_NEAR(detail::std_of({1.0, 2.0, 3.0, 4.0}), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(detail::std_of({2.5}), 0.0);
}

TEST(Replicate, SeedIndependentOfOtherCells) {
  EXPECT_EQ(replicate_seed(1, ModelId::Wave, 3), replicate_seed(1, ModelId::Wave, 3));
  EXPECT_NE(replicate_seed(1, ModelId::Wave, 3), replicate_seed(1, ModelId::Angle, 3));
  EXPECT_NE(replicate_seed(1, ModelId::Wave, 3), replicate_seed(1, ModelId::Wave, 4));
}
