#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mappfn/harness/baselines.hpp"
#include "mappfn/harness/evaluation.hpp"
#include "mappfn/harness/splits.hpp"
#include "mappfn/harness/sweep.hpp"
#include "mappfn/scm/scm_dataset.hpp"

namespace mappfn::harness {
namespace {

using data::ConditionKey;

std::vector<ConditionKey> grid(int contexts, int treatments) {
  std::vector<ConditionKey> keys;
  for (int c = 0; c < contexts; ++c) {
    for (int t = 0; t < treatments; ++t) keys.push_back({c, t});
  }
  return keys;
}

std::set<ConditionKey> as_set(const std::vector<ConditionKey>& v) { return {v.begin(), v.end()}; }

SplitSpec spec(int holdout, SplitMode mode, std::uint64_t seed = 7) {
  SplitSpec s;
  s.holdout_context = holdout;
  s.mode = mode;
  s.seed = seed;
  return s;
}

TEST(MakeSplits, ZeroShotSingleContext) {
  const auto s = make_splits(grid(1, 20), spec(0, SplitMode::kZeroShot));
  EXPECT_EQ(s.test.size(), 10u);
  EXPECT_EQ(s.holdout_rest.size(), 10u);
  EXPECT_TRUE(s.train.empty());
  EXPECT_TRUE(s.val.empty());
}

TEST(MakeSplits, FewShotPutsRestOfHoldoutInTraining) {
  const auto s = make_splits(grid(1, 20), spec(0, SplitMode::kFewShot));
  EXPECT_EQ(s.test.size(), 10u);
  std::set<ConditionKey> train_or_val = as_set(s.train);
  for (const auto& k : s.val) train_or_val.insert(k);
  EXPECT_EQ(train_or_val, as_set(s.holdout_rest));
  EXPECT_EQ(s.val.size(), 1u);
}

TEST(MakeSplits, ModesShareTestSet) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto few = make_splits(grid(5, 9), spec(2, SplitMode::kFewShot, seed));
    const auto zero = make_splits(grid(5, 9), spec(2, SplitMode::kZeroShot, seed));
    EXPECT_EQ(few.test, zero.test);
    EXPECT_EQ(few.holdout_rest, zero.holdout_rest);
  }
  EXPECT_NE(make_splits(grid(5, 9), spec(2, SplitMode::kFewShot, 1)).test,
            make_splits(grid(5, 9), spec(2, SplitMode::kFewShot, 2)).test);
}

TEST(MakeSplits, DisjointAndComplete) {
  const auto keys = grid(6, 7);
  for (SplitMode mode : {SplitMode::kFewShot, SplitMode::kZeroShot}) {
    const auto s = make_splits(keys, spec(4, mode));
    // Odd treatment counts round down.
    EXPECT_EQ(s.test.size(), 3u);
    std::set<ConditionKey> seen;
    for (const auto* part : {&s.train, &s.val, &s.test}) {
      for (const auto& k : *part) EXPECT_TRUE(seen.insert(k).second);
    }
    for (const auto& k : s.test) EXPECT_EQ(k.context_id, 4);
    const std::size_t discarded = mode == SplitMode::kZeroShot ? s.holdout_rest.size() : 0;
    EXPECT_EQ(seen.size() + discarded, keys.size());
    const std::size_t pool = s.train.size() + s.val.size();
    EXPECT_EQ(s.val.size(), static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(pool))));
  }
}

TEST(MakeSplits, ValidationHasAtLeastOne) {
  const auto s = make_splits(grid(2, 4), spec(0, SplitMode::kZeroShot));
  EXPECT_EQ(s.val.size(), 1u);
  EXPECT_EQ(s.train.size(), 3u);
}

TEST(MakeSplits, RejectsBadInput) {
  EXPECT_THROW(make_splits(grid(2, 4), spec(5, SplitMode::kFewShot)), InvalidArgument);
  EXPECT_THROW(make_splits(grid(2, 1), spec(0, SplitMode::kFewShot)), InvalidArgument);
  auto dup = grid(1, 4);
  dup.push_back({0, 1});
  EXPECT_THROW(make_splits(dup, spec(0, SplitMode::kFewShot)), InvalidArgument);
  auto bad = spec(0, SplitMode::kFewShot);
  bad.val_fraction = 1.0;
  EXPECT_THROW(make_splits(grid(1, 4), bad), InvalidArgument);
  EXPECT_THROW(parse_split_mode("half-shot"), InvalidArgument);
  EXPECT_EQ(parse_split_mode("zero-shot"), SplitMode::kZeroShot);
}

// Row i holds the value i in every column, so rows can be identified.
Matrix indexed_rows(int n, int d) {
  Matrix m(n, d);
  for (int i = 0; i < n; ++i) m.row(i).setConstant(i);
  return m;
}

std::multiset<int> row_ids(const Matrix& m) {
  std::multiset<int> ids;
  for (Eigen::Index i = 0; i < m.rows(); ++i) ids.insert(static_cast<int>(m(i, 0)));
  return ids;
}

TEST(IdentityBaseline, RowsComeFromObservationalBatch) {
  Rng rng(1);
  const Matrix obs = indexed_rows(30, 3);
  for (int m : {1, 30, 75}) {
    const Matrix out = identity_baseline(obs, m, rng);
    EXPECT_EQ(out.rows(), m);
    for (int id : row_ids(out)) {
      EXPECT_GE(id, 0);
      EXPECT_LT(id, 30);
    }
  }
  const auto full = row_ids(identity_baseline(obs, 30, rng));
  EXPECT_EQ(std::set<int>(full.begin(), full.end()).size(), 30u);
  EXPECT_THROW(identity_baseline(Matrix(0, 3), 5, rng), InvalidArgument);
}

TEST(SplitInterventional, DisjointHalves) {
  Rng rng(2);
  const auto s = split_interventional(indexed_rows(100, 2), 50, rng);
  EXPECT_FALSE(s.with_replacement);
  const auto a = row_ids(s.eval);
  const auto b = row_ids(s.reference);
  EXPECT_EQ(std::set<int>(a.begin(), a.end()).size(), 50u);
  for (int id : b) EXPECT_EQ(a.count(id), 0u);
}

TEST(SplitInterventional, FallsBackWithReplacement) {
  Rng rng(3);
  const auto s = split_interventional(indexed_rows(30, 2), 20, rng);
  EXPECT_TRUE(s.with_replacement);
  EXPECT_EQ(s.eval.rows(), 15);
  EXPECT_EQ(s.reference.rows(), 20);
  const auto a = row_ids(s.eval);
  for (int id : row_ids(s.reference)) EXPECT_EQ(a.count(id), 0u);
}

class SmallScm : public ::testing::Test {
 protected:
  static data::Dataset make() {
    scm::ScmDatasetConfig cfg = scm::ScmDatasetConfig::toy();
    cfg.dags = 4;
    cfg.seed = 11;
    return scm::generate_scm_dataset(cfg, 2);
  }
  data::Dataset dataset = make();
  std::vector<Splits> splits = make_holdout_splits(dataset, {0, 1, 2, 3}, spec(0, SplitMode::kFewShot, 5));
  model::ModelConfig cfg = model::ModelConfig::toy(6, 2);
  model::Params params = model::build_model(cfg, 3);

  EvalOptions options(SplitMode mode = SplitMode::kFewShot) const {
    EvalOptions o;
    o.mode = mode;
    o.seed = 9;
    return o;
  }
};

TEST_F(SmallScm, BaselineAnchors) {
  const auto report = run_eval({Predictor::identity(), Predictor::observed()}, dataset, splits, options());
  EXPECT_EQ(report.rows.size(), 2u * 4u * 3u);
  for (const auto& row : report.rows) {
    if (row.method == "identity") {
      EXPECT_EQ(row.mag_ratio, 0.0);
    } else {
      EXPECT_EQ(row.rank_t, 0.0) << row.context_id << ":" << row.treatment_id;
      EXPECT_NEAR(row.mag_ratio, 1.0, 0.3);
      EXPECT_EQ(row.flags.find("with_replacement"), std::string::npos);
    }
  }
  EXPECT_NEAR(report.mean("observed", "few-shot", "mag_ratio"), 1.0, 0.1);
}

TEST_F(SmallScm, RowCountMatchesTestConditions) {
  const auto report = run_eval({Predictor::model("mappfn", cfg, params, 4)}, dataset, splits[1], options());
  ASSERT_EQ(report.rows.size(), splits[1].test.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    EXPECT_EQ(report.rows[i].seed, 4);
    EXPECT_EQ(report.rows[i].context_id, splits[1].test[i].context_id);
    EXPECT_EQ(report.rows[i].treatment_id, splits[1].test[i].treatment_id);
    EXPECT_EQ(report.rows[i].flags.substr(0, 3), "K=2");
    EXPECT_TRUE(std::isfinite(report.rows[i].w2));
  }
}

TEST_F(SmallScm, DeterministicAcrossWorkers) {
  const std::vector<Predictor> preds{Predictor::model("mappfn", cfg, params, 0), Predictor::identity(),
                                     Predictor::observed()};
  auto o = options();
  o.workers = 1;
  const auto a = run_eval(preds, dataset, splits, o).csv();
  o.workers = 3;
  EXPECT_EQ(run_eval(preds, dataset, splits, o).csv(), a);
}

TEST_F(SmallScm, ModelDimensionMismatchRejected) {
  const auto wide = model::ModelConfig::toy(7, 2);
  const auto wide_params = model::build_model(wide, 1);
  EXPECT_THROW(run_eval({Predictor::model("m", wide, wide_params, 0)}, dataset, splits, options()), InvalidArgument);
  EXPECT_THROW(run_eval({Predictor::identity()}, dataset, Splits{}, options()), InvalidArgument);
}

TEST_F(SmallScm, BundleRespectsSplitMode) {
  const Splits& s = splits[2];
  const ConditionKey key = s.test.front();
  const std::set<ConditionKey> allowed = as_set(s.holdout_rest);
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto few = eval_bundle(dataset, s, key, options(), 2, rng);
    EXPECT_EQ(few.context_size(), 2);
    for (const auto& ex : few.context) {
      bool from_rest = false;
      for (const auto& k : allowed) from_rest = from_rest || ex.samples == dataset.condition(k).samples;
      EXPECT_TRUE(from_rest);
      EXPECT_FALSE(ex.samples == dataset.condition(key).samples);
    }
    EXPECT_TRUE(few.y_obs == dataset.context(key.context_id).observational);
    EXPECT_TRUE(few.query_treatment == dataset.condition(key).treatment_code);
    EXPECT_EQ(eval_bundle(dataset, s, key, options(SplitMode::kZeroShot), 2, rng).context_size(), 0);
  }
  auto truncated = options();
  truncated.context_size = 1;
  truncated.cells = 20;
  Rng rng(1);
  const auto b = eval_bundle(dataset, s, key, truncated, 2, rng);
  EXPECT_EQ(b.context_size(), 1);
  EXPECT_EQ(b.y_obs.rows(), 20);
  EXPECT_EQ(b.context[0].samples.rows(), 20);
}

TEST_F(SmallScm, ContextSweepStartsAtZeroOnFixedConditions) {
  const auto points =
      sweep_context_size({Predictor::model("mappfn", cfg, params, 0)}, dataset, {splits[0]}, options(), 2);
  ASSERT_EQ(points.size(), 3u);
  EXPECT_EQ(points[0].value, 0.0);
  for (const auto& p : points) {
    ASSERT_EQ(p.report.rows.size(), points[0].report.rows.size());
    for (std::size_t i = 0; i < p.report.rows.size(); ++i) {
      EXPECT_EQ(p.report.rows[i].treatment_id, points[0].report.rows[i].treatment_id);
      EXPECT_EQ(p.report.rows[i].flags.substr(0, 3), "K=" + std::to_string(static_cast<int>(p.value)));
    }
  }
  const std::string csv = sweep_csv(points);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "axis,value,method,conditions,w2,mmd,rmse,rank_t,mag_ratio,var_corr,auprc");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST_F(SmallScm, GuidanceSweepUsesFixedGrid) {
  EXPECT_EQ(kGuidanceGrid, (std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0}));
  auto o = options();
  o.compute_deg = false;
  const auto points = sweep_guidance({Predictor::model("mappfn", cfg, params, 0), Predictor::identity()}, dataset,
                                     {splits[0]}, o, {1.0, 3.0});
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[1].report.rows.front().setting, "omega=3");
  for (const auto& p : points) {
    for (const auto& row : p.report.rows) EXPECT_EQ(row.method, "mappfn");
  }
  EXPECT_THROW(sweep_guidance({Predictor::identity()}, dataset, {splits[0]}, o), InvalidArgument);
}

}  // namespace
}  // namespace mappfn::harness
