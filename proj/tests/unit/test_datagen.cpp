#include <cmath>

#include <gtest/gtest.h>

#include "qiniup/simulation.hpp"
#include "qiniup/synthetic.hpp"
#include "qiniup/tree.hpp"
#include "support/oracles.hpp"

using namespace qiniup;

namespace {

// Two segments by a binary feature: uplift +0.4 where s=1, -0.4 where s=0.
UpliftDataset two_segments(oracle::Gen& g, std::size_t n) {
  Eigen::MatrixXd x(n, 2);
  std::vector<int> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = g.normal();
    x(i, 1) = static_cast<double>(i % 2);
    t[i] = static_cast<int>((i / 2) % 2);
    const double p = x(i, 1) == 1 ? (t[i] ? 0.7 : 0.3) : (t[i] ? 0.3 : 0.7);
    y[i] = g.coin(p);
  }
  return UpliftDataset(x, t, y, {"noise", "segment"});
}

}  // namespace

TEST(UpliftTree, DepthZeroIsOverallRates) {
  oracle::Gen g(1);
  const auto ds = oracle::random_dataset(g, 300, 2);
  TreeOptions opt;
  opt.depth = 0;
  const auto tree = fit_uplift_tree(ds, opt);
  ASSERT_EQ(tree.nodes().size(), 1u);
  double yt = 0, yc = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) (ds.treatment()[i] ? yt : yc) += ds.outcome()[i];
  const auto [p1, p0] = tree.predict(ds.features().row(0).transpose());
  EXPECT_DOUBLE_EQ(p1, yt / static_cast<double>(ds.n_treated()));
  EXPECT_DOUBLE_EQ(p0, yc / static_cast<double>(ds.n_control()));
}

TEST(UpliftTree, SplitsOnSignFlippingFeature) {
  oracle::Gen g(2);
  const auto ds = two_segments(g, 2000);
  TreeOptions opt;
  opt.depth = 1;
  const auto tree = fit_uplift_tree(ds, opt);
  ASSERT_EQ(tree.nodes().size(), 3u);
  EXPECT_EQ(tree.nodes()[0].feature, 1);
  EXPECT_EQ(tree.depth(), 1u);
  EXPECT_EQ(tree.leaf_count(), 2u);
}

TEST(UpliftTree, LeafRatesAreEmpiricalMeans) {
  oracle::Gen g(3);
  const auto ds = two_segments(g, 1500);
  const auto tree = fit_uplift_tree(ds, TreeOptions{});
  const auto& nodes = tree.nodes();
  std::vector<double> yt(nodes.size()), yc(nodes.size()), nt(nodes.size()), nc(nodes.size());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto leaf = tree.leaf_index(ds.features().row(i).transpose());
    (ds.treatment()[i] ? yt : yc)[leaf] += ds.outcome()[i];
    (ds.treatment()[i] ? nt : nc)[leaf] += 1;
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].feature >= 0) continue;
    EXPECT_DOUBLE_EQ(nodes[k].p1, yt[k] / nt[k]);
    EXPECT_DOUBLE_EQ(nodes[k].p0, yc[k] / nc[k]);
    EXPECT_GE(nodes[k].n_treat, 30u);
    EXPECT_GE(nodes[k].n_control, 30u);
  }
}

TEST(SmoothedKl, ZeroWhenRatesEqual) {
  EXPECT_NEAR(smoothed_kl(10, 50, 10, 50), 0.0, 1e-15);
  EXPECT_GT(smoothed_kl(40, 50, 10, 50), 0.0);
}

TEST(BuildTruth, SingleTreeAndDeterminism) {
  oracle::Gen g(4);
  const auto ds = oracle::random_dataset(g, 500, 3);
  const auto a = build_truth(ds, TreeOptions{}, 1, RandomSeed{5});
  ASSERT_EQ(a.trees().size(), 1u);
  for (std::size_t i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = ds.features().row(i).transpose();
    const auto [p1, p0] = a.trees()[0].predict(x);
    EXPECT_EQ(a.p1(x), p1);
    EXPECT_EQ(a.p0(x), p0);
  }
  const auto b = build_truth(ds, TreeOptions{}, 7, RandomSeed{5});
  const auto c = build_truth(ds, TreeOptions{}, 7, RandomSeed{5});
  EXPECT_EQ(b.uplifts(ds.features()), c.uplifts(ds.features()));
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto [p1, p0] = b.probabilities(ds.features().row(i).transpose());
    EXPECT_GE(p1, 0.0);
    EXPECT_LE(p1, 1.0);
    EXPECT_GE(p0, 0.0);
    EXPECT_LE(p0, 1.0);
  }
}

TEST(GenerateSynthetic, DegenerateRates) {
  UpliftTree::Node leaf;
  leaf.p1 = 1.0;
  leaf.p0 = 0.0;
  const SyntheticTruth truth({UpliftTree({leaf})}, 2);
  oracle::Gen g(5);
  const auto base = oracle::random_dataset(g, 100, 2);
  const auto s = generate_synthetic(truth, base, RandomSeed{1});
  for (std::size_t i = 0; i < s.data.n(); ++i)
    EXPECT_EQ(s.data.outcome()[i], s.data.treatment()[i]);
}

TEST(GenerateSynthetic, TreatedRateWithinBinomialBounds) {
  oracle::Gen g(6);
  const auto base = oracle::random_dataset(g, 800, 3);
  const auto truth = build_truth(base, TreeOptions{}, 5, RandomSeed{2});
  int inside = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto s = generate_synthetic(truth, base, RandomSeed{100 + r});
    double y = 0, p = 0, var = 0, nt = 0;
    for (std::size_t i = 0; i < s.data.n(); ++i) {
      if (!s.data.treatment()[i]) continue;
      y += s.data.outcome()[i];
      p += s.p1[i];
      var += s.p1[i] * (1 - s.p1[i]);
      nt += 1;
    }
    inside += std::abs(y - p) <= 3 * std::sqrt(var);
    EXPECT_EQ(s.data.n(), base.n());
    (void)nt;
  }
  EXPECT_GE(inside, 48);
}

TEST(GenerateSynthetic, SameSeedSameData) {
  oracle::Gen g(7);
  const auto base = oracle::random_dataset(g, 300, 2);
  const auto truth = build_truth(base, TreeOptions{}, 3, RandomSeed{1});
  const auto a = generate_synthetic(truth, base, RandomSeed{9});
  const auto b = generate_synthetic(truth, base, RandomSeed{9});
  EXPECT_EQ(a.data.features(), b.data.features());
  EXPECT_EQ(a.data.treatment(), b.data.treatment());
  EXPECT_EQ(a.data.outcome(), b.data.outcome());
  EXPECT_EQ(a.true_uplift, b.true_uplift);
}

TEST(BasePopulation, ShapeAndNames) {
  BasePopulationConfig cfg;
  cfg.n = 400;
  const auto ds = generate_base_population(cfg);
  EXPECT_EQ(ds.n(), 400u);
  EXPECT_EQ(ds.p(), 20u);
  EXPECT_EQ(ds.feature_names().front(), "x1");
  EXPECT_EQ(ds.feature_names().back(), "d10");
}

TEST(StratifiedSubsample, KeepsArmShares) {
  oracle::Gen g(8);
  const auto ds = oracle::random_dataset(g, 1000, 1);
  Rng rng = make_rng(RandomSeed{3});
  const auto idx = stratified_subsample(ds, 250, rng);
  ASSERT_EQ(idx.size(), 250u);
  std::size_t treated = 0;
  for (auto i : idx) treated += ds.treatment()[i];
  const double expect = 250.0 * static_cast<double>(ds.n_treated()) / 1000.0;
  EXPECT_LE(std::abs(static_cast<double>(treated) - expect), 1.0);
}

class SmallSimulation : public ::testing::Test {
 protected:
  static ScenarioConfig config() {
    ScenarioConfig cfg;
    cfg.depth = 1;
    cfg.k = 5;
    cfg.n_sample = 600;
    cfg.replications = 3;
    cfg.J = 5;
    cfg.trees = 5;
    cfg.lhs.samples = 10;
    cfg.path.length = 20;
    return cfg;
  }
  static const UpliftDataset& base() {
    static const UpliftDataset ds = [] {
      BasePopulationConfig b;
      b.n = 1500;
      return generate_base_population(b);
    }();
    return ds;
  }
};

TEST_F(SmallSimulation, BaselineOnlyTable) {
  const auto r = run_simulation(base(), config(), {Estimator::kBaseline});
  EXPECT_EQ(r.summary.size(), 5u);
  for (const auto& row : r.summary) EXPECT_EQ(row.estimator, "Baseline");
  for (const auto& rep : r.replications) {
    ASSERT_TRUE(rep.ok) << rep.error;
    EXPECT_EQ(rep.scores[0]->rrmse, 1.0);
  }
}

TEST_F(SmallSimulation, DeterministicAcrossThreads) {
  auto cfg = config();
  const auto a = run_simulation(base(), cfg, all_estimators());
  cfg.threads = 3;
  const auto b = run_simulation(base(), cfg, all_estimators());
  ASSERT_EQ(a.summary.size(), b.summary.size());
  for (std::size_t i = 0; i < a.summary.size(); ++i) {
    EXPECT_EQ(a.summary[i].mean, b.summary[i].mean);
    EXPECT_EQ(a.summary[i].se, b.summary[i].se);
  }
}

TEST(Estimators, NamesRoundTrip) {
  for (auto e : all_estimators()) EXPECT_EQ(parse_estimator(estimator_name(e)), e);
  EXPECT_THROW(parse_estimator("nope"), ValidationError);
}
