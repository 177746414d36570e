#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "qiniup/glm.hpp"
#include "qiniup/model.hpp"
#include "qiniup/select.hpp"
#include "support/oracles.hpp"

using namespace qiniup;

namespace {

double brute_metric(const UpliftDataset& ds, const UpliftCoefficients& c, std::size_t J) {
  const Eigen::VectorXd u = predict_uplifts(c, ds.features());
  return oracle::brute_metrics(ds, std::vector<double>(u.data(), u.data() + u.size()), J).adjusted;
}

LassoPath manual_path(std::vector<UpliftCoefficients> coeffs) {
  LassoPath path;
  double lambda = 1.0;
  for (auto& c : coeffs) {
    path.lambdas.push_back(lambda);
    lambda /= 2;
    path.support_sizes.push_back(c.support().size());
    path.diagnostics.emplace_back();
    path.coefficients.push_back(std::move(c));
  }
  return path;
}

}  // namespace

TEST(QLassoSelect, SingleLambda) {
  oracle::Gen g(1);
  const auto ds = oracle::random_dataset(g, 200, 2);
  auto c = UpliftCoefficients::zero(2);
  c.main << 0.5, 0.0;
  c.interact << 0.0, 0.7;
  const auto sel = q_lasso_select(manual_path({c}), ds, 4);
  EXPECT_EQ(sel.lambda_index, 0u);
  EXPECT_EQ(sel.support, c.support());
  EXPECT_EQ(sel.first_stage, c);
}

TEST(QLassoSelect, MatchesBruteForceArgmax) {
  oracle::Gen g(2);
  for (int rep = 0; rep < 10; ++rep) {
    const auto ds = oracle::random_dataset(g, 300, 2, 1.0);
    std::vector<UpliftCoefficients> cs;
    for (int k = 0; k < 3; ++k) {
      auto c = UpliftCoefficients::zero(2);
      c.interact << g.normal(), g.normal();
      cs.push_back(c);
    }
    std::vector<double> brute;
    for (const auto& c : cs) brute.push_back(brute_metric(ds, c, 4));
    const auto best = static_cast<std::size_t>(std::max_element(brute.begin(), brute.end()) - brute.begin());
    const auto sel = q_lasso_select(manual_path(cs), ds, 4);
    EXPECT_EQ(sel.lambda_index, best);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(sel.path_metric[k], brute[k], 1e-12);
  }
}

TEST(QLassoSelect, TieChoosesLargerLambda) {
  oracle::Gen g(3);
  const auto ds = oracle::random_dataset(g, 200, 1, 1.0);
  auto c = UpliftCoefficients::zero(1);
  c.interact << 1.0;
  auto scaled = c;
  scaled.interact << 2.0;  // same ranking, same metric
  const auto sel = q_lasso_select(manual_path({UpliftCoefficients::zero(1), c, scaled}), ds, 4);
  if (sel.path_metric[1] > 0) EXPECT_EQ(sel.lambda_index, 1u);
  EXPECT_EQ(sel.path_metric[1], sel.path_metric[2]);
}

TEST(QLassoSelect, RefitIsMleOnSupport) {
  oracle::Gen g(4);
  const auto ds = oracle::random_dataset(g, 400, 3, 0.8);
  PathOptions opt;
  opt.length = 10;
  const auto path = fit_lasso_path(ds, opt);
  const auto sel = q_lasso_select(path, ds, 5);
  const auto refit = fit_mle(ds, sel.support);
  EXPECT_EQ(sel.coefficients, refit.coefficients);
  EXPECT_EQ(sel.first_stage, path.coefficients[sel.lambda_index]);
  EXPECT_EQ(sel.lambda, path.lambdas[sel.lambda_index]);
}

TEST(StratifiedFolds, BalancedCells) {
  oracle::Gen g(5);
  const auto ds = oracle::random_dataset(g, 203, 1);
  const auto folds = stratified_folds(ds, 5, RandomSeed{9});
  ASSERT_EQ(folds.size(), ds.n());
  for (int cell = 0; cell < 4; ++cell) {
    std::vector<std::size_t> count(5, 0);
    for (std::size_t i = 0; i < ds.n(); ++i)
      if (ds.treatment()[i] * 2 + ds.outcome()[i] == cell) ++count[folds[i]];
    const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
    EXPECT_LE(*hi - *lo, 1u);
  }
  EXPECT_EQ(folds, stratified_folds(ds, 5, RandomSeed{9}));
}

TEST(CrossValidation, DegenerateFoldsRejected) {
  oracle::Gen g(6);
  const auto ds = oracle::random_dataset(g, 12, 1);
  CvOptions opt;
  opt.K = ds.n();
  opt.J = 2;
  EXPECT_THROW(cross_validated_select(ds, MetricKind::kAdjustedQini, SelectionRule::kArgmax, opt),
               ValidationError);
  opt.K = 1;
  EXPECT_THROW(loglik_cv_select(ds, opt), ValidationError);
}

TEST(CrossValidation, OneStandardErrorNeverSmallerLambda) {
  oracle::Gen g(7);
  for (int rep = 0; rep < 4; ++rep) {
    const auto ds = oracle::random_dataset(g, 400, 3, 0.6);
    CvOptions opt;
    opt.K = 4;
    opt.J = 4;
    opt.seed = RandomSeed{static_cast<std::uint64_t>(rep)};
    opt.path.length = 15;
    const auto am = cross_validated_select(ds, MetricKind::kAdjustedQini, SelectionRule::kArgmax, opt);
    const auto ose =
        cross_validated_select(ds, MetricKind::kAdjustedQini, SelectionRule::kOneStandardError, opt);
    EXPECT_GE(ose.lambda, am.lambda);
    ASSERT_TRUE(am.cv.has_value());
    const auto& cv = *am.cv;
    EXPECT_EQ(cv.lambdas.size(), 15u);
    for (std::size_t j = 0; j < cv.lambdas.size(); ++j) {
      double m = 0;
      for (double v : cv.fold_values[j]) m += v;
      EXPECT_NEAR(cv.means[j], m / 4, 1e-12);
    }
  }
}

TEST(LoglikCv, InformativeFeatureEntersSupport) {
  oracle::Gen g(8);
  const std::size_t n = 400;
  Eigen::MatrixXd x(n, 3);
  std::vector<int> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = g.normal();
    t[i] = g.coin(0.5);
    y[i] = g.coin(oracle::sigmoid(3.0 * x(i, 0)));
  }
  const UpliftDataset ds(x, t, y, oracle::names(3));
  CvOptions opt;
  opt.seed = RandomSeed{3};
  const auto sel = loglik_cv_select(ds, opt);
  EXPECT_NE(std::find(sel.support.begin(), sel.support.end(), 0u), sel.support.end());
  EXPECT_EQ(sel.lambda, loglik_cv_select(ds, opt).lambda);
}

TEST(LoglikCv, NoiseGivesSmallSupport) {
  oracle::Gen g(9);
  int small = 0;
  for (int rep = 0; rep < 6; ++rep) {
    const std::size_t n = 500;
    Eigen::MatrixXd x(n, 4);
    std::vector<int> t(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < 4; ++j) x(i, j) = g.normal();
      t[i] = g.coin(0.5);
      y[i] = g.coin(0.4);
    }
    const UpliftDataset ds(x, t, y, oracle::names(4));
    CvOptions opt;
    opt.seed = RandomSeed{static_cast<std::uint64_t>(rep)};
    opt.path.length = 30;
    small += loglik_cv_select(ds, opt).support.size() <= 2;
  }
  EXPECT_GE(small, 4);
}

TEST(RankOfLambda, Definitions) {
  const std::vector<double> v = {0.1, 0.5, 0.3, 0.5, -1};
  EXPECT_EQ(rank_of_lambda(v, 1), 1u);
  EXPECT_EQ(rank_of_lambda(v, 3), 2u);
  EXPECT_EQ(rank_of_lambda(v, 4), 5u);
  EXPECT_EQ(rank_of_lambda({5, 4, 3, 2, 1}, 4), 5u);
}

TEST(RankOfLambda, MatchesSortOracle) {
  oracle::Gen g(10);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v(1 + g.index(30));
    for (auto& x : v) x = std::round(g.normal() * 4) / 4;  // force some ties
    const std::size_t target = g.index(v.size());
    EXPECT_EQ(rank_of_lambda(v, target), oracle::sort_rank(v, target));
  }
}
