#include <cmath>

#include <gtest/gtest.h>

#include "qiniup/lasso.hpp"
#include "support/oracles.hpp"

using namespace qiniup;

TEST(LambdaMax, HandValueWithOneColumn) {
  // Only the treatment column is penalized; standardized t = (1,1,-1,-1).
  const UpliftDataset ds(Eigen::MatrixXd(4, 0), {1, 1, 0, 0}, {1, 0, 0, 0}, {});
  EXPECT_NEAR(lambda_max(ds), 0.25, 1e-15);
}

TEST(LambdaSequence, LogSpaced) {
  oracle::Gen g(1);
  const auto ds = oracle::random_dataset(g, 100, 3);
  const auto seq = lambda_sequence(ds, 100, 1e-2);
  ASSERT_EQ(seq.size(), 100u);
  EXPECT_DOUBLE_EQ(seq.front(), lambda_max(ds));
  EXPECT_NEAR(seq.back(), 1e-2 * lambda_max(ds), 1e-12);
  const double ratio = seq[1] / seq[0];
  for (std::size_t j = 1; j < seq.size(); ++j) EXPECT_NEAR(seq[j] / seq[j - 1], ratio, 1e-12);
}

TEST(LambdaSequence, DefaultEps) {
  EXPECT_EQ(default_lambda_eps(100, 10), 1e-4);
  EXPECT_EQ(default_lambda_eps(20, 10), 1e-2);
}

TEST(LassoPath, InterceptOnlyAtLambdaMax) {
  oracle::Gen g(2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ds = oracle::random_dataset(g, 60, 3);
    const double lm = lambda_max(ds);
    const std::vector<double> lambdas = {2 * lm, lm};
    const auto path = fit_lasso_path(ds, lambdas);
    double ybar = 0;
    for (int v : ds.outcome()) ybar += v;
    ybar /= static_cast<double>(ds.n());
    for (const auto& c : path.coefficients) {
      EXPECT_TRUE(c.support().empty());
      EXPECT_NEAR(c.intercept, std::log(ybar / (1 - ybar)), 1e-9);
    }
  }
}

TEST(LassoPath, MatchesProximalGradientOracle) {
  oracle::Gen g(99);
  const auto ds = oracle::random_dataset(g, 40, 2, 0.8);
  const auto lambdas = lambda_sequence(ds, 15, 0.02);
  const auto path = fit_lasso_path(ds, lambdas);
  const auto st = oracle::standardize(ds);
  const Eigen::VectorXd y = oracle::outcome(ds);
  Eigen::VectorXd warm;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    warm = oracle::fista(st, y, lambdas[j], warm);
    const Eigen::VectorXd ref = oracle::to_original(st, warm);
    const Eigen::VectorXd got = path.coefficients[j].flat();
    for (Eigen::Index k = 0; k < ref.size(); ++k)
      EXPECT_NEAR(got[k], ref[k], 1e-4) << "lambda " << j << " coord " << k;
    const Eigen::VectorXd w = oracle::to_standardized(st, got);
    EXPECT_LT(oracle::kkt_violation(st, y, w, lambdas[j]), 1e-6) << "lambda " << j;
  }
}

TEST(LassoPath, SupportGrowsAndDiagnosticsFilled) {
  oracle::Gen g(4);
  const auto ds = oracle::random_dataset(g, 300, 4, 0.8);
  PathOptions opt;
  opt.length = 30;
  const auto path = fit_lasso_path(ds, opt);
  ASSERT_EQ(path.size(), 30u);
  EXPECT_EQ(path.support_sizes.front(), 0u);
  EXPECT_GT(path.support_sizes.back(), 0u);
  for (std::size_t j = 0; j < path.size(); ++j) {
    EXPECT_TRUE(path.diagnostics[j].converged);
    EXPECT_EQ(path.support_sizes[j], path.coefficients[j].support().size());
  }
}

TEST(LassoPath, ObjectiveMatchesIndependentEvaluation) {
  oracle::Gen g(5);
  const auto ds = oracle::random_dataset(g, 80, 2);
  const auto lambdas = lambda_sequence(ds, 5, 0.05);
  const auto path = fit_lasso_path(ds, lambdas);
  const auto st = oracle::standardize(ds);
  const Eigen::VectorXd y = oracle::outcome(ds);
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const Eigen::VectorXd w = oracle::to_standardized(st, path.coefficients[j].flat());
    EXPECT_NEAR(penalized_objective(ds, path.coefficients[j], lambdas[j]),
                oracle::penalized(st, y, w, lambdas[j]), 1e-10);
  }
}

TEST(LassoPath, RejectsBadLambdas) {
  oracle::Gen g(6);
  const auto ds = oracle::random_dataset(g, 30, 1);
  EXPECT_THROW(fit_lasso_path(ds, std::vector<double>{0.1, 0.2}), ValidationError);
  EXPECT_THROW(fit_lasso_path(ds, std::vector<double>{0.1, -0.1}), ValidationError);
}

TEST(StandardizedDesign, RoundTrip) {
  oracle::Gen g(7);
  const auto ds = oracle::random_dataset(g, 50, 3);
  const StandardizedDesign sd(ds);
  EXPECT_EQ(sd.width(), 7u);
  UpliftCoefficients c = UpliftCoefficients::zero(3);
  c.intercept = 0.3;
  c.main << 1, -2, 0;
  c.treat = 0.5;
  c.interact << 0, 0.25, -1;
  const auto [a, s] = sd.to_standardized(c);
  const auto back = sd.to_original(a, s);
  const Eigen::VectorXd diff = back.flat() - c.flat();
  EXPECT_LT(diff.lpNorm<Eigen::Infinity>(), 1e-12);
}
