#include <cmath>

#include <gtest/gtest.h>

#include "qiniup/glm.hpp"
#include "support/oracles.hpp"

using namespace qiniup;

namespace {

UpliftDataset saturated() {
  // Control: 2 of 4 respond; treated: 3 of 4 respond.
  return UpliftDataset(Eigen::MatrixXd(8, 0), {0, 0, 0, 0, 1, 1, 1, 1}, {1, 1, 0, 0, 1, 1, 1, 0}, {});
}

}  // namespace

TEST(FitMle, SaturatedClosedForm) {
  const auto fit = fit_mle(saturated());
  EXPECT_TRUE(fit.diagnostics.converged);
  EXPECT_NEAR(fit.coefficients.intercept, 0.0, 1e-9);
  EXPECT_NEAR(fit.coefficients.treat, std::log(3.0), 1e-9);
}

TEST(FitMle, MatchesGradientAscentOracle) {
  oracle::Gen g(42);
  for (int rep = 0; rep < 5; ++rep) {
    const auto ds = oracle::random_dataset(g, 30, 2, 0.5);
    const auto fit = fit_mle(ds);
    if (fit.diagnostics.separation) continue;
    const Eigen::VectorXd ref = oracle::mle_gradient_ascent(ds);
    const Eigen::VectorXd got = fit.coefficients.flat();
    for (Eigen::Index j = 0; j < ref.size(); ++j) EXPECT_NEAR(got[j], ref[j], 1e-4) << "coord " << j;
  }
}

TEST(FitMle, EmptySupportIsInterceptOnly) {
  oracle::Gen g(5);
  const auto ds = oracle::random_dataset(g, 60, 3);
  const auto fit = fit_mle(ds, std::vector<std::size_t>{});
  double ybar = 0;
  for (int v : ds.outcome()) ybar += v;
  ybar /= static_cast<double>(ds.n());
  EXPECT_NEAR(fit.coefficients.intercept, std::log(ybar / (1 - ybar)), 1e-9);
  EXPECT_EQ(fit.coefficients.support().size(), 0u);
}

TEST(FitMle, SupportRestrictsCoordinates) {
  oracle::Gen g(6);
  const auto ds = oracle::random_dataset(g, 200, 3);
  const auto fit = fit_mle(ds, std::vector<std::size_t>{0, 3, 5});
  EXPECT_EQ(fit.coefficients.support(), (std::vector<std::size_t>{0, 3, 5}));
  const Eigen::VectorXd s = score(fit.coefficients, ds);
  for (std::size_t k : {0u, 1u, 4u, 6u}) EXPECT_NEAR(s[k], 0.0, 1e-6);
}

TEST(FitMle, SeparationIsFlagged) {
  Eigen::MatrixXd x(8, 1);
  x << -4, -3, -2, -1, 1, 2, 3, 4;
  const UpliftDataset ds(x, {0, 1, 0, 1, 0, 1, 0, 1}, {0, 0, 0, 0, 1, 1, 1, 1}, {"x"});
  const auto fit = fit_mle(ds);
  EXPECT_TRUE(fit.diagnostics.separation);
  EXPECT_FALSE(fit.diagnostics.warnings.empty());
}

TEST(Score, MatchesCentralDifferences) {
  oracle::Gen g(17);
  for (int rep = 0; rep < 10; ++rep) {
    const auto ds = oracle::random_dataset(g, 50, 3);
    Eigen::VectorXd b(8);
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = 0.5 * g.normal();
    const auto c = UpliftCoefficients::from_flat(b);
    const Eigen::VectorXd analytic = score(c, ds);
    const Eigen::VectorXd numeric = oracle::finite_difference_gradient(ds, b);
    for (Eigen::Index j = 0; j < b.size(); ++j)
      EXPECT_NEAR(analytic[j], numeric[j], 1e-5 * std::max(1.0, std::abs(numeric[j])));
    EXPECT_NEAR(log_likelihood(c, ds), oracle::loglik(oracle::design(ds), oracle::outcome(ds), b),
                1e-10);
  }
}

TEST(Covariance, InterceptOnlyClosedForm) {
  oracle::Gen g(3);
  const auto ds = oracle::random_dataset(g, 400, 1);
  const auto fit = fit_mle(ds, std::vector<std::size_t>{});
  const auto cov = coefficient_covariance(fit.coefficients, ds);
  double ybar = 0;
  for (int v : ds.outcome()) ybar += v;
  ybar /= static_cast<double>(ds.n());
  EXPECT_NEAR(cov.at(0, 0), 1.0 / (static_cast<double>(ds.n()) * ybar * (1 - ybar)), 1e-9);
  EXPECT_FALSE(cov.active(1));
  EXPECT_EQ(cov.at(1, 1), 0.0);
}

TEST(Covariance, MatchesFiniteDifferenceHessian) {
  oracle::Gen g(23);
  const auto ds = oracle::random_dataset(g, 50, 2, 0.4);
  const auto fit = fit_mle(ds);
  ASSERT_FALSE(fit.diagnostics.separation);
  const Eigen::VectorXd b = fit.coefficients.flat();
  const Eigen::MatrixXd info = observed_information(fit.coefficients, ds);
  const Eigen::MatrixXd H = -oracle::finite_difference_hessian(ds, b);
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    for (Eigen::Index j = 0; j < H.cols(); ++j)
      EXPECT_NEAR(info(i, j), H(i, j), 1e-4 * std::max(1.0, std::abs(H(i, j))));
  const auto cov = coefficient_covariance(fit.coefficients, ds);
  const Eigen::MatrixXd inv = H.inverse();
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      EXPECT_NEAR(cov.at(i, j), inv(i, j), 1e-4 * std::max(1.0, std::abs(inv(i, j))));
}

TEST(Covariance, OrthogonalDesignIsDiagonallyDominant) {
  // Balanced +-1 design, independent of treatment: cross-information is small.
  Eigen::MatrixXd x(400, 2);
  std::vector<int> t(400), y(400);
  oracle::Gen g(1);
  for (int i = 0; i < 400; ++i) {
    x(i, 0) = (i % 2) ? 1 : -1;
    x(i, 1) = ((i / 2) % 2) ? 1 : -1;
    t[i] = (i / 4) % 2;
    y[i] = g.coin(0.4);
  }
  y[0] = 1;
  y[1] = 0;
  const UpliftDataset ds(x, t, y, {"a", "b"});
  const auto fit = fit_mle(ds);
  const auto cov = coefficient_covariance(fit.coefficients, ds);
  const Eigen::MatrixXd H = -oracle::finite_difference_hessian(ds, fit.coefficients.flat());
  const Eigen::MatrixXd inv = H.inverse();
  for (std::size_t j : {1u, 2u})
    EXPECT_NEAR(cov.at(j, j), inv(j, j), 1e-4 * inv(j, j));
  EXPECT_LT(std::abs(cov.at(1, 2)), 0.2 * std::sqrt(cov.at(1, 1) * cov.at(2, 2)));
}

TEST(OddsRatio, TableFixtures) {
  auto c = UpliftCoefficients::zero(2);
  c.main[1] = std::log(0.35);
  c.interact[1] = std::log(1.276) - std::log(0.35);
  EXPECT_NEAR(odds_ratio(c, 1, 0), 0.350, 1e-12);
  EXPECT_NEAR(odds_ratio(c, 1, 1), 1.276, 1e-12);
  EXPECT_NEAR(odds_ratio(c, 1, 1) / odds_ratio(c, 1, 0), std::exp(c.interact[1]), 1e-12);
  EXPECT_EQ(odds_ratio(c, 0, 0), odds_ratio(c, 0, 1));
  EXPECT_NEAR(group_odds_ratio(c, 1, 1, 0.87, 0.41), 1.12, 0.005);
  EXPECT_NEAR(group_odds_ratio(c, 1, 0, 0.87, 0.41), 0.62, 0.005);
  EXPECT_EQ(group_odds_ratio(c, 1, 1, 0.3, 0.3), 1.0);
}
