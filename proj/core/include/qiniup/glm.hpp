#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qiniup/dataset.hpp"

namespace qiniup {

struct FitDiagnostics {
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  double gradient_max_norm = 0.0;  // max |score| / n
  bool converged = false;
  bool separation = false;
  std::vector<std::string> warnings;
};

struct MleOptions {
  std::size_t max_iterations = 100;
  /// Convergence threshold on max |score_k| / n.
  double tolerance = 1e-6;
  /// A coefficient beyond this magnitude is treated as (quasi-)separation.
  double separation_bound = 30.0;
};

struct MleFit {
  UpliftCoefficients coefficients;
  FitDiagnostics diagnostics;
};

/// Log-likelihood of the interaction logistic model.
double log_likelihood(const UpliftCoefficients& c, const UpliftDataset& ds);

/// Gradient of the log-likelihood with respect to the flat coefficient vector.
Eigen::VectorXd score(const UpliftCoefficients& c, const UpliftDataset& ds);

/// Negative Hessian of the log-likelihood (flat layout, full size).
Eigen::MatrixXd observed_information(const UpliftCoefficients& c, const UpliftDataset& ds);

/// Unpenalized maximum likelihood by damped Newton with step halving.
/// With `support` (penalized indices 0..2p) only those coordinates and the
/// intercept are estimated; every other entry is exactly zero.
MleFit fit_mle(const UpliftDataset& ds,
               const std::optional<std::vector<std::size_t>>& support = std::nullopt,
               const MleOptions& options = {});

/// Inverse observed information restricted to the active coordinates
/// (intercept plus nonzero entries).
struct CoefficientCovariance {
  std::vector<std::size_t> flat_indices;
  Eigen::MatrixXd matrix;

  /// Covariance of two flat coordinates; zero when either is inactive.
  double at(std::size_t flat_a, std::size_t flat_b) const;
  bool active(std::size_t flat) const;
};

CoefficientCovariance coefficient_covariance(const UpliftCoefficients& c, const UpliftDataset& ds);

/// exp(main_j) * exp(interact_j * t).
double odds_ratio(const UpliftCoefficients& c, std::size_t j, int t);

/// odds_ratio(c, j, t) ^ (mean_a - mean_b).
double group_odds_ratio(const UpliftCoefficients& c, std::size_t j, int t, double mean_a,
                        double mean_b);

}  // namespace qiniup
