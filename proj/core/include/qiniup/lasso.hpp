#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qiniup/dataset.hpp"
#include "qiniup/glm.hpp"

namespace qiniup {

/// Standardized copy of the penalized design columns (x, t, t*x), each
/// centred and scaled to unit population variance. Constant columns keep a
/// unit scale and are never allowed to enter the model.
class StandardizedDesign {
 public:
  explicit StandardizedDesign(const UpliftDataset& ds);

  std::size_t n() const { return static_cast<std::size_t>(columns_.rows()); }
  /// Number of penalized columns, 2p+1.
  std::size_t width() const { return static_cast<std::size_t>(columns_.cols()); }

  const Eigen::MatrixXd& columns() const { return columns_; }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& scales() const { return scales_; }
  bool penalizable(std::size_t k) const { return varying_[k]; }

  /// Map (intercept, standardized slopes) to original-scale coefficients and back.
  UpliftCoefficients to_original(double intercept, const Eigen::VectorXd& slopes) const;
  std::pair<double, Eigen::VectorXd> to_standardized(const UpliftCoefficients& c) const;

 private:
  Eigen::MatrixXd columns_;
  Eigen::VectorXd means_;
  Eigen::VectorXd scales_;
  std::vector<bool> varying_;
};

struct PathOptions {
  std::size_t length = 100;
  /// Ratio lambda_min / lambda_max; default depends on (n, p).
  std::optional<double> eps;
  double inner_tolerance = 1e-7;
  double outer_tolerance = 1e-6;
  std::size_t max_outer = 100;
  std::size_t max_sweeps = 100000;
  /// Keep the penalized objective after every outer iteration.
  bool record_trace = false;
};

/// Solutions along a decreasing sequence of penalty constants.
struct LassoPath {
  std::vector<double> lambdas;
  std::vector<UpliftCoefficients> coefficients;
  std::vector<std::size_t> support_sizes;
  std::vector<FitDiagnostics> diagnostics;
  std::vector<std::vector<double>> objective_traces;

  std::size_t size() const { return lambdas.size(); }
};

/// Smallest penalty that zeroes every penalized coefficient:
/// max_k |z_k'(y - ybar)| / n over standardized columns.
double lambda_max(const UpliftDataset& ds);

/// `length` log-spaced values from lambda_max down to eps * lambda_max.
std::vector<double> lambda_sequence(const UpliftDataset& ds, std::size_t length, double eps);

/// eps = 1e-2 when 2p+1 >= n, else 1e-4.
double default_lambda_eps(std::size_t n, std::size_t p);

/// Minimizes -loglik/n + lambda * sum|standardized slope| (intercept free)
/// for every lambda by iteratively reweighted least squares with cyclic
/// coordinate descent, warm-started along the path. Coefficients are
/// returned on the original feature scale.
LassoPath fit_lasso_path(const UpliftDataset& ds, std::span<const double> lambdas,
                         const PathOptions& options = {});

/// Convenience: lambda_sequence with options.length / options.eps, then fit.
LassoPath fit_lasso_path(const UpliftDataset& ds, const PathOptions& options = {});

/// -loglik/n + lambda * ||standardized slopes||_1.
double penalized_objective(const UpliftDataset& ds, const UpliftCoefficients& c, double lambda);

/// z_k'(y - p)/n for each standardized penalized column (the KKT score).
Eigen::VectorXd standardized_score(const UpliftDataset& ds, const UpliftCoefficients& c);

}  // namespace qiniup
