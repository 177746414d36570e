#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qiniup/glm.hpp"
#include "qiniup/lasso.hpp"
#include "qiniup/random.hpp"
#include "qiniup/search.hpp"

namespace qiniup {

enum class SelectionRule { kArgmax, kOneStandardError, kCvLoglik };

std::string_view rule_name(SelectionRule rule);

/// Per-lambda fold scores from cross-validation.
struct CvTable {
  std::string metric;
  std::size_t K = 0;
  std::vector<double> lambdas;
  std::vector<std::vector<double>> fold_values;  // [lambda][fold]
  std::vector<double> means;
  std::vector<double> standard_errors;  // sample SD / sqrt(K)
};

struct SelectionResult {
  SelectionRule rule = SelectionRule::kArgmax;
  std::size_t lambda_index = 0;
  double lambda = 0.0;
  /// Penalized indices (0..2p) of the first-stage nonzero entries.
  std::vector<std::size_t> support;
  /// Penalized solution at the chosen lambda.
  UpliftCoefficients first_stage;
  /// Unpenalized refit on `support`.
  UpliftCoefficients coefficients;
  FitDiagnostics refit_diagnostics;
  /// In-sample metric of every path solution (q_lasso_select only).
  std::vector<double> path_metric;
  std::vector<std::string> warnings;
  std::optional<CvTable> cv;
};

/// Evaluates the metric of every path solution on `ds`, picks the maximum
/// (ties toward the larger lambda) and refits its support by maximum likelihood.
SelectionResult q_lasso_select(const LassoPath& path, const UpliftDataset& ds, std::size_t J,
                               MetricKind metric = MetricKind::kAdjustedQini,
                               unsigned threads = 1);

/// Fold id (0..K-1) of every row. Rows are grouped by (treatment, outcome),
/// shuffled within each group and dealt round-robin, so every fold's count
/// in each group is within one of the proportional share.
std::vector<std::size_t> stratified_folds(const UpliftDataset& ds, std::size_t K, RandomSeed seed);

struct CvOptions {
  std::size_t K = 5;
  std::size_t J = 10;
  RandomSeed seed{};
  unsigned threads = 1;
  PathOptions path{};
};

/// K-fold selection on a lambda sequence computed once from the full data.
/// The rule is kArgmax or kOneStandardError.
SelectionResult cross_validated_select(const UpliftDataset& ds, MetricKind metric,
                                       SelectionRule rule, const CvOptions& options = {});

/// As cross_validated_select with held-out mean log-likelihood and the argmax rule.
SelectionResult loglik_cv_select(const UpliftDataset& ds, const CvOptions& options = {});

/// 1-based position of `target` when the lambdas are sorted by decreasing
/// metric, ties toward the larger lambda (smaller index).
std::size_t rank_of_lambda(const std::vector<double>& metric_values, std::size_t target);

}  // namespace qiniup
