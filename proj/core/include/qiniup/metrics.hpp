#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qiniup/dataset.hpp"

namespace qiniup {

/// One bin of observations sharing a predicted-uplift quantile.
struct Bin {
  std::size_t n = 0;
  std::size_t n_treat = 0;
  std::size_t n_control = 0;
  double pred_uplift = 0.0;  // mean predicted uplift
  double pred_max = 0.0;     // largest prediction in the bin
  double pred_min = 0.0;     // smallest prediction in the bin
  double obs_uplift = 0.0;   // treated response rate minus control response rate
};

/// J contiguous bins of the observations sorted by predicted uplift
/// (descending, ties by original index). Bin k ends at ceil(k*n/J).
struct BinTable {
  std::vector<Bin> bins;
  std::size_t J() const { return bins.size(); }
};

/// Relative incremental uplift g(phi) on the grid phi_j = (j-1)/J.
struct QiniCurve {
  std::vector<double> grid;
  std::vector<double> values;
  double overall() const { return values.back(); }
};

struct MetricScores {
  double qini = 0.0;
  double kendall = 0.0;
  double adjusted_qini = 0.0;
};

struct EvaluationReport {
  MetricScores scores;
  BinTable bins;
  QiniCurve curve;
};

/// Treated response rate minus control response rate over the whole sample.
double overall_uplift(const UpliftDataset& ds);

/// Indices sorted by prediction descending; ties keep original order.
std::vector<std::size_t> uplift_order(std::span<const double> pred);

/// h(phi): incremental uplift among the top ceil(phi*n) predictions.
/// Throws ValidationError when that set has no control observation.
double incremental_uplift(const UpliftDataset& ds, std::span<const double> pred, double phi);

BinTable bin_table(const UpliftDataset& ds, std::span<const double> pred, std::size_t J);
QiniCurve qini_curve(const UpliftDataset& ds, std::span<const double> pred, std::size_t J);

/// Trapezoid-rule area between the curve and the line phi * g(1).
double qini_coefficient(const QiniCurve& curve);

/// Pairwise-sign agreement between predicted and observed per-bin uplift.
double kendall_uplift_correlation(const BinTable& bins);
double kendall_uplift_correlation(std::span<const double> pred_means,
                                  std::span<const double> obs_uplifts);

/// rho * max(0, q).
double adjusted_qini(double q_hat, double rho);

double uplift_rmse(std::span<const double> true_uplift, std::span<const double> pred_uplift);
double relative_rmse(double rmse_model, double rmse_baseline);

EvaluationReport evaluate(const UpliftDataset& ds, std::span<const double> pred, std::size_t J);

/// clamp(round(n^(1/6)), 2, 10).
std::size_t default_bins(std::size_t n);
/// Bin count when the user gave none: 10 for n >= 1000, else default_bins(n).
std::size_t resolve_bins(std::size_t n, std::optional<std::size_t> requested = std::nullopt);

/// Two-proportion uplift of a group of rows (treated rate - control rate).
struct GroupUplift {
  std::size_t n = 0;
  std::size_t n_treat = 0;
  std::size_t n_control = 0;
  double uplift = 0.0;
  double mean_pred = 0.0;
};

/// Uplift among the top (or bottom) ceil(fraction*n) rows by predicted uplift.
GroupUplift top_group_uplift(const UpliftDataset& ds, std::span<const double> pred,
                             double fraction, bool bottom = false);

/// Reusable evaluator for many prediction vectors against one dataset.
/// Holds a sort buffer; not thread-safe, use one per worker.
class MetricEvaluator {
 public:
  MetricEvaluator(const UpliftDataset& ds, std::size_t J);

  EvaluationReport report(std::span<const double> pred);
  MetricScores scores(std::span<const double> pred);
  /// Scores, or nullopt if some bin lacks an arm.
  std::optional<MetricScores> try_scores(std::span<const double> pred);

  std::size_t J() const { return J_; }
  const UpliftDataset& dataset() const { return ds_; }

 private:
  bool build(std::span<const double> pred, BinTable& bins, QiniCurve& curve, std::string* why);

  const UpliftDataset& ds_;
  std::size_t J_;
  std::vector<std::size_t> order_;
  std::vector<std::pair<double, std::size_t>> keyed_;
  BinTable bins_;
  QiniCurve curve_;
};

}  // namespace qiniup
