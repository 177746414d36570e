#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qiniup/search.hpp"

namespace qiniup {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double offset_rel = 0.05;
  double offset_floor = 0.01;
  std::size_t max_iterations = 500;
  /// Stop once best - worst vertex value falls below this.
  double spread_tolerance = 1e-8;
};

struct NelderMeadTrace {
  Eigen::VectorXd best;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

/// Maximizes f starting from x0. Non-finite values of f rank below every
/// finite value. Returns the best point ever evaluated.
NelderMeadTrace nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& x0,
                                     const NelderMeadOptions& options = {});

/// Simplex search on the metric over the intercept, the treatment effect and
/// the nonzero entries of `init`; every other coordinate stays zero.
SearchResult nelder_mead_search(const UpliftCoefficients& init, const UpliftDataset& ds,
                                MetricKind metric, std::size_t J,
                                const NelderMeadOptions& options = {});

}  // namespace qiniup
