#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qiniup/dataset.hpp"
#include "qiniup/metrics.hpp"

namespace qiniup {

enum class MetricKind { kQini, kKendall, kAdjustedQini };

std::string_view metric_name(MetricKind kind);
/// Accepts "qini", "kendall", "adjusted_qini" (also "q", "rho", "qadj").
MetricKind parse_metric(std::string_view name);

double metric_value(const MetricScores& scores, MetricKind kind);

/// One evaluated candidate, kept only when logging is requested.
struct CandidateRecord {
  std::string origin;
  std::optional<double> value;  // empty when the metric could not be computed
};

struct SearchResult {
  UpliftCoefficients coefficients;
  double value = 0.0;
  /// Where the winner came from, e.g. "center 4" or "center 4 sample 17".
  std::string origin;
  std::size_t evaluations = 0;
  std::size_t skipped = 0;
  /// Best-so-far after every Nelder-Mead iteration (empty for LHS).
  std::vector<double> trace;
  std::vector<std::string> warnings;
  std::optional<std::vector<CandidateRecord>> log;
};

/// Predicted uplift of `c` on every row of `ds`, scored with `eval`.
std::optional<MetricScores> score_coefficients(MetricEvaluator& eval, const UpliftCoefficients& c);

}  // namespace qiniup
