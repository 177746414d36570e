#include "qiniup/search.hpp"

#include "qiniup/model.hpp"

namespace qiniup {

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kQini:
      return "qini";
    case MetricKind::kKendall:
      return "kendall";
    case MetricKind::kAdjustedQini:
      return "adjusted_qini";
  }
  return "unknown";
}

MetricKind parse_metric(std::string_view name) {
  if (name == "qini" || name == "q") return MetricKind::kQini;
  if (name == "kendall" || name == "rho") return MetricKind::kKendall;
  if (name == "adjusted_qini" || name == "qadj") return MetricKind::kAdjustedQini;
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

double metric_value(const MetricScores& scores, MetricKind kind) {
  switch (kind) {
    case MetricKind::kQini:
      return scores.qini;
    case MetricKind::kKendall:
      return scores.kendall;
    case MetricKind::kAdjustedQini:
      return scores.adjusted_qini;
  }
  return scores.adjusted_qini;
}

std::optional<MetricScores> score_coefficients(MetricEvaluator& eval, const UpliftCoefficients& c) {
  c.check_dimension(eval.dataset().p());
  const Eigen::VectorXd pred = predict_uplifts(c, eval.dataset().features());
  return eval.try_scores(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())));
}

}  // namespace qiniup
