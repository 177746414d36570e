#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qiniup/dataset.hpp"
#include "qiniup/glm.hpp"
#include "qiniup/lasso.hpp"
#include "qiniup/metrics.hpp"
#include "qiniup/search.hpp"
#include "qiniup/select.hpp"
#include "qiniup/simulation.hpp"

namespace qiniup {

void write_curve_csv(std::ostream& out, const QiniCurve& curve);
void write_bins_csv(std::ostream& out, const BinTable& bins);

/// Curve points as circles, joined by a polyline, plus the diagonal phi*g(1).
std::string curve_svg(const QiniCurve& curve);
/// One rect of class "bar" per bin, height proportional to observed uplift.
std::string bins_svg(const BinTable& bins);

/// lambda, support_size, one column per flat coordinate.
void write_path_csv(std::ostream& out, const LassoPath& path,
                    const std::vector<std::string>& feature_names);
nlohmann::json path_to_json(const LassoPath& path, const std::vector<std::string>& feature_names);

/// lambda, mean, se, fold_1..fold_K.
void write_cv_csv(std::ostream& out, const CvTable& table);

nlohmann::json diagnostics_to_json(const FitDiagnostics& d);
nlohmann::json search_to_json(const SearchResult& r, const std::vector<std::string>& feature_names);
nlohmann::json selection_to_json(const SelectionResult& r,
                                 const std::vector<std::string>& feature_names);
nlohmann::json scores_to_json(const MetricScores& s);

/// {intercept, main, treat, interact, feature_names, meta}.
nlohmann::json model_to_json(const UpliftCoefficients& c,
                             const std::vector<std::string>& feature_names,
                             const nlohmann::json& meta = nlohmann::json::object());
/// Inverse of model_to_json; throws ValidationError on a malformed document.
std::pair<UpliftCoefficients, std::vector<std::string>> model_from_json(const nlohmann::json& j);

/// estimator, metric, mean, se, M.
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// One line per estimator with "mean (se)" per metric.
std::string summary_text_table(const std::vector<SummaryRow>& rows);

}  // namespace qiniup
