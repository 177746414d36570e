#include "qiniup/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "qiniup/csv.hpp"

namespace qiniup {
namespace {

constexpr double kWidth = 480, kHeight = 320, kMargin = 40;

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Maps data coordinates onto the plotting area.
struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const {
    return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin);
  }
};

std::string svg_open() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) + "\" height=\"" +
         fixed(kHeight, 0) + "\" viewBox=\"0 0 " + fixed(kWidth, 0) + " " + fixed(kHeight, 0) +
         "\">\n";
}

std::pair<double, double> padded_range(double lo, double hi) {
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

nlohmann::json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

void write_curve_csv(std::ostream& out, const QiniCurve& curve) {
  out << "phi,g\n";
  for (std::size_t j = 0; j < curve.grid.size(); ++j)
    out << format_double(curve.grid[j]) << ',' << format_double(curve.values[j]) << '\n';
}

void write_bins_csv(std::ostream& out, const BinTable& bins) {
  out << "bin,n,pred_uplift,obs_uplift,n_treat,n_control\n";
  for (std::size_t k = 0; k < bins.J(); ++k) {
    const Bin& b = bins.bins[k];
    out << k + 1 << ',' << b.n << ',' << format_double(b.pred_uplift) << ','
        << format_double(b.obs_uplift) << ',' << b.n_treat << ',' << b.n_control << '\n';
  }
}

std::string curve_svg(const QiniCurve& curve) {
  const auto [lo, hi] = std::minmax_element(curve.values.begin(), curve.values.end());
  const auto [y0, y1] = padded_range(*lo, *hi);
  const Frame f{0.0, 1.0, y0, y1};
  std::ostringstream s;
  s << svg_open();
  s << "<line class=\"axis\" x1=\"" << fixed(f.px(0)) << "\" y1=\"" << fixed(f.py(0)) << "\" x2=\""
    << fixed(f.px(1)) << "\" y2=\"" << fixed(f.py(0)) << "\" stroke=\"#888\"/>\n";
  s << "<line class=\"diagonal\" x1=\"" << fixed(f.px(0)) << "\" y1=\"" << fixed(f.py(0))
    << "\" x2=\"" << fixed(f.px(1)) << "\" y2=\"" << fixed(f.py(curve.overall()))
    << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  s << "<polyline class=\"curve\" fill=\"none\" stroke=\"#1f5fa8\" points=\"";
  for (std::size_t j = 0; j < curve.grid.size(); ++j)
    s << (j ? " " : "") << fixed(f.px(curve.grid[j])) << ',' << fixed(f.py(curve.values[j]));
  s << "\"/>\n";
  for (std::size_t j = 0; j < curve.grid.size(); ++j)
    s << "<circle cx=\"" << fixed(f.px(curve.grid[j])) << "\" cy=\"" << fixed(f.py(curve.values[j]))
      << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
  s << "<text x=\"" << fixed(kWidth / 2, 0) << "\" y=\"" << fixed(kHeight - 8, 0)
    << "\" text-anchor=\"middle\" font-size=\"12\">fraction targeted</text>\n";
  s << "</svg>\n";
  return s.str();
}

std::string bins_svg(const BinTable& bins) {
  double lo = 0.0, hi = 0.0;
  for (const auto& b : bins.bins) {
    lo = std::min(lo, b.obs_uplift);
    hi = std::max(hi, b.obs_uplift);
  }
  const auto [y0, y1] = padded_range(lo, hi);
  const double J = static_cast<double>(std::max<std::size_t>(bins.J(), 1));
  const Frame f{0.0, J, y0, y1};
  std::ostringstream s;
  s << svg_open();
  s << "<line class=\"axis\" x1=\"" << fixed(f.px(0)) << "\" y1=\"" << fixed(f.py(0)) << "\" x2=\""
    << fixed(f.px(J)) << "\" y2=\"" << fixed(f.py(0)) << "\" stroke=\"#888\"/>\n";
  for (std::size_t k = 0; k < bins.J(); ++k) {
    const double v = bins.bins[k].obs_uplift;
    const double top = f.py(std::max(v, 0.0));
    const double height = std::abs(f.py(v) - f.py(0));
    const double left = f.px(static_cast<double>(k) + 0.1);
    const double width = f.px(static_cast<double>(k) + 0.9) - left;
    s << "<rect class=\"bar\" x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\""
      << fixed(width) << "\" height=\"" << fixed(height) << "\" fill=\""
      << (v >= 0 ? "#1f5fa8" : "#b8412c") << "\"/>\n";
  }
  s << "<text x=\"" << fixed(kWidth / 2, 0) << "\" y=\"" << fixed(kHeight - 8, 0)
    << "\" text-anchor=\"middle\" font-size=\"12\">bin (highest predicted uplift first)</text>\n";
  s << "</svg>\n";
  return s.str();
}

void write_path_csv(std::ostream& out, const LassoPath& path,
                    const std::vector<std::string>& feature_names) {
  const std::size_t width = 2 * feature_names.size() + 2;
  out << "lambda,support_size";
  for (std::size_t k = 0; k < width; ++k) out << ',' << flat_coordinate_name(k, feature_names);
  out << '\n';
  for (std::size_t j = 0; j < path.size(); ++j) {
    out << format_double(path.lambdas[j]) << ',' << path.support_sizes[j];
    const Eigen::VectorXd flat = path.coefficients[j].flat();
    for (Eigen::Index k = 0; k < flat.size(); ++k) out << ',' << format_double(flat[k]);
    out << '\n';
  }
}

nlohmann::json path_to_json(const LassoPath& path, const std::vector<std::string>& feature_names) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t j = 0; j < path.size(); ++j) {
    steps.push_back({{"lambda", path.lambdas[j]},
                     {"support_size", path.support_sizes[j]},
                     {"coefficients", model_to_json(path.coefficients[j], feature_names)},
                     {"diagnostics", diagnostics_to_json(path.diagnostics[j])}});
  }
  return {{"feature_names", feature_names}, {"path", steps}};
}

void write_cv_csv(std::ostream& out, const CvTable& table) {
  out << "lambda,mean,se";
  for (std::size_t k = 0; k < table.K; ++k) out << ",fold_" << k + 1;
  out << '\n';
  for (std::size_t j = 0; j < table.lambdas.size(); ++j) {
    out << format_double(table.lambdas[j]) << ',' << format_double(table.means[j]) << ','
        << format_double(table.standard_errors[j]);
    for (double v : table.fold_values[j]) out << ',' << format_double(v);
    out << '\n';
  }
}

nlohmann::json diagnostics_to_json(const FitDiagnostics& d) {
  return {{"log_likelihood", d.log_likelihood},
          {"iterations", d.iterations},
          {"gradient_max_norm", d.gradient_max_norm},
          {"converged", d.converged},
          {"separation", d.separation},
          {"warnings", d.warnings}};
}

nlohmann::json scores_to_json(const MetricScores& s) {
  return {{"qini", s.qini}, {"kendall", s.kendall}, {"adjusted_qini", s.adjusted_qini}};
}

nlohmann::json search_to_json(const SearchResult& r, const std::vector<std::string>& feature_names) {
  nlohmann::json j = {{"coefficients", model_to_json(r.coefficients, feature_names)},
                      {"value", r.value},
                      {"origin", r.origin},
                      {"evaluations", r.evaluations},
                      {"skipped", r.skipped},
                      {"warnings", r.warnings}};
  if (!r.trace.empty()) j["trace"] = r.trace;
  if (r.log) {
    nlohmann::json log = nlohmann::json::array();
    for (const auto& c : *r.log)
      log.push_back({{"origin", c.origin},
                     {"value", c.value ? nlohmann::json(*c.value) : nlohmann::json(nullptr)}});
    j["log"] = std::move(log);
  }
  return j;
}

nlohmann::json selection_to_json(const SelectionResult& r,
                                 const std::vector<std::string>& feature_names) {
  nlohmann::json support = nlohmann::json::array();
  for (auto k : r.support) support.push_back(flat_coordinate_name(k + 1, feature_names));
  nlohmann::json j = {{"rule", std::string(rule_name(r.rule))},
                      {"lambda_index", r.lambda_index},
                      {"lambda", r.lambda},
                      {"support", support},
                      {"first_stage", model_to_json(r.first_stage, feature_names)},
                      {"coefficients", model_to_json(r.coefficients, feature_names)},
                      {"refit_diagnostics", diagnostics_to_json(r.refit_diagnostics)},
                      {"warnings", r.warnings}};
  if (!r.path_metric.empty()) {
    nlohmann::json m = nlohmann::json::array();
    for (double v : r.path_metric) m.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    j["path_metric"] = std::move(m);
  }
  return j;
}

nlohmann::json model_to_json(const UpliftCoefficients& c,
                             const std::vector<std::string>& feature_names,
                             const nlohmann::json& meta) {
  c.check_dimension(feature_names.size());
  return {{"intercept", c.intercept},      {"main", vec(c.main)},
          {"treat", c.treat},              {"interact", vec(c.interact)},
          {"feature_names", feature_names}, {"meta", meta}};
}

std::pair<UpliftCoefficients, std::vector<std::string>> model_from_json(const nlohmann::json& j) {
  try {
    UpliftCoefficients c;
    c.intercept = j.at("intercept").get<double>();
    c.treat = j.at("treat").get<double>();
    const auto main = j.at("main").get<std::vector<double>>();
    const auto interact = j.at("interact").get<std::vector<double>>();
    c.main = Eigen::Map<const Eigen::VectorXd>(main.data(), static_cast<Eigen::Index>(main.size()));
    c.interact =
        Eigen::Map<const Eigen::VectorXd>(interact.data(), static_cast<Eigen::Index>(interact.size()));
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    c.validate();
    c.check_dimension(names.size());
    return {std::move(c), std::move(names)};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model JSON: ") + e.what());
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "estimator,metric,mean,se,M\n";
  for (const auto& r : rows)
    out << r.estimator << ',' << r.metric << ',' << format_double(r.mean) << ','
        << format_double(r.se) << ',' << r.M << '\n';
}

std::string summary_text_table(const std::vector<SummaryRow>& rows) {
  std::vector<std::string> estimators, metrics;
  std::map<std::pair<std::string, std::string>, const SummaryRow*> cell;
  for (const auto& r : rows) {
    if (std::find(estimators.begin(), estimators.end(), r.estimator) == estimators.end())
      estimators.push_back(r.estimator);
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end())
      metrics.push_back(r.metric);
    cell[{r.estimator, r.metric}] = &r;
  }
  std::ostringstream s;
  s << std::left << std::setw(12) << "estimator";
  for (const auto& m : metrics) s << std::setw(20) << m;
  s << "M\n";
  for (const auto& e : estimators) {
    s << std::setw(12) << e;
    std::size_t M = 0;
    for (const auto& m : metrics) {
      const auto it = cell.find({e, m});
      if (it == cell.end()) {
        s << std::setw(20) << "-";
        continue;
      }
      s << std::setw(20) << (fixed(it->second->mean) + " (" + fixed(it->second->se) + ")");
      M = it->second->M;
    }
    s << M << '\n';
  }
  return s.str();
}

}  // namespace qiniup
