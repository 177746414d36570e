#include "qiniup/select.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "qiniup/parallel.hpp"

namespace qiniup {
namespace {

constexpr double kUnavailable = -std::numeric_limits<double>::infinity();

// Strict > scanning upward keeps the first (largest-lambda) maximum.
std::size_t first_argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (v[j] > v[best]) best = j;
  return best;
}

void refit(SelectionResult& r, const UpliftDataset& ds) {
  r.support = r.first_stage.support();
  MleFit fit = fit_mle(ds, r.support);
  r.coefficients = std::move(fit.coefficients);
  r.refit_diagnostics = std::move(fit.diagnostics);
  for (const auto& w : r.refit_diagnostics.warnings) r.warnings.push_back("refit: " + w);
}

// Held-out score of one solution; J shrinks until every bin has both arms.
double holdout_score(const UpliftDataset& test, const UpliftCoefficients& c,
                     std::optional<MetricKind> metric, std::size_t J, std::size_t& used_J) {
  if (!metric) {
    used_J = 0;
    return log_likelihood(c, test) / static_cast<double>(test.n());
  }
  for (std::size_t j = std::min(J, test.n()); j >= 2; --j) {
    MetricEvaluator eval(test, j);
    if (const auto s = score_coefficients(eval, c)) {
      used_J = j;
      return metric_value(*s, *metric);
    }
  }
  throw ValidationError("held-out fold cannot form 2 bins with both arms; use fewer folds (smaller K)");
}

SelectionResult cv_select(const UpliftDataset& ds, std::optional<MetricKind> metric,
                          SelectionRule rule, const CvOptions& options) {
  const std::size_t K = options.K;
  const auto folds = stratified_folds(ds, K, options.seed.derive("cv-folds"));
  const double eps = options.path.eps.value_or(default_lambda_eps(ds.n(), ds.p()));
  const auto lambdas = lambda_sequence(ds, options.path.length, eps);
  const std::size_t m = lambdas.size();

  std::vector<std::vector<double>> per_fold(K);
  std::vector<std::vector<std::string>> fold_warnings(K);
  parallel_for(K, resolve_threads(options.threads), [&](unsigned, std::size_t k) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < ds.n(); ++i) (folds[i] == k ? test : train).push_back(i);
    std::optional<UpliftDataset> tr, te;
    try {
      tr.emplace(ds.rows(train));
      te.emplace(ds.rows(test));
    } catch (const ValidationError& e) {
      throw ValidationError("fold " + std::to_string(k + 1) + " of " + std::to_string(K) +
                            " is degenerate (" + e.what() + "); use fewer folds");
    }
    LassoPath path;
    try {
      path = fit_lasso_path(*tr, lambdas, options.path);
    } catch (const ValidationError& e) {
      throw ValidationError("fold " + std::to_string(k + 1) + " training part: " + e.what());
    }
    per_fold[k].resize(m);
    std::size_t smallest_J = options.J;
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t used = 0;
      per_fold[k][j] = holdout_score(*te, path.coefficients[j], metric, options.J, used);
      if (metric) smallest_J = std::min(smallest_J, used);
    }
    if (metric && smallest_J < options.J)
      fold_warnings[k].push_back("fold " + std::to_string(k + 1) + ": bins reduced to J=" +
                                 std::to_string(smallest_J) + " for some lambdas");
  });

  CvTable table;
  table.metric = metric ? std::string(metric_name(*metric)) : "loglik";
  table.K = K;
  table.lambdas = lambdas;
  table.fold_values.assign(m, std::vector<double>(K));
  table.means.resize(m);
  table.standard_errors.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      table.fold_values[j][k] = per_fold[k][j];
      sum += per_fold[k][j];
    }
    const double mean = sum / static_cast<double>(K);
    double ss = 0.0;
    for (std::size_t k = 0; k < K; ++k) ss += (per_fold[k][j] - mean) * (per_fold[k][j] - mean);
    table.means[j] = mean;
    table.standard_errors[j] = std::sqrt(ss / static_cast<double>(K - 1)) / std::sqrt(static_cast<double>(K));
  }

  SelectionResult r;
  r.rule = rule;
  const std::size_t best = first_argmax(table.means);
  r.lambda_index = best;
  if (rule == SelectionRule::kOneStandardError) {
    const double floor = table.means[best] - table.standard_errors[best];
    for (std::size_t j = 0; j <= best; ++j)
      if (table.means[j] >= floor) {
        r.lambda_index = j;
        break;
      }
  }
  r.lambda = lambdas[r.lambda_index];
  for (auto& w : fold_warnings)
    for (auto& s : w) r.warnings.push_back(std::move(s));

  const LassoPath full = fit_lasso_path(ds, lambdas, options.path);
  r.first_stage = full.coefficients[r.lambda_index];
  refit(r, ds);
  r.cv = std::move(table);
  return r;
}

}  // namespace

std::string_view rule_name(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::kArgmax:
      return "ARGMAX";
    case SelectionRule::kOneStandardError:
      return "OSE";
    case SelectionRule::kCvLoglik:
      return "CV_LOGLIK";
  }
  return "UNKNOWN";
}

SelectionResult q_lasso_select(const LassoPath& path, const UpliftDataset& ds, std::size_t J,
                               MetricKind metric, unsigned threads) {
  if (path.size() == 0) throw ValidationError("selection needs a nonempty path");
  const unsigned workers = resolve_threads(threads);
  std::vector<std::unique_ptr<MetricEvaluator>> evals;
  for (unsigned w = 0; w < workers; ++w) evals.push_back(std::make_unique<MetricEvaluator>(ds, J));

  SelectionResult r;
  r.rule = SelectionRule::kArgmax;
  r.path_metric.assign(path.size(), kUnavailable);
  parallel_for(path.size(), workers, [&](unsigned w, std::size_t j) {
    if (const auto s = score_coefficients(*evals[w], path.coefficients[j]))
      r.path_metric[j] = metric_value(*s, metric);
  });

  std::size_t failed = 0;
  bool all_zero = true;
  for (double v : r.path_metric) {
    if (v == kUnavailable) ++failed;
    else if (v != 0.0) all_zero = false;
  }
  if (failed == path.size())
    throw ValidationError("no path solution could be scored: some bin lacks an arm; use fewer "
                          "bins (smaller J)");
  if (failed > 0)
    r.warnings.push_back(std::to_string(failed) +
                         " path solutions skipped: some bin lacked a treated or control observation");

  if (all_zero) {
    r.lambda_index = 0;
    while (r.path_metric[r.lambda_index] == kUnavailable) ++r.lambda_index;
    r.warnings.push_back("metric is zero for every lambda; choosing the largest lambda");
  } else {
    r.lambda_index = first_argmax(r.path_metric);
  }
  r.lambda = path.lambdas[r.lambda_index];
  r.first_stage = path.coefficients[r.lambda_index];
  refit(r, ds);
  return r;
}

std::vector<std::size_t> stratified_folds(const UpliftDataset& ds, std::size_t K, RandomSeed seed) {
  if (K < 2) throw ValidationError("cross-validation needs K >= 2 folds");
  if (K > ds.n()) throw ValidationError("more folds than observations");
  std::vector<std::size_t> cells[4];
  for (std::size_t i = 0; i < ds.n(); ++i)
    cells[2 * ds.treatment()[i] + ds.outcome()[i]].push_back(i);

  Rng rng = make_rng(seed);
  std::vector<std::size_t> fold(ds.n());
  std::size_t offset = 0;
  for (auto& cell : cells) {
    shuffle(cell, rng);
    for (std::size_t r = 0; r < cell.size(); ++r) fold[cell[r]] = (offset + r) % K;
    offset += cell.size();
  }

  std::vector<std::size_t> treated(K, 0), control(K, 0);
  for (std::size_t i = 0; i < ds.n(); ++i) (ds.treatment()[i] ? treated : control)[fold[i]]++;
  for (std::size_t k = 0; k < K; ++k)
    if (treated[k] == 0 || control[k] == 0)
      throw ValidationError("fold " + std::to_string(k + 1) + " of " + std::to_string(K) +
                            " has no " + (treated[k] == 0 ? "treated" : "control") +
                            " observation; use fewer folds (smaller K)");
  return fold;
}

SelectionResult cross_validated_select(const UpliftDataset& ds, MetricKind metric,
                                       SelectionRule rule, const CvOptions& options) {
  if (rule == SelectionRule::kCvLoglik)
    throw ValidationError("use loglik_cv_select for the log-likelihood rule");
  return cv_select(ds, metric, rule, options);
}

SelectionResult loglik_cv_select(const UpliftDataset& ds, const CvOptions& options) {
  SelectionResult r = cv_select(ds, std::nullopt, SelectionRule::kArgmax, options);
  r.rule = SelectionRule::kCvLoglik;
  return r;
}

std::size_t rank_of_lambda(const std::vector<double>& metric_values, std::size_t target) {
  if (target >= metric_values.size()) throw ValidationError("lambda index out of range");
  const double v = metric_values[target];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < metric_values.size(); ++j)
    if (metric_values[j] > v || (metric_values[j] == v && j < target)) ++rank;
  return rank;
}

}  // namespace qiniup
