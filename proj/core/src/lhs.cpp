#include "qiniup/lhs.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "qiniup/parallel.hpp"

namespace qiniup {

void LhsConfig::validate() const {
  if (samples == 0) throw ValidationError("LHS needs at least one sample (L >= 1)");
  if (!(radius_rel >= 0.0) || !(radius_floor >= 0.0) || !std::isfinite(radius_rel) ||
      !std::isfinite(radius_floor))
    throw ValidationError("LHS radii must be finite and non-negative");
  if (radius_rel == 0.0 && radius_floor == 0.0)
    throw ValidationError("LHS box has zero width: radius_rel and radius_floor are both 0");
}

std::vector<UpliftCoefficients> latin_hypercube(const UpliftCoefficients& center,
                                                const LhsConfig& cfg) {
  cfg.validate();
  center.validate();
  const std::size_t p = center.p();
  const std::size_t L = cfg.samples;
  const Eigen::VectorXd c = center.flat();
  std::vector<Eigen::VectorXd> points(L, c);

  Rng rng = make_rng(cfg.seed);
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    const bool always = j == 0 || j == static_cast<Eigen::Index>(p) + 1;
    if (!always && cfg.perturb_support_only && c[j] == 0.0) continue;
    const double w = std::max(cfg.radius_rel * std::abs(c[j]), cfg.radius_floor);
    const auto strata = permutation(L, rng);
    for (std::size_t l = 0; l < L; ++l) {
      const double u = uniform01(rng);
      points[l][j] = c[j] - w + 2.0 * w * (static_cast<double>(strata[l]) + u) /
                                    static_cast<double>(L);
    }
  }

  std::vector<UpliftCoefficients> out;
  out.reserve(L);
  for (const auto& x : points) out.push_back(UpliftCoefficients::from_flat(x));
  return out;
}

namespace {

struct Candidates {
  std::vector<UpliftCoefficients> coeffs;
  std::vector<std::string> origins;
};

Candidates build_candidates(const LassoPath& path, const LhsConfig& cfg) {
  Candidates out;
  for (std::size_t c = 0; c < path.size(); ++c) {
    out.coeffs.push_back(path.coefficients[c]);
    out.origins.push_back("center " + std::to_string(c));
    LhsConfig local = cfg;
    local.seed = cfg.seed.derive("lhs", c);
    auto samples = latin_hypercube(path.coefficients[c], local);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      out.coeffs.push_back(std::move(samples[s]));
      out.origins.push_back("center " + std::to_string(c) + " sample " + std::to_string(s + 1));
    }
  }
  return out;
}

std::vector<std::optional<MetricScores>> score_all(const std::vector<UpliftCoefficients>& coeffs,
                                                   const UpliftDataset& ds, std::size_t J,
                                                   unsigned threads) {
  const unsigned workers = resolve_threads(threads);
  std::vector<std::unique_ptr<MetricEvaluator>> evals;
  for (unsigned w = 0; w < workers; ++w) evals.push_back(std::make_unique<MetricEvaluator>(ds, J));
  std::vector<std::optional<MetricScores>> scores(coeffs.size());
  parallel_for(coeffs.size(), workers, [&](unsigned w, std::size_t i) {
    scores[i] = score_coefficients(*evals[w], coeffs[i]);
  });
  return scores;
}

SearchResult reduce(const Candidates& cand, const std::vector<std::optional<MetricScores>>& scores,
                    MetricKind metric, bool keep_log) {
  SearchResult r;
  r.evaluations = scores.size();
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i]) {
      ++r.skipped;
      continue;
    }
    const double v = metric_value(*scores[i], metric);
    if (!best || v > r.value) {
      best = i;
      r.value = v;
    }
  }
  if (!best)
    throw ValidationError("no LHS candidate could be scored: every candidate leaves a bin "
                          "without one arm; use fewer bins (smaller J)");
  r.coefficients = cand.coeffs[*best];
  r.origin = cand.origins[*best];
  if (r.skipped > 0)
    r.warnings.push_back(std::to_string(r.skipped) +
                         " candidates skipped: some bin lacked a treated or control observation");
  if (keep_log) {
    r.log.emplace();
    for (std::size_t i = 0; i < scores.size(); ++i)
      r.log->push_back({cand.origins[i], scores[i] ? std::optional<double>(metric_value(
                                                         *scores[i], metric))
                                                   : std::nullopt});
  }
  return r;
}

void check_path(const LassoPath& path, const UpliftDataset& ds) {
  if (path.size() == 0) throw ValidationError("LHS search needs a nonempty path");
  for (const auto& c : path.coefficients) c.check_dimension(ds.p());
}

}  // namespace

SearchResult lhs_search(const LassoPath& path, const UpliftDataset& ds, MetricKind metric,
                        std::size_t J, const LhsConfig& cfg, const LhsOptions& options) {
  check_path(path, ds);
  cfg.validate();
  const Candidates cand = build_candidates(path, cfg);
  const auto scores = score_all(cand.coeffs, ds, J, options.threads);
  return reduce(cand, scores, metric, options.keep_log);
}

std::array<SearchResult, 3> lhs_search_all(const LassoPath& path, const UpliftDataset& ds,
                                           std::size_t J, const LhsConfig& cfg,
                                           const LhsOptions& options) {
  check_path(path, ds);
  cfg.validate();
  const Candidates cand = build_candidates(path, cfg);
  const auto scores = score_all(cand.coeffs, ds, J, options.threads);
  return {reduce(cand, scores, MetricKind::kQini, options.keep_log),
          reduce(cand, scores, MetricKind::kKendall, options.keep_log),
          reduce(cand, scores, MetricKind::kAdjustedQini, options.keep_log)};
}

}  // namespace qiniup
