#include "qiniup/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "qiniup/glm.hpp"
#include "qiniup/metrics.hpp"
#include "qiniup/model.hpp"
#include "qiniup/parallel.hpp"
#include "qiniup/select.hpp"
#include "qiniup/synthetic.hpp"

namespace qiniup {
namespace {

constexpr std::array<std::string_view, kEstimatorCount> kNames = {
    "Baseline", "Q+lasso", "Q+LHS_q", "Q+LHS_rho", "Q+LHS_qadj", "Base+NM", "Q+NM", "RF-truth"};

constexpr std::array<std::string_view, 5> kMetrics = {"qini", "kendall", "adjusted_qini", "rmse",
                                                      "rrmse"};

std::size_t slot(Estimator e) { return static_cast<std::size_t>(e); }

bool wants(const std::vector<Estimator>& list, Estimator e) {
  return std::find(list.begin(), list.end(), e) != list.end();
}

template <class... E>
bool wants_any(const std::vector<Estimator>& list, E... e) {
  return (wants(list, e) || ...);
}

EstimatorScores score(const UpliftDataset& data, std::size_t J, const std::vector<double>& pred,
                      const std::vector<double>& truth) {
  const MetricScores s = MetricEvaluator(data, J).scores(pred);
  EstimatorScores out;
  out.qini = s.qini;
  out.kendall = s.kendall;
  out.adjusted_qini = s.adjusted_qini;
  out.rmse = uplift_rmse(truth, pred);
  return out;
}

std::vector<double> uplift_of(const UpliftCoefficients& c, const UpliftDataset& data) {
  const Eigen::VectorXd u = predict_uplifts(c, data.features());
  return {u.data(), u.data() + u.size()};
}

void run_replication(const UpliftDataset& base, const ScenarioConfig& cfg,
                     const std::vector<Estimator>& estimators, ReplicationRecord& rec) {
  const RandomSeed seed = cfg.seed.derive("replication", rec.index);

  Rng sub_rng = make_rng(seed.derive("subsample"));
  const UpliftDataset sub = base.rows(stratified_subsample(base, cfg.n_sample, sub_rng));

  TreeOptions tree;
  tree.depth = cfg.depth;
  tree.min_node = cfg.min_node;
  const SyntheticTruth truth = build_truth(sub, tree, cfg.trees, seed.derive("truth"));
  const SyntheticSample synth = generate_synthetic(truth, sub, seed.derive("synthetic"));

  Rng feat_rng = make_rng(seed.derive("features"));
  auto perm = permutation(base.p(), feat_rng);
  rec.features.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cfg.k));
  std::sort(rec.features.begin(), rec.features.end());
  const UpliftDataset data = synth.data.columns(rec.features);
  const auto& u = synth.true_uplift;

  auto put = [&](Estimator e, const std::vector<double>& pred) {
    if (wants(estimators, e)) rec.scores[slot(e)] = score(data, cfg.J, pred, u);
  };

  const MleFit baseline = fit_mle(data);
  const auto base_pred = uplift_of(baseline.coefficients, data);
  const double base_rmse = uplift_rmse(u, base_pred);
  put(Estimator::kBaseline, base_pred);

  if (wants_any(estimators, Estimator::kQLasso, Estimator::kQLhsQini, Estimator::kQLhsKendall,
                Estimator::kQLhsAdjusted, Estimator::kQNm) ||
      cfg.loglik_cv) {
    const double eps = cfg.path.eps.value_or(default_lambda_eps(data.n(), data.p()));
    const auto lambdas = lambda_sequence(data, cfg.path.length, eps);
    const LassoPath path = fit_lasso_path(data, lambdas, cfg.path);
    const SelectionResult q = q_lasso_select(path, data, cfg.J);
    rec.chosen_lambda_index = q.lambda_index;
    rec.first_stage_adjusted_qini = q.path_metric[q.lambda_index];
    put(Estimator::kQLasso, uplift_of(q.coefficients, data));

    if (wants_any(estimators, Estimator::kQLhsQini, Estimator::kQLhsKendall,
                  Estimator::kQLhsAdjusted)) {
      LhsConfig lhs = cfg.lhs;
      lhs.seed = seed.derive("lhs");
      const auto found = lhs_search_all(path, data, cfg.J, lhs);
      put(Estimator::kQLhsQini, uplift_of(found[0].coefficients, data));
      put(Estimator::kQLhsKendall, uplift_of(found[1].coefficients, data));
      put(Estimator::kQLhsAdjusted, uplift_of(found[2].coefficients, data));
    }
    if (wants(estimators, Estimator::kQNm)) {
      const SearchResult nm = nelder_mead_search(q.first_stage, data, MetricKind::kAdjustedQini,
                                                 cfg.J, cfg.nelder_mead);
      put(Estimator::kQNm, uplift_of(nm.coefficients, data));
    }
    if (cfg.loglik_cv) {
      CvOptions cv;
      cv.K = cfg.cv_folds;
      cv.J = cfg.J;
      cv.seed = seed.derive("cv");
      cv.path = cfg.path;
      const SelectionResult tilde = loglik_cv_select(data, cv);
      rec.loglik_cv_rank = rank_of_lambda(q.path_metric, tilde.lambda_index);
    }
  }
  if (wants(estimators, Estimator::kBaseNm)) {
    const SearchResult nm = nelder_mead_search(baseline.coefficients, data,
                                               MetricKind::kAdjustedQini, cfg.J, cfg.nelder_mead);
    put(Estimator::kBaseNm, uplift_of(nm.coefficients, data));
  }
  put(Estimator::kRfTruth, u);

  for (auto& s : rec.scores)
    if (s) s->rrmse = relative_rmse(s->rmse, base_rmse);
  rec.ok = true;
}

}  // namespace

std::string_view estimator_name(Estimator e) { return kNames[slot(e)]; }

Estimator parse_estimator(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<Estimator>(i);
  throw ValidationError("unknown estimator '" + std::string(name) + "'");
}

std::vector<Estimator> all_estimators() {
  std::vector<Estimator> out;
  for (std::size_t i = 0; i < kEstimatorCount; ++i) out.push_back(static_cast<Estimator>(i));
  return out;
}

void ScenarioConfig::validate(std::size_t p) const {
  if (k < 1 || k > p)
    throw ValidationError("k must lie in [1, " + std::to_string(p) + "], got " + std::to_string(k));
  if (replications == 0) throw ValidationError("need at least one replication");
  if (n_sample < 2) throw ValidationError("sample size must be at least 2");
  if (trees == 0) throw ValidationError("ensemble needs at least one tree");
  if (J == 0) throw ValidationError("bin count J must be positive");
  lhs.validate();
}

std::vector<std::size_t> stratified_subsample(const UpliftDataset& ds, std::size_t m, Rng& rng) {
  if (m > ds.n())
    throw ValidationError("sample size " + std::to_string(m) + " exceeds population size " +
                          std::to_string(ds.n()));
  std::vector<std::size_t> cells[4];
  for (std::size_t i = 0; i < ds.n(); ++i)
    cells[2 * ds.treatment()[i] + ds.outcome()[i]].push_back(i);

  std::size_t quota[4];
  double remainder[4];
  std::size_t assigned = 0;
  for (int c = 0; c < 4; ++c) {
    const double exact = static_cast<double>(m) * static_cast<double>(cells[c].size()) /
                         static_cast<double>(ds.n());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  while (assigned < m) {
    int best = -1;
    for (int c = 0; c < 4; ++c)
      if (quota[c] < cells[c].size() && (best < 0 || remainder[c] > remainder[best])) best = c;
    ++quota[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  std::vector<std::size_t> out;
  out.reserve(m);
  for (int c = 0; c < 4; ++c) {
    shuffle(cells[c], rng);
    out.insert(out.end(), cells[c].begin(), cells[c].begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ReplicationRecord>& reps,
                                  const std::vector<Estimator>& estimators) {
  std::vector<SummaryRow> rows;
  for (Estimator e : estimators) {
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
      std::vector<double> v;
      for (const auto& r : reps) {
        if (!r.ok || !r.scores[slot(e)]) continue;
        const auto& s = *r.scores[slot(e)];
        const double vals[] = {s.qini, s.kendall, s.adjusted_qini, s.rmse, s.rrmse};
        v.push_back(vals[m]);
      }
      SummaryRow row;
      row.estimator = std::string(estimator_name(e));
      row.metric = std::string(kMetrics[m]);
      row.M = v.size();
      if (!v.empty()) {
        double sum = 0.0;
        for (double x : v) sum += x;
        row.mean = sum / static_cast<double>(v.size());
        if (v.size() > 1) {
          double ss = 0.0;
          for (double x : v) ss += (x - row.mean) * (x - row.mean);
          row.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) /
                   std::sqrt(static_cast<double>(v.size()));
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

SimulationResult run_simulation(const UpliftDataset& base, const ScenarioConfig& cfg,
                                const std::vector<Estimator>& estimators) {
  cfg.validate(base.p());
  if (estimators.empty()) throw ValidationError("no estimators requested");

  SimulationResult result;
  result.estimators = estimators;
  result.replications.resize(cfg.replications);
  parallel_for(cfg.replications, resolve_threads(cfg.threads), [&](unsigned, std::size_t r) {
    ReplicationRecord& rec = result.replications[r];
    rec.index = r;
    try {
      run_replication(base, cfg, estimators, rec);
    } catch (const Error& e) {
      rec = ReplicationRecord{};
      rec.index = r;
      rec.error = e.what();
    }
  });
  for (const auto& r : result.replications) result.failures += r.ok ? 0 : 1;
  result.summary = summarize(result.replications, estimators);
  return result;
}

}  // namespace qiniup
