#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qiniup/dataset.hpp"
#include "qiniup/lasso.hpp"
#include "qiniup/lhs.hpp"
#include "qiniup/nelder_mead.hpp"
#include "qiniup/random.hpp"
#include "qiniup/tree.hpp"

namespace qiniup {

enum class Estimator {
  kBaseline,
  kQLasso,
  kQLhsQini,
  kQLhsKendall,
  kQLhsAdjusted,
  kBaseNm,
  kQNm,
  kRfTruth,
};

inline constexpr std::size_t kEstimatorCount = 8;

/// "Baseline", "Q+lasso", "Q+LHS_q", "Q+LHS_rho", "Q+LHS_qadj", "Base+NM", "Q+NM", "RF-truth".
std::string_view estimator_name(Estimator e);
Estimator parse_estimator(std::string_view name);
std::vector<Estimator> all_estimators();

struct ScenarioConfig {
  std::size_t depth = 2;
  std::size_t k = 10;
  std::size_t n_sample = 2000;
  std::size_t replications = 20;
  std::size_t J = 10;
  RandomSeed seed{1};
  /// Trees in the generating ensemble.
  std::size_t trees = 50;
  std::size_t min_node = 30;
  LhsConfig lhs{};
  PathOptions path{};
  NelderMeadOptions nelder_mead{};
  /// Also run log-likelihood cross-validation and rank its lambda.
  bool loglik_cv = false;
  std::size_t cv_folds = 5;
  unsigned threads = 1;

  void validate(std::size_t p) const;
};

struct EstimatorScores {
  double qini = 0.0;
  double kendall = 0.0;
  double adjusted_qini = 0.0;
  double rmse = 0.0;
  double rrmse = 0.0;
};

struct ReplicationRecord {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  std::vector<std::size_t> features;
  std::array<std::optional<EstimatorScores>, kEstimatorCount> scores;
  /// In-sample adjusted Qini of the penalized solution at the chosen lambda.
  std::optional<double> first_stage_adjusted_qini;
  std::optional<std::size_t> chosen_lambda_index;
  /// Rank of the log-likelihood CV lambda among the path's adjusted Qini values.
  std::optional<std::size_t> loglik_cv_rank;
};

struct SummaryRow {
  std::string estimator;
  std::string metric;
  double mean = 0.0;
  double se = 0.0;
  std::size_t M = 0;
};

struct SimulationResult {
  std::vector<Estimator> estimators;
  std::vector<ReplicationRecord> replications;
  std::vector<SummaryRow> summary;
  std::size_t failures = 0;
};

/// Runs the replication loop on a base population. Each replication draws a
/// (treatment, outcome)-stratified subsample without replacement, builds the
/// generating ensemble, draws synthetic outcomes, samples k features and
/// scores every requested estimator in-sample. Replications run in parallel;
/// results do not depend on the thread count.
SimulationResult run_simulation(const UpliftDataset& base, const ScenarioConfig& cfg,
                                const std::vector<Estimator>& estimators);

/// Indices of a subsample of size m drawn without replacement with each
/// (treatment, outcome) cell allocated proportionally (largest remainder).
std::vector<std::size_t> stratified_subsample(const UpliftDataset& ds, std::size_t m, Rng& rng);

/// Mean and standard error (sample SD / sqrt(M)) per (estimator, metric).
std::vector<SummaryRow> summarize(const std::vector<ReplicationRecord>& reps,
                                  const std::vector<Estimator>& estimators);

}  // namespace qiniup
