#pragma once

#include <cstddef>
#include <vector>

#include "qiniup/dataset.hpp"
#include "qiniup/random.hpp"
#include "qiniup/tree.hpp"

namespace qiniup {

/// Dataset with the generating probabilities of every row attached.
struct SyntheticSample {
  UpliftDataset data;
  std::vector<double> p1;
  std::vector<double> p0;
  std::vector<double> true_uplift;
};

/// Bootstrap resample of `base` (treatment kept) with outcomes redrawn:
/// y1 ~ Bernoulli(p1(x)), y0 ~ Bernoulli(p0(x)), observed y = y_t.
SyntheticSample generate_synthetic(const SyntheticTruth& truth, const UpliftDataset& base,
                                   RandomSeed seed);

/// Synthetic stand-in for a real customer base: standard normal continuous
/// features, Bernoulli dummies, randomized treatment and a logistic outcome
/// whose treatment effect varies with a few of the features.
struct BasePopulationConfig {
  std::size_t n = 5000;
  std::size_t continuous = 10;
  std::size_t binary = 10;
  double treated_fraction = 0.5;
  double intercept = -0.4;
  double treat = 0.1;
  /// Scale of the random main effects.
  double main_scale = 0.4;
  /// Interaction size on the first `interacting` features (alternating sign).
  double interact_scale = 0.5;
  std::size_t interacting = 4;
  RandomSeed seed{1};
};

UpliftDataset generate_base_population(const BasePopulationConfig& cfg);

}  // namespace qiniup
