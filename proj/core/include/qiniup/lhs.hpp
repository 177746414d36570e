#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "qiniup/lasso.hpp"
#include "qiniup/random.hpp"
#include "qiniup/search.hpp"

namespace qiniup {

struct LhsConfig {
  std::size_t samples = 100;     // L
  double radius_rel = 0.5;       // r
  double radius_floor = 0.1;     // s
  bool perturb_support_only = true;
  RandomSeed seed{};

  /// Throws ValidationError on L = 0, negative radii or r = s = 0.
  void validate() const;
};

/// L points in the box c_j +- max(r|c_j|, s). Each coordinate's range is cut
/// into L equal strata and every stratum holds exactly one point. The
/// intercept and treatment coordinates are always perturbed; with
/// perturb_support_only, zero main/interaction entries stay exactly zero.
std::vector<UpliftCoefficients> latin_hypercube(const UpliftCoefficients& center,
                                                const LhsConfig& cfg);

struct LhsOptions {
  unsigned threads = 1;
  bool keep_log = false;
};

/// Argmax of the metric over every path solution and the L samples drawn
/// around each one. Candidates are ordered (center index, sample index) with
/// the center itself first, and the first maximum in that order wins.
SearchResult lhs_search(const LassoPath& path, const UpliftDataset& ds, MetricKind metric,
                        std::size_t J, const LhsConfig& cfg, const LhsOptions& options = {});

/// Same candidate set scored once, one result per metric kind
/// (indexed by MetricKind).
std::array<SearchResult, 3> lhs_search_all(const LassoPath& path, const UpliftDataset& ds,
                                           std::size_t J, const LhsConfig& cfg,
                                           const LhsOptions& options = {});

}  // namespace qiniup
