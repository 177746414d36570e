#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qiniup/dataset.hpp"
#include "qiniup/random.hpp"

namespace qiniup {

struct TreeOptions {
  std::size_t depth = 2;
  /// Minimum treated and minimum control count in each child of a split.
  std::size_t min_node = 30;
  /// Cap on split thresholds tried per feature (quantile-spaced midpoints).
  std::size_t max_thresholds = 32;
};

/// Axis-aligned binary tree whose leaves hold the within-leaf response
/// rates of each arm. Rows with x[feature] <= threshold go left.
class UpliftTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double p1 = 0.0;  // treated response rate
    double p0 = 0.0;  // control response rate
    std::size_t n_treat = 0;
    std::size_t n_control = 0;
  };

  UpliftTree() = default;
  explicit UpliftTree(std::vector<Node> nodes);

  /// (p1, p0) of the leaf containing x.
  std::pair<double, double> predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::size_t leaf_index(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<Node> nodes_;
};

/// Greedy recursive partition maximizing the KL-divergence gain between the
/// treated and control outcome distributions. A node becomes a leaf at the
/// depth limit, when no split leaves min_node rows per arm in both children,
/// or when no split has positive gain.
UpliftTree fit_uplift_tree(const UpliftDataset& ds, const TreeOptions& options = {});

/// KL(Bernoulli(q1) || Bernoulli(q0)) with Laplace-smoothed rates (y+1)/(n+2).
double smoothed_kl(std::size_t y1, std::size_t n1, std::size_t y0, std::size_t n0);

/// Bagged ensemble of uplift trees; p1 and p0 are averages over trees.
class SyntheticTruth {
 public:
  SyntheticTruth() = default;
  SyntheticTruth(std::vector<UpliftTree> trees, std::size_t p);

  double p1(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double p0(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::pair<double, double> probabilities(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double uplift(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// True uplift for every row of a feature matrix.
  std::vector<double> uplifts(const Eigen::MatrixXd& features) const;

  const std::vector<UpliftTree>& trees() const { return trees_; }
  std::size_t p() const { return p_; }

 private:
  std::vector<UpliftTree> trees_;
  std::size_t p_ = 0;
};

/// B trees, each fitted to a bootstrap resample drawn within each arm so both
/// arms keep their sizes.
SyntheticTruth build_truth(const UpliftDataset& ds, const TreeOptions& options, std::size_t B,
                           RandomSeed seed);

}  // namespace qiniup
