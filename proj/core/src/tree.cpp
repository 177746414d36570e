#include "qiniup/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qiniup {
namespace {

struct Counts {
  std::size_t y1 = 0, n1 = 0, y0 = 0, n0 = 0;
  std::size_t n() const { return n1 + n0; }
};

Counts operator-(const Counts& a, const Counts& b) {
  return {a.y1 - b.y1, a.n1 - b.n1, a.y0 - b.y0, a.n0 - b.n0};
}

class Grower {
 public:
  Grower(const UpliftDataset& ds, const TreeOptions& opt) : ds_(ds), opt_(opt) {}

  int grow(std::vector<std::size_t> rows, std::size_t depth_left) {
    Counts c = count(rows);
    const int id = static_cast<int>(nodes_.size());
    UpliftTree::Node node;
    node.n_treat = c.n1;
    node.n_control = c.n0;
    node.p1 = c.n1 ? static_cast<double>(c.y1) / static_cast<double>(c.n1) : 0.0;
    node.p0 = c.n0 ? static_cast<double>(c.y0) / static_cast<double>(c.n0) : 0.0;
    nodes_.push_back(node);
    if (depth_left == 0) return id;

    const double parent = smoothed_kl(c.y1, c.n1, c.y0, c.n0);
    const std::size_t min_node = std::max<std::size_t>(opt_.min_node, 1);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::size_t> sorted = rows;
    for (std::size_t f = 0; f < ds_.p(); ++f) {
      const auto& x = ds_.features();
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
      // Prefix counts at the end of each run of equal values.
      std::vector<double> values;
      std::vector<Counts> prefix;
      Counts run;
      for (std::size_t r = 0; r < sorted.size(); ++r) {
        add(run, sorted[r]);
        const double v = x(sorted[r], f);
        if (r + 1 == sorted.size() || x(sorted[r + 1], f) != v) {
          values.push_back(v);
          prefix.push_back(run);
        }
      }
      if (values.size() < 2) continue;
      const std::size_t gaps = values.size() - 1;
      const std::size_t tries = std::min(gaps, std::max<std::size_t>(opt_.max_thresholds, 1));
      for (std::size_t q = 0; q < tries; ++q) {
        const std::size_t i = tries == gaps ? q : (2 * q + 1) * gaps / (2 * tries);
        const Counts left = prefix[i];
        const Counts right = c - left;
        if (left.n1 < min_node || left.n0 < min_node || right.n1 < min_node || right.n0 < min_node)
          continue;
        const double n = static_cast<double>(c.n());
        const double gain =
            static_cast<double>(left.n()) / n * smoothed_kl(left.y1, left.n1, left.y0, left.n0) +
            static_cast<double>(right.n()) / n * smoothed_kl(right.y1, right.n1, right.y0, right.n0) -
            parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double mid = 0.5 * (values[i] + values[i + 1]);
          if (!(mid < values[i + 1])) mid = values[i];
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows)
      (ds_.features()(r, best_feature) <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth_left - 1);
    const int r = grow(std::move(right), depth_left - 1);
    nodes_[id].feature = best_feature;
    nodes_[id].threshold = best_threshold;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<UpliftTree::Node> take() { return std::move(nodes_); }

 private:
  void add(Counts& c, std::size_t i) const {
    if (ds_.treatment()[i]) {
      ++c.n1;
      c.y1 += static_cast<std::size_t>(ds_.outcome()[i]);
    } else {
      ++c.n0;
      c.y0 += static_cast<std::size_t>(ds_.outcome()[i]);
    }
  }
  Counts count(const std::vector<std::size_t>& rows) const {
    Counts c;
    for (auto i : rows) add(c, i);
    return c;
  }

  const UpliftDataset& ds_;
  const TreeOptions& opt_;
  std::vector<UpliftTree::Node> nodes_;
};

}  // namespace

double smoothed_kl(std::size_t y1, std::size_t n1, std::size_t y0, std::size_t n0) {
  const double q1 = (static_cast<double>(y1) + 1.0) / (static_cast<double>(n1) + 2.0);
  const double q0 = (static_cast<double>(y0) + 1.0) / (static_cast<double>(n0) + 2.0);
  return q1 * std::log(q1 / q0) + (1.0 - q1) * std::log((1.0 - q1) / (1.0 - q0));
}

UpliftTree::UpliftTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ValidationError("tree needs at least one node");
}

std::size_t UpliftTree::leaf_index(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0)
    i = static_cast<std::size_t>(x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left
                                                                              : nodes_[i].right);
  return i;
}

std::pair<double, double> UpliftTree::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto& leaf = nodes_[leaf_index(x)];
  return {leaf.p1, leaf.p0};
}

std::size_t UpliftTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes_[i].feature >= 0) {
      d[nodes_[i].left] = d[i] + 1;
      d[nodes_[i].right] = d[i] + 1;
    }
  }
  return deepest;
}

std::size_t UpliftTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

UpliftTree fit_uplift_tree(const UpliftDataset& ds, const TreeOptions& options) {
  std::vector<std::size_t> rows(ds.n());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Grower g(ds, options);
  g.grow(std::move(rows), options.depth);
  return UpliftTree(g.take());
}

SyntheticTruth::SyntheticTruth(std::vector<UpliftTree> trees, std::size_t p)
    : trees_(std::move(trees)), p_(p) {
  if (trees_.empty()) throw ValidationError("ensemble needs at least one tree");
}

std::pair<double, double> SyntheticTruth::probabilities(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != p_)
    throw ValidationError("feature vector has " + std::to_string(x.size()) + " entries, expected " +
                          std::to_string(p_));
  double s1 = 0.0, s0 = 0.0;
  for (const auto& t : trees_) {
    const auto [a, b] = t.predict(x);
    s1 += a;
    s0 += b;
  }
  const double B = static_cast<double>(trees_.size());
  return {s1 / B, s0 / B};
}

double SyntheticTruth::p1(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return probabilities(x).first;
}

double SyntheticTruth::p0(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return probabilities(x).second;
}

double SyntheticTruth::uplift(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto [a, b] = probabilities(x);
  return a - b;
}

std::vector<double> SyntheticTruth::uplifts(const Eigen::MatrixXd& features) const {
  std::vector<double> u(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) u[i] = uplift(features.row(i).transpose());
  return u;
}

SyntheticTruth build_truth(const UpliftDataset& ds, const TreeOptions& options, std::size_t B,
                           RandomSeed seed) {
  if (B == 0) throw ValidationError("ensemble size B must be at least 1");
  std::vector<std::size_t> treated, control;
  for (std::size_t i = 0; i < ds.n(); ++i) (ds.treatment()[i] ? treated : control).push_back(i);

  std::vector<UpliftTree> trees;
  trees.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    Rng rng = make_rng(seed.derive("bootstrap", b));
    std::vector<std::size_t> rows;
    rows.reserve(ds.n());
    for (const auto* arm : {&treated, &control})
      for (std::size_t r = 0; r < arm->size(); ++r)
        rows.push_back((*arm)[uniform_index(rng, arm->size())]);
    trees.push_back(fit_uplift_tree(ds.rows(rows), options));
  }
  return SyntheticTruth(std::move(trees), ds.p());
}

}  // namespace qiniup
