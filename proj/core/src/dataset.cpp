#include "qiniup/dataset.hpp"

#include <cmath>
#include <unordered_set>

namespace qiniup {

UpliftDataset::UpliftDataset(Eigen::MatrixXd features, std::vector<int> treatment,
                             std::vector<int> outcome,
                             std::vector<std::string> feature_names)
    : features_(std::move(features)),
      treatment_(std::move(treatment)),
      outcome_(std::move(outcome)),
      feature_names_(std::move(feature_names)) {
  const std::size_t n = treatment_.size();
  if (n < 2) throw ValidationError("dataset needs at least 2 rows, got " + std::to_string(n));
  if (outcome_.size() != n)
    throw ValidationError("outcome length " + std::to_string(outcome_.size()) +
                          " does not match treatment length " + std::to_string(n));
  if (static_cast<std::size_t>(features_.rows()) != n)
    throw ValidationError("feature matrix has " + std::to_string(features_.rows()) +
                          " rows, expected " + std::to_string(n));
  if (feature_names_.size() != p())
    throw ValidationError("expected " + std::to_string(p()) + " feature names, got " +
                          std::to_string(feature_names_.size()));

  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names_) {
    if (!seen.insert(name).second) throw ValidationError("duplicate feature name '" + name + "'");
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (treatment_[i] != 0 && treatment_[i] != 1)
      throw ValidationError("non-binary treatment at row " + std::to_string(i + 1));
    if (outcome_[i] != 0 && outcome_[i] != 1)
      throw ValidationError("non-binary outcome at row " + std::to_string(i + 1));
    n_treated_ += static_cast<std::size_t>(treatment_[i]);
  }
  if (!features_.allFinite()) {
    for (Eigen::Index j = 0; j < features_.cols(); ++j)
      for (Eigen::Index i = 0; i < features_.rows(); ++i)
        if (!std::isfinite(features_(i, j)))
          throw ValidationError("non-finite value at row " + std::to_string(i + 1) +
                                ", column '" + feature_names_[j] + "'");
  }
  if (n_treated_ == 0) throw ValidationError("empty treated arm");
  if (n_treated_ == n) throw ValidationError("empty control arm");
}

UpliftDataset UpliftDataset::rows(std::span<const std::size_t> index) const {
  Eigen::MatrixXd x(index.size(), features_.cols());
  std::vector<int> t(index.size());
  std::vector<int> y(index.size());
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto i = index[r];
    if (i >= n()) throw ValidationError("row index out of range");
    x.row(r) = features_.row(i);
    t[r] = treatment_[i];
    y[r] = outcome_[i];
  }
  return {std::move(x), std::move(t), std::move(y), feature_names_};
}

UpliftDataset UpliftDataset::columns(std::span<const std::size_t> index) const {
  Eigen::MatrixXd x(features_.rows(), index.size());
  std::vector<std::string> names;
  names.reserve(index.size());
  for (std::size_t c = 0; c < index.size(); ++c) {
    if (index[c] >= p()) throw ValidationError("column index out of range");
    x.col(c) = features_.col(index[c]);
    names.push_back(feature_names_[index[c]]);
  }
  return {std::move(x), treatment_, outcome_, std::move(names)};
}

UpliftDataset UpliftDataset::with_outcome(std::vector<int> outcome) const {
  return {features_, treatment_, std::move(outcome), feature_names_};
}

UpliftCoefficients UpliftCoefficients::zero(std::size_t p) {
  UpliftCoefficients c;
  c.main = Eigen::VectorXd::Zero(p);
  c.interact = Eigen::VectorXd::Zero(p);
  return c;
}

UpliftCoefficients UpliftCoefficients::from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() < 2 || flat.size() % 2 != 0)
    throw ValidationError("flat coefficient vector must have even length >= 2");
  const Eigen::Index p = (flat.size() - 2) / 2;
  UpliftCoefficients c;
  c.intercept = flat[0];
  c.main = flat.segment(1, p);
  c.treat = flat[p + 1];
  c.interact = flat.segment(p + 2, p);
  return c;
}

Eigen::VectorXd UpliftCoefficients::flat() const {
  const Eigen::Index p = main.size();
  Eigen::VectorXd v(2 * p + 2);
  v[0] = intercept;
  v.segment(1, p) = main;
  v[p + 1] = treat;
  v.segment(p + 2, p) = interact;
  return v;
}

bool UpliftCoefficients::finite() const {
  return std::isfinite(intercept) && std::isfinite(treat) && main.allFinite() &&
         interact.allFinite();
}

void UpliftCoefficients::validate() const {
  if (main.size() != interact.size())
    throw ValidationError("main and interaction effects differ in length");
  if (!finite()) throw ValidationError("coefficients must be finite");
}

void UpliftCoefficients::check_dimension(std::size_t p) const {
  if (this->p() != p || static_cast<std::size_t>(interact.size()) != p)
    throw ValidationError("dimension mismatch: coefficients have p=" + std::to_string(this->p()) +
                          ", input has p=" + std::to_string(p));
}

std::vector<std::size_t> UpliftCoefficients::support() const {
  std::vector<std::size_t> s;
  const auto v = flat();
  for (Eigen::Index k = 1; k < v.size(); ++k)
    if (v[k] != 0.0) s.push_back(static_cast<std::size_t>(k - 1));
  return s;
}

bool operator==(const UpliftCoefficients& a, const UpliftCoefficients& b) {
  return a.intercept == b.intercept && a.treat == b.treat && a.main.size() == b.main.size() &&
         a.interact.size() == b.interact.size() && a.main == b.main && a.interact == b.interact;
}

std::string flat_coordinate_name(std::size_t k, const std::vector<std::string>& names) {
  const std::size_t p = names.size();
  if (k == 0) return "intercept";
  if (k <= p) return "main[" + names[k - 1] + "]";
  if (k == p + 1) return "treat";
  if (k <= 2 * p + 1) return "interact[" + names[k - p - 2] + "]";
  throw ValidationError("flat coordinate index out of range");
}

}  // namespace qiniup
