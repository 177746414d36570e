#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qiniup {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, violated preconditions, infeasible bins.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (singular matrix, non-convergence that
/// cannot be reported through diagnostics).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Feature matrix plus binary treatment and binary outcome vectors.
///
/// Immutable once constructed; the constructor enforces n >= 2, finite
/// features, values in {0,1} for treatment/outcome, both arms nonempty and
/// distinct feature names.
class UpliftDataset {
 public:
  UpliftDataset(Eigen::MatrixXd features, std::vector<int> treatment,
                std::vector<int> outcome, std::vector<std::string> feature_names);

  std::size_t n() const { return treatment_.size(); }
  std::size_t p() const { return static_cast<std::size_t>(features_.cols()); }

  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<int>& treatment() const { return treatment_; }
  const std::vector<int>& outcome() const { return outcome_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  std::size_t n_treated() const { return n_treated_; }
  std::size_t n_control() const { return n() - n_treated_; }

  /// Rows in the given order (duplicates allowed, e.g. bootstrap draws).
  UpliftDataset rows(std::span<const std::size_t> index) const;
  /// Same rows, only the listed feature columns (in the listed order).
  UpliftDataset columns(std::span<const std::size_t> index) const;
  /// Same features and treatment, replaced outcome vector.
  UpliftDataset with_outcome(std::vector<int> outcome) const;

 private:
  Eigen::MatrixXd features_;
  std::vector<int> treatment_;
  std::vector<int> outcome_;
  std::vector<std::string> feature_names_;
  std::size_t n_treated_ = 0;
};

/// Parameters of the interaction logistic model
///   logit p = intercept + x'main + treat * t + t * x'interact.
///
/// The flat layout used by solvers and search is
///   [intercept, main_0..main_{p-1}, treat, interact_0..interact_{p-1}]
/// (size 2p+2). Penalized coordinates are the flat indices 1..2p+1; a
/// "support" is expressed in penalized indices 0..2p (flat index minus one).
struct UpliftCoefficients {
  double intercept = 0.0;
  Eigen::VectorXd main;
  double treat = 0.0;
  Eigen::VectorXd interact;

  static UpliftCoefficients zero(std::size_t p);
  static UpliftCoefficients from_flat(const Eigen::VectorXd& flat);

  std::size_t p() const { return static_cast<std::size_t>(main.size()); }
  std::size_t flat_size() const { return 2 * p() + 2; }
  Eigen::VectorXd flat() const;

  bool finite() const;
  /// Throws ValidationError unless finite with main/interact of equal length.
  void validate() const;
  /// Throws ValidationError unless p() == p.
  void check_dimension(std::size_t p) const;

  /// Penalized indices (0..2p) of the nonzero entries among (main, treat, interact).
  std::vector<std::size_t> support() const;

  friend bool operator==(const UpliftCoefficients& a, const UpliftCoefficients& b);
};

/// Human-readable name of a flat coordinate, e.g. "main[age]" or "treat".
std::string flat_coordinate_name(std::size_t flat_index,
                                 const std::vector<std::string>& feature_names);

}  // namespace qiniup
