#include "qiniup/glm.hpp"

#include <algorithm>
#include <cmath>

#include "qiniup/model.hpp"

namespace qiniup {
namespace {

constexpr double kStepTolerance = 1e-8;

double clamp_eta(double eta) { return std::clamp(eta, -kEtaClamp, kEtaClamp); }

// Per-observation log-likelihood y*eta - log(1 + e^eta), overflow-safe.
double bernoulli_loglik(int y, double eta) {
  eta = clamp_eta(eta);
  const double log1pexp = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
  return y * eta - log1pexp;
}

Eigen::VectorXd outcome_vector(const UpliftDataset& ds) {
  Eigen::VectorXd y(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) y[i] = ds.outcome()[i];
  return y;
}

struct Restricted {
  std::vector<std::size_t> flat;  // active flat indices, intercept first
  Eigen::MatrixXd design;
};

Restricted restrict_design(const Eigen::MatrixXd& full, const std::vector<std::size_t>& flat) {
  Restricted r{flat, Eigen::MatrixXd(full.rows(), static_cast<Eigen::Index>(flat.size()))};
  for (std::size_t k = 0; k < flat.size(); ++k) r.design.col(k) = full.col(flat[k]);
  return r;
}

double loglik_of(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& y) {
  const Eigen::VectorXd eta = a * b;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += bernoulli_loglik(static_cast<int>(y[i]), eta[i]);
  return ll;
}

}  // namespace

double log_likelihood(const UpliftCoefficients& c, const UpliftDataset& ds) {
  c.check_dimension(ds.p());
  const Eigen::VectorXd eta = design_matrix(ds) * c.flat();
  double ll = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) ll += bernoulli_loglik(ds.outcome()[i], eta[i]);
  return ll;
}

Eigen::VectorXd score(const UpliftCoefficients& c, const UpliftDataset& ds) {
  c.check_dimension(ds.p());
  const Eigen::VectorXd resid = outcome_vector(ds) - fitted_probabilities(c, ds);
  return design_matrix(ds).transpose() * resid;
}

Eigen::MatrixXd observed_information(const UpliftCoefficients& c, const UpliftDataset& ds) {
  c.check_dimension(ds.p());
  const Eigen::VectorXd prob = fitted_probabilities(c, ds);
  const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
  const Eigen::MatrixXd d = design_matrix(ds);
  return d.transpose() * w.asDiagonal() * d;
}

MleFit fit_mle(const UpliftDataset& ds, const std::optional<std::vector<std::size_t>>& support,
               const MleOptions& options) {
  const std::size_t p = ds.p();
  std::vector<std::size_t> flat{0};
  if (support) {
    std::vector<std::size_t> s = *support;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (auto k : s) {
      if (k > 2 * p) throw ValidationError("support index " + std::to_string(k) + " out of range");
      flat.push_back(k + 1);
    }
  } else {
    for (std::size_t k = 1; k < 2 * p + 2; ++k) flat.push_back(k);
  }
  if (ds.n() <= flat.size())
    throw ValidationError("need more observations (" + std::to_string(ds.n()) +
                          ") than active parameters (" + std::to_string(flat.size()) + ")");

  const Restricted r = restrict_design(design_matrix(ds), flat);
  const Eigen::MatrixXd& a = r.design;
  const Eigen::VectorXd y = outcome_vector(ds);
  const double n = static_cast<double>(ds.n());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) < flat.size())
    throw ValidationError("design has exactly collinear columns; drop redundant features");

  MleFit fit;
  FitDiagnostics& diag = fit.diagnostics;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(flat.size()));
  const double ybar = y.mean();
  if (ybar <= 0.0 || ybar >= 1.0) {
    b[0] = ybar <= 0.0 ? -options.separation_bound : options.separation_bound;
    diag.separation = true;
    diag.warnings.push_back("outcome is constant; intercept clamped");
  } else {
    b[0] = std::log(ybar / (1.0 - ybar));
  }

  double ll = loglik_of(a, b, y);
  for (;;) {
    const Eigen::VectorXd eta = a * b;
    Eigen::VectorXd prob(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) prob[i] = logistic(eta[i]);
    const Eigen::VectorXd grad = a.transpose() * (y - prob);
    diag.gradient_max_norm = grad.cwiseAbs().maxCoeff() / n;
    if (diag.separation) break;

    const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
    const Eigen::MatrixXd info = a.transpose() * w.asDiagonal() * a;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      if (diag.gradient_max_norm <= options.tolerance) diag.converged = true;
      else diag.warnings.push_back("information matrix not positive definite");
      break;
    }
    const Eigen::VectorXd step = ldlt.solve(grad);
    // Under separation the gradient vanishes but the Newton step does not.
    if (diag.gradient_max_norm <= options.tolerance && 
        step.cwiseAbs().maxCoeff() <= kStepTolerance * (1.0 + b.cwiseAbs().maxCoeff())) {
      diag.converged = true;
      break;
    }
    if (diag.iterations >= options.max_iterations) break;
    double scale = 1.0;
    Eigen::VectorXd next = b + step;
    double next_ll = loglik_of(a, next, y);
    for (int halving = 0; halving < 40 && !(next_ll >= ll - 1e-12 * std::abs(ll)); ++halving) {
      scale *= 0.5;
      next = b + scale * step;
      next_ll = loglik_of(a, next, y);
    }
    ++diag.iterations;
    if (!(next_ll >= ll - 1e-12 * std::abs(ll))) {
      if (diag.gradient_max_norm <= options.tolerance) {
        diag.converged = true;
        break;
      }
      diag.warnings.push_back("step halving failed to increase the likelihood");
      break;
    }
    b = next;
    ll = next_ll;
    if (b.cwiseAbs().maxCoeff() > options.separation_bound) {
      b = b.cwiseMax(-options.separation_bound).cwiseMin(options.separation_bound);
      ll = loglik_of(a, b, y);
      diag.separation = true;
      diag.warnings.push_back("coefficient magnitude exceeded " +
                              std::to_string(options.separation_bound) +
                              "; data look (quasi-)separated, estimates clamped");
    }
  }
  if (!diag.converged && !diag.separation && diag.iterations >= options.max_iterations)
    diag.warnings.push_back("maximum iterations reached");

  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * p + 2));
  for (std::size_t k = 0; k < flat.size(); ++k) full[flat[k]] = b[k];
  fit.coefficients = UpliftCoefficients::from_flat(full);
  diag.log_likelihood = ll;
  return fit;
}

bool CoefficientCovariance::active(std::size_t flat) const {
  return std::find(flat_indices.begin(), flat_indices.end(), flat) != flat_indices.end();
}

double CoefficientCovariance::at(std::size_t fa, std::size_t fb) const {
  const auto ia = std::find(flat_indices.begin(), flat_indices.end(), fa);
  const auto ib = std::find(flat_indices.begin(), flat_indices.end(), fb);
  if (ia == flat_indices.end() || ib == flat_indices.end()) return 0.0;
  return matrix(ia - flat_indices.begin(), ib - flat_indices.begin());
}

CoefficientCovariance coefficient_covariance(const UpliftCoefficients& c, const UpliftDataset& ds) {
  c.check_dimension(ds.p());
  CoefficientCovariance cov;
  cov.flat_indices.push_back(0);
  for (auto k : c.support()) cov.flat_indices.push_back(k + 1);

  const Eigen::MatrixXd info = observed_information(c, ds);
  const auto m = static_cast<Eigen::Index>(cov.flat_indices.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = info(cov.flat_indices[i], cov.flat_indices[j]);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
  const double scale = sub.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * std::max(scale, 1e-300))
    throw NumericalError("observed information matrix is singular");
  cov.matrix = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
  cov.matrix = 0.5 * (cov.matrix + cov.matrix.transpose());
  return cov;
}

double odds_ratio(const UpliftCoefficients& c, std::size_t j, int t) {
  if (j >= c.p()) throw ValidationError("feature index " + std::to_string(j) + " out of range");
  if (t != 0 && t != 1) throw ValidationError("treatment must be 0 or 1");
  return std::exp(c.main[j]) * std::exp(c.interact[j] * t);
}

double group_odds_ratio(const UpliftCoefficients& c, std::size_t j, int t, double mean_a,
                        double mean_b) {
  if (!std::isfinite(mean_a) || !std::isfinite(mean_b))
    throw ValidationError("group means must be finite");
  return std::pow(odds_ratio(c, j, t), mean_a - mean_b);
}

}  // namespace qiniup
