#include "qiniup/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "qiniup/model.hpp"

namespace qiniup {
namespace {

double soft_threshold(double g, double lambda) {
  if (g > lambda) return g - lambda;
  if (g < -lambda) return g + lambda;
  return 0.0;
}

Eigen::MatrixXd penalized_columns(const UpliftDataset& ds) {
  const auto n = static_cast<Eigen::Index>(ds.n());
  const auto p = static_cast<Eigen::Index>(ds.p());
  Eigen::MatrixXd raw(n, 2 * p + 1);
  raw.leftCols(p) = ds.features();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = ds.treatment()[i];
    raw(i, p) = t;
    raw.row(i).segment(p + 1, p) = t * ds.features().row(i);
  }
  return raw;
}

Eigen::VectorXd outcome_vector(const UpliftDataset& ds) {
  Eigen::VectorXd y(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) y[i] = ds.outcome()[i];
  return y;
}

double mean_loglik_loss(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = std::clamp(eta[i], -kEtaClamp, kEtaClamp);
    const double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    loss -= y[i] * e - log1pexp;
  }
  return loss / static_cast<double>(eta.size());
}

// Working state of the standardized problem at one lambda.
struct Solver {
  const StandardizedDesign& design;
  const Eigen::VectorXd& y;
  const PathOptions& options;
  double n;

  double objective(double b0, const Eigen::VectorXd& s, double lambda) const {
    const Eigen::VectorXd eta = (design.columns() * s).array() + b0;
    return mean_loglik_loss(eta, y) + lambda * s.cwiseAbs().sum();
  }

  // Coordinate descent on the weighted least-squares approximation around
  // the current iterate. `wres` holds w .* (working response - fit).
  std::size_t coordinate_descent(double lambda, const Eigen::VectorXd& w, const Eigen::MatrixXd& wz,
                                 const Eigen::VectorXd& xv, Eigen::VectorXd& wres, double& b0,
                                 Eigen::VectorXd& s) const {
    const auto& z = design.columns();
    const auto width = static_cast<Eigen::Index>(design.width());
    const double wsum = w.sum();
    std::vector<char> active(static_cast<std::size_t>(width), 0);
    for (Eigen::Index k = 0; k < width; ++k) active[k] = s[k] != 0.0;

    auto sweep = [&](bool all) {
      double max_change = 0.0;
      const double d = wres.sum() / wsum;
      b0 += d;
      wres -= d * w;
      max_change = std::abs(d);
      for (Eigen::Index k = 0; k < width; ++k) {
        if (!all && !active[k]) continue;
        if (!design.penalizable(static_cast<std::size_t>(k)) || xv[k] <= 0.0) continue;
        const double g = z.col(k).dot(wres) / n + xv[k] * s[k];
        const double next = soft_threshold(g, lambda) / xv[k];
        const double delta = next - s[k];
        if (delta != 0.0) {
          wres -= delta * wz.col(k);
          s[k] = next;
          max_change = std::max(max_change, std::abs(delta));
          if (next != 0.0) active[k] = 1;
        }
      }
      return max_change;
    };

    std::size_t sweeps = 0;
    while (sweeps < options.max_sweeps) {
      ++sweeps;
      if (sweep(true) < options.inner_tolerance) break;
      while (sweeps < options.max_sweeps) {
        ++sweeps;
        if (sweep(false) < options.inner_tolerance) break;
      }
    }
    return sweeps;
  }

  FitDiagnostics solve(double lambda, double& b0, Eigen::VectorXd& s,
                       std::vector<double>* trace) const {
    FitDiagnostics diag;
    const auto& z = design.columns();
    double current = objective(b0, s, lambda);
    if (trace) trace->push_back(current);

    for (std::size_t outer = 0; outer < options.max_outer; ++outer) {
      const Eigen::VectorXd eta = (z * s).array() + b0;
      Eigen::VectorXd w(eta.size()), wres(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double prob = logistic(eta[i]);
        w[i] = std::max(prob * (1.0 - prob), 1e-5);
        wres[i] = y[i] - prob;  // = w * (y - p) / w
      }
      const Eigen::MatrixXd wz = w.asDiagonal() * z;
      const Eigen::VectorXd xv = (z.cwiseProduct(wz)).colwise().sum().transpose() / n;

      const double old_b0 = b0;
      const Eigen::VectorXd old_s = s;
      coordinate_descent(lambda, w, wz, xv, wres, b0, s);

      // The quadratic model can overshoot; halve toward the previous iterate
      // until the true penalized objective does not increase.
      double next = objective(b0, s, lambda);
      const double new_b0 = b0;
      const Eigen::VectorXd new_s = s;
      double t = 1.0;
      for (int h = 0; h < 40 && next > current + 1e-15 * std::abs(current); ++h) {
        t *= 0.5;
        b0 = old_b0 + t * (new_b0 - old_b0);
        s = old_s + t * (new_s - old_s);
        next = objective(b0, s, lambda);
      }
      if (next > current) {
        b0 = old_b0;
        s = old_s;
        next = current;
      }
      current = next;
      if (trace) trace->push_back(current);
      ++diag.iterations;

      const double change =
          std::max(std::abs(b0 - old_b0), (s - old_s).cwiseAbs().maxCoeff());
      if (change < options.outer_tolerance) {
        diag.converged = true;
        break;
      }
    }
    return diag;
  }
};

}  // namespace

StandardizedDesign::StandardizedDesign(const UpliftDataset& ds) {
  columns_ = penalized_columns(ds);
  const double n = static_cast<double>(ds.n());
  const auto width = columns_.cols();
  means_ = columns_.colwise().mean().transpose();
  scales_.resize(width);
  varying_.assign(static_cast<std::size_t>(width), true);
  for (Eigen::Index k = 0; k < width; ++k) {
    columns_.col(k).array() -= means_[k];
    const double sd = std::sqrt(columns_.col(k).squaredNorm() / n);
    if (sd <= 1e-10 * std::max(1.0, std::abs(means_[k]))) {
      varying_[k] = false;
      scales_[k] = 1.0;
      columns_.col(k).setZero();
    } else {
      scales_[k] = sd;
      columns_.col(k) /= sd;
    }
  }
}

UpliftCoefficients StandardizedDesign::to_original(double intercept,
                                                   const Eigen::VectorXd& slopes) const {
  const auto width = columns_.cols();
  if (slopes.size() != width) throw ValidationError("slope vector has wrong length");
  Eigen::VectorXd flat(width + 1);
  flat[0] = intercept;
  for (Eigen::Index k = 0; k < width; ++k) {
    const double b = varying_[k] ? slopes[k] / scales_[k] : 0.0;
    flat[k + 1] = b;
    flat[0] -= b * means_[k];
  }
  return UpliftCoefficients::from_flat(flat);
}

std::pair<double, Eigen::VectorXd> StandardizedDesign::to_standardized(
    const UpliftCoefficients& c) const {
  const Eigen::VectorXd flat = c.flat();
  const auto width = columns_.cols();
  if (flat.size() != width + 1) throw ValidationError("coefficient dimension mismatch");
  double b0 = flat[0];
  Eigen::VectorXd s(width);
  for (Eigen::Index k = 0; k < width; ++k) {
    b0 += flat[k + 1] * means_[k];
    s[k] = varying_[k] ? flat[k + 1] * scales_[k] : 0.0;
  }
  return {b0, s};
}

double lambda_max(const UpliftDataset& ds) {
  const StandardizedDesign design(ds);
  const Eigen::VectorXd y = outcome_vector(ds);
  const Eigen::VectorXd centred = y.array() - y.mean();
  const Eigen::VectorXd g = design.columns().transpose() * centred / static_cast<double>(ds.n());
  double best = 0.0;
  for (std::size_t k = 0; k < design.width(); ++k)
    if (design.penalizable(k)) best = std::max(best, std::abs(g[k]));
  return best;
}

double default_lambda_eps(std::size_t n, std::size_t p) { return 2 * p + 1 >= n ? 1e-2 : 1e-4; }

std::vector<double> lambda_sequence(const UpliftDataset& ds, std::size_t length, double eps) {
  if (length < 2) throw ValidationError("lambda sequence needs length >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("lambda eps must lie in (0, 1)");
  const double top = lambda_max(ds);
  if (!(top > 0.0))
    throw ValidationError("lambda_max is zero: outcome is constant or no column varies");
  std::vector<double> seq(length);
  const double step = std::log(eps) / static_cast<double>(length - 1);
  for (std::size_t j = 0; j < length; ++j) seq[j] = top * std::exp(step * static_cast<double>(j));
  return seq;
}

LassoPath fit_lasso_path(const UpliftDataset& ds, std::span<const double> lambdas,
                         const PathOptions& options) {
  if (lambdas.empty()) throw ValidationError("empty lambda sequence");
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (!(lambdas[j] > 0.0) || !std::isfinite(lambdas[j]))
      throw ValidationError("lambdas must be positive and finite");
    if (j > 0 && !(lambdas[j] < lambdas[j - 1]))
      throw ValidationError("lambdas must be strictly decreasing");
  }

  const StandardizedDesign design(ds);
  const Eigen::VectorXd y = outcome_vector(ds);
  const double ybar = y.mean();
  if (ybar <= 0.0 || ybar >= 1.0) throw ValidationError("outcome is constant; lasso path undefined");
  const double top = lambda_max(ds);
  const Solver solver{design, y, options, static_cast<double>(ds.n())};

  LassoPath path;
  double b0 = std::log(ybar / (1.0 - ybar));
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(design.width()));

  for (double lambda : lambdas) {
    FitDiagnostics diag;
    std::vector<double> trace;
    if (lambda >= top * (1.0 - 1e-10)) {
      // Intercept-only solution is exact here.
      b0 = std::log(ybar / (1.0 - ybar));
      s.setZero();
      diag.converged = true;
    } else {
      diag = solver.solve(lambda, b0, s, options.record_trace ? &trace : nullptr);
      if (!diag.converged)
        diag.warnings.push_back("no convergence within " + std::to_string(options.max_outer) +
                                " outer iterations");
    }
    UpliftCoefficients c = design.to_original(b0, s);
    diag.log_likelihood = log_likelihood(c, ds);

    // Largest KKT violation on the standardized scale.
    const Eigen::VectorXd eta = (design.columns() * s).array() + b0;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = y[i] - logistic(eta[i]);
    const Eigen::VectorXd sc = design.columns().transpose() * resid / static_cast<double>(ds.n());
    double viol = std::abs(resid.mean());
    for (std::size_t k = 0; k < design.width(); ++k) {
      if (!design.penalizable(k)) continue;
      viol = std::max(viol, s[k] == 0.0 ? std::max(0.0, std::abs(sc[k]) - lambda)
                                        : std::abs(sc[k] - lambda * (s[k] > 0 ? 1.0 : -1.0)));
    }
    diag.gradient_max_norm = viol;

    std::size_t support = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) support += s[k] != 0.0;
    path.lambdas.push_back(lambda);
    path.coefficients.push_back(std::move(c));
    path.support_sizes.push_back(support);
    path.diagnostics.push_back(std::move(diag));
    if (options.record_trace) path.objective_traces.push_back(std::move(trace));
  }
  return path;
}

LassoPath fit_lasso_path(const UpliftDataset& ds, const PathOptions& options) {
  const double eps = options.eps.value_or(default_lambda_eps(ds.n(), ds.p()));
  const auto lambdas = lambda_sequence(ds, options.length, eps);
  return fit_lasso_path(ds, lambdas, options);
}

double penalized_objective(const UpliftDataset& ds, const UpliftCoefficients& c, double lambda) {
  const StandardizedDesign design(ds);
  const auto [b0, s] = design.to_standardized(c);
  const Eigen::VectorXd eta = (design.columns() * s).array() + b0;
  return mean_loglik_loss(eta, outcome_vector(ds)) + lambda * s.cwiseAbs().sum();
}

Eigen::VectorXd standardized_score(const UpliftDataset& ds, const UpliftCoefficients& c) {
  const StandardizedDesign design(ds);
  const Eigen::VectorXd resid = outcome_vector(ds) - fitted_probabilities(c, ds);
  return design.columns().transpose() * resid / static_cast<double>(ds.n());
}

}  // namespace qiniup
