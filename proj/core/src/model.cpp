#include "qiniup/model.hpp"

#include <algorithm>
#include <cmath>

namespace qiniup {

double logistic(double eta) {
  eta = std::clamp(eta, -kEtaClamp, kEtaClamp);
  return 1.0 / (1.0 + std::exp(-eta));
}

double linear_predictor(const UpliftCoefficients& c, const Eigen::Ref<const Eigen::VectorXd>& x,
                        int t) {
  c.check_dimension(static_cast<std::size_t>(x.size()));
  double eta = c.intercept + x.dot(c.main);
  if (t != 0) eta += c.treat + x.dot(c.interact);
  return eta;
}

double predict_prob(const UpliftCoefficients& c, const Eigen::Ref<const Eigen::VectorXd>& x,
                    int t) {
  if (t != 0 && t != 1) throw ValidationError("treatment must be 0 or 1");
  return logistic(linear_predictor(c, x, t));
}

double predict_uplift(const UpliftCoefficients& c, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return predict_prob(c, x, 1) - predict_prob(c, x, 0);
}

Eigen::VectorXd predict_uplifts(const UpliftCoefficients& c, const Eigen::MatrixXd& features) {
  c.check_dimension(static_cast<std::size_t>(features.cols()));
  const Eigen::VectorXd eta0 = (features * c.main).array() + c.intercept;
  const Eigen::VectorXd shift = (features * c.interact).array() + c.treat;
  Eigen::VectorXd u(features.rows());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    u[i] = logistic(eta0[i] + shift[i]) - logistic(eta0[i]);
  return u;
}

Eigen::VectorXd fitted_probabilities(const UpliftCoefficients& c, const UpliftDataset& ds) {
  c.check_dimension(ds.p());
  const auto& x = ds.features();
  const Eigen::VectorXd eta0 = (x * c.main).array() + c.intercept;
  const Eigen::VectorXd shift = (x * c.interact).array() + c.treat;
  Eigen::VectorXd prob(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i)
    prob[i] = logistic(eta0[i] + (ds.treatment()[i] ? shift[i] : 0.0));
  return prob;
}

Eigen::MatrixXd design_matrix(const UpliftDataset& ds) {
  const auto n = static_cast<Eigen::Index>(ds.n());
  const auto p = static_cast<Eigen::Index>(ds.p());
  Eigen::MatrixXd d(n, 2 * p + 2);
  d.col(0).setOnes();
  d.middleCols(1, p) = ds.features();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = ds.treatment()[i];
    d(i, p + 1) = t;
    d.row(i).segment(p + 2, p) = t * ds.features().row(i);
  }
  return d;
}

}  // namespace qiniup
