#pragma once

#include <Eigen/Dense>

#include "qiniup/dataset.hpp"

namespace qiniup {

/// Linear predictors are clamped to +-kEtaClamp before exponentiation.
inline constexpr double kEtaClamp = 35.0;

double logistic(double eta);

/// intercept + x'main + treat*t + t*x'interact (unclamped).
double linear_predictor(const UpliftCoefficients& c, const Eigen::Ref<const Eigen::VectorXd>& x,
                        int t);

/// P(Y=1 | x, t) under the interaction logistic model.
double predict_prob(const UpliftCoefficients& c, const Eigen::Ref<const Eigen::VectorXd>& x,
                    int t);

/// predict_prob(c, x, 1) - predict_prob(c, x, 0).
double predict_uplift(const UpliftCoefficients& c, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Predicted uplift for every row of a feature matrix.
Eigen::VectorXd predict_uplifts(const UpliftCoefficients& c, const Eigen::MatrixXd& features);

/// Fitted probabilities at each row's own treatment value.
Eigen::VectorXd fitted_probabilities(const UpliftCoefficients& c, const UpliftDataset& ds);

/// n x (2p+2) design with columns [1, x, t, t*x], matching UpliftCoefficients::flat().
Eigen::MatrixXd design_matrix(const UpliftDataset& ds);

}  // namespace qiniup
