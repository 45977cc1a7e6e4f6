#pragma once

#include <Eigen/Dense>

namespace treatfair::detail {

struct LogisticFit {
  Eigen::VectorXd beta;  // beta[0] is the intercept
  int iterations = 0;
  bool converged = false;
};

/// Weighted ridge logistic regression by Newton/IRLS. X excludes the intercept
/// column; the intercept is not penalized.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                         double ridge, int max_iter = 100);

/// Ridge least squares with an unpenalized intercept; returns [intercept, w...].
/// Sets `rank_deficient` when X'X (after centering) is singular and ridge == 0.
Eigen::VectorXd fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double ridge, bool& rank_deficient);

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace treatfair::detail
