#include "logistic.hpp"

#include <cmath>

namespace treatfair::detail {
namespace {

// column means and scales; zero-variance columns keep scale 1
void standardize(const Eigen::MatrixXd& X, Eigen::RowVectorXd& mean, Eigen::RowVectorXd& scale) {
  const double n = static_cast<double>(X.rows());
  mean = X.colwise().mean();
  scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - mean(j)).square().sum() / std::max(1.0, n);
    scale(j) = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
}

Eigen::VectorXd unscale(const Eigen::VectorXd& b, const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& scale) {
  Eigen::VectorXd out(b.size());
  out(0) = b(0);
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    out(j + 1) = b(j + 1) / scale(j);
    out(0) -= out(j + 1) * mean(j);
  }
  return out;
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                         double ridge, int max_iter) {
  Eigen::RowVectorXd mean, scale;
  standardize(X, mean, scale);
  const Eigen::Index n = X.rows(), p = X.cols() + 1;
  Eigen::MatrixXd Z(n, p);
  Z.col(0).setOnes();
  Z.rightCols(p - 1) = (X.rowwise() - mean).array().rowwise() / scale.array();

  LogisticFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, ridge);
  penalty(0) = 0.0;
  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = Z * b;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // log(1 + e^eta) computed stably
      const double e = eta(i);
      const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      ll += weights(i) * (y(i) * e - softplus);
    }
    return ll - 0.5 * (penalty.array() * b.array().square()).sum();
  };
  double current = objective(beta);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd eta = Z * beta;
    Eigen::VectorXd grad = -penalty.cwiseProduct(beta);
    Eigen::VectorXd w(n);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = sigmoid(eta(i));
      w(i) = weights(i) * std::max(pi * (1.0 - pi), 1e-12);
      r(i) = weights(i) * (y(i) - pi);
    }
    grad += Z.transpose() * r;
    Eigen::MatrixXd H = Z.transpose() * w.asDiagonal() * Z;
    H.diagonal() += penalty;
    H.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = H.ldlt().solve(grad);
    // halve the step until the penalized likelihood does not decrease
    double t = 1.0;
    Eigen::VectorXd next = beta + step;
    double value = objective(next);
    while (value < current - 1e-12 && t > 1e-8) {
      t *= 0.5;
      next = beta + t * step;
      value = objective(next);
    }
    beta = next;
    fit.iterations = it + 1;
    const bool small = (t * step).cwiseAbs().maxCoeff() < 1e-8 || std::abs(value - current) < 1e-12 * (1 + std::abs(value));
    current = value;
    if (small) {
      fit.converged = true;
      break;
    }
  }
  fit.beta = unscale(beta, mean, scale);
  return fit;
}

Eigen::VectorXd fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double ridge, bool& rank_deficient) {
  Eigen::RowVectorXd mean, scale;
  standardize(X, mean, scale);
  const Eigen::Index p = X.cols();
  const double ybar = y.mean();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
  rank_deficient = false;
  if (p > 0) {
    const Eigen::MatrixXd Z = (X.rowwise() - mean).array().rowwise() / scale.array();
    Eigen::MatrixXd G = Z.transpose() * Z;
    const Eigen::VectorXd rhs = Z.transpose() * (y.array() - ybar).matrix();
    if (ridge == 0.0) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
      qr.setThreshold(1e-10);
      if (qr.rank() < p) {
        rank_deficient = true;
        return b;
      }
    }
    G.diagonal().array() += ridge * static_cast<double>(X.rows());
    b.tail(p) = G.ldlt().solve(rhs);
  }
  b(0) = ybar;
  return unscale(b, mean, scale);
}

}  // namespace treatfair::detail
