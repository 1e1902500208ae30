#include "wcetrange/numerics/logistic.hpp"

#include <cmath>

namespace wcetrange::numerics {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double penalized(const DesignMatrix& dm, const Eigen::VectorXd& beta, double ridge) {
  return log_likelihood(dm, beta) - 0.5 * ridge * beta.squaredNorm();
}

}  // namespace

double log_likelihood(const DesignMatrix& dm, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = dm.x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += dm.y[i] * eta[i] - softplus(eta[i]);
  return ll;
}

LogisticFit irls_fit(const DesignMatrix& dm, double ridge, int max_iter, double tol) {
  const auto k = dm.x.cols();
  LogisticFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(k);
  double current = penalized(dm, fit.coefficients, ridge);

  for (int iter = 1; iter <= max_iter; ++iter) {
    fit.iterations = iter;
    const Eigen::VectorXd eta = dm.x * fit.coefficients;
    Eigen::VectorXd prob(eta.size());
    Eigen::VectorXd weight(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob[i] = sigmoid(eta[i]);
      weight[i] = prob[i] * (1.0 - prob[i]);
    }
    const Eigen::VectorXd gradient = dm.x.transpose() * (dm.y - prob) - ridge * fit.coefficients;
    Eigen::MatrixXd hessian = dm.x.transpose() * weight.asDiagonal() * dm.x;
    hessian.diagonal().array() += ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw SingularSystem("logistic Newton system is not positive definite");
    const Eigen::VectorXd step = ldlt.solve(gradient);
    if (!step.allFinite()) throw SingularSystem("logistic Newton step is not finite");
    if (ridge == 0.0) {
      // Rank deficiency shows up as a pivot that is tiny relative to the largest.
      const auto d = ldlt.vectorD().cwiseAbs();
      if (d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff()))
        throw SingularSystem("logistic Newton system is rank deficient");
    }

    double scale = 1.0;
    Eigen::VectorXd candidate = fit.coefficients + step;
    double next = penalized(dm, candidate, ridge);
    for (int halving = 0; halving < 40 && !(next >= current); ++halving) {
      scale *= 0.5;
      candidate = fit.coefficients + scale * step;
      next = penalized(dm, candidate, ridge);
    }
    if (!(next >= current)) {
      // No ascent possible along the Newton direction: at the optimum up to rounding.
      fit.converged = true;
      break;
    }
    const double improvement = next - current;
    fit.coefficients = candidate;
    current = next;
    if (improvement < tol) {
      fit.converged = true;
      break;
    }
  }
  fit.log_likelihood = log_likelihood(dm, fit.coefficients);
  return fit;
}

}  // namespace wcetrange::numerics
