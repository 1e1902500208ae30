#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace wcetrange::numerics {

/// Rows x terms design matrix with a 0/1 response per row.
struct DesignMatrix {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

struct LogisticFit {
  Eigen::VectorXd coefficients;
  double log_likelihood = 0.0;  // unpenalized
  int iterations = 0;
  bool converged = false;
};

/// The weighted normal system could not be solved.
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binomial log-likelihood of coefficients `beta` (numerically stable form).
double log_likelihood(const DesignMatrix& dm, const Eigen::VectorXd& beta);

/// Newton / IRLS maximizer of log-likelihood - ridge/2 * |beta|^2 with
/// step-halving. Stops when the penalized objective improves by less than
/// `tol` or after `max_iter` iterations. Throws SingularSystem when the Newton
/// system is singular or non-finite.
LogisticFit irls_fit(const DesignMatrix& dm, double ridge = 0.0, int max_iter = 100, double tol = 1e-8);

inline double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace wcetrange::numerics
