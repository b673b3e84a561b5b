#pragma once

#include <Eigen/Dense>
#include <functional>

namespace nvmag {

// Deterministic damped least squares. The caller supplies residuals and
// an analytic Jacobian; convergence is declared at a relative parameter
// change below rel_tol.
struct LmOptions {
  int max_iterations = 200;
  double rel_tol = 1e-10;
  double lambda_init = 1e-3;
};

struct LmResult {
  Eigen::VectorXd params;
  double residual_norm = 0;
  Eigen::VectorXd covariance_diag;  // sigma^2 diag((J^T J)^-1)
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

LmResult levenberg_marquardt(const ResidualFn& residuals,
                             const JacobianFn& jacobian,
                             const Eigen::VectorXd& initial,
                             const LmOptions& opts = {});

}  // namespace nvmag
