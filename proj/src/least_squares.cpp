#include "nvmag/least_squares.hpp"

#include <cmath>

#include "nvmag/errors.hpp"

namespace nvmag {

LmResult levenberg_marquardt(const ResidualFn& residuals,
                             const JacobianFn& jacobian,
                             const Eigen::VectorXd& initial,
                             const LmOptions& opts) {
  Eigen::VectorXd x = initial;
  Eigen::VectorXd r = residuals(x);
  double cost = r.squaredNorm();
  double lambda = opts.lambda_init;

  LmResult result;
  for (int it = 0; it < opts.max_iterations; ++it) {
    result.iterations = it + 1;
    const Eigen::MatrixXd j = jacobian(x);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;

    bool stepped = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::MatrixXd h = jtj;
      h.diagonal().array() += lambda * (jtj.diagonal().array() + 1e-30);
      const Eigen::VectorXd step = h.ldlt().solve(-g);
      const Eigen::VectorXd x_try = x + step;
      const Eigen::VectorXd r_try = residuals(x_try);
      const double cost_try = r_try.squaredNorm();
      if (std::isfinite(cost_try) && cost_try <= cost) {
        const double rel_change =
            step.norm() / std::max(x.norm(), 1e-300);
        x = x_try;
        r = r_try;
        cost = cost_try;
        lambda = std::max(lambda * 0.3, 1e-14);
        stepped = true;
        if (rel_change < opts.rel_tol) {
          result.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // Damping saturated: the gradient no longer improves the fit.
      result.converged = cost == 0.0 || g.norm() < 1e-12 * std::sqrt(cost);
      break;
    }
    if (result.converged) break;
  }

  result.params = x;
  result.residual_norm = std::sqrt(cost);

  const Eigen::MatrixXd j = jacobian(x);
  const Eigen::MatrixXd jtj = j.transpose() * j;
  const long dof = j.rows() - j.cols();
  const double sigma2 = dof > 0 ? cost / static_cast<double>(dof) : 0.0;
  const Eigen::MatrixXd jtj_inv =
      jtj.completeOrthogonalDecomposition().pseudoInverse();
  result.covariance_diag = sigma2 * jtj_inv.diagonal();
  return result;
}

}  // namespace nvmag
