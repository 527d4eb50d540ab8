#pragma once

#include "moduli/numerics/basis.hpp"

#include <functional>

namespace moduli::numerics {

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianMap = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
    double rank_tol = 1e-8; // full-rank test for J(x0), relative to sigma_max
    int max_halvings = 40;
};

struct NewtonResult {
    Eigen::VectorXd x;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Damped Gauss-Newton: pseudo-inverse steps with step halving on the
/// Euclidean residual norm. Throws SingularJacobianError if J(x0) is rank deficient.
NewtonResult newton_solve(const VectorMap& f, const JacobianMap& jac, const Eigen::VectorXd& x0,
                          const NewtonOptions& opts = {});

/// Coefficient-level wrapper; the residual is measured in the Euclidean norm of F.
NewtonResult newton_solve(const VectorMap& f, const JacobianMap& jac, const Coefficients<double>& x0,
                          const NewtonOptions& opts = {});

/// Central-difference Jacobian of f at x.
Eigen::MatrixXd central_difference_jacobian(const VectorMap& f, const Eigen::VectorXd& x, double step);

} // namespace moduli::numerics
