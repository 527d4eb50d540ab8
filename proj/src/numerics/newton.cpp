#include "moduli/numerics/newton.hpp"

#include "moduli/error.hpp"

namespace moduli::numerics {

namespace {

bool full_rank(const Eigen::MatrixXd& j, double rel_tol) {
    if (j.size() == 0) return false;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    const Eigen::VectorXd s = svd.singularValues();
    if (s(0) == 0.0) return false;
    return s(s.size() - 1) > rel_tol * s(0);
}

} // namespace

NewtonResult newton_solve(const VectorMap& f, const JacobianMap& jac, const Eigen::VectorXd& x0,
                          const NewtonOptions& opts) {
    NewtonResult out;
    out.x = x0;
    Eigen::VectorXd fx = f(out.x);
    out.residual = fx.norm();
    const Eigen::MatrixXd j0 = jac(out.x);
    if (!full_rank(j0, opts.rank_tol)) throw SingularJacobianError();
    Eigen::MatrixXd j = j0;
    while (out.residual > opts.tol && out.iterations < opts.max_iter) {
        ++out.iterations;
        if (out.iterations > 1) j = jac(out.x);
        const Eigen::VectorXd step = j.completeOrthogonalDecomposition().solve(-fx);
        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            const Eigen::VectorXd trial = out.x + lambda * step;
            const Eigen::VectorXd ft = f(trial);
            const double rt = ft.norm();
            if (rt < out.residual) {
                out.x = trial;
                fx = ft;
                out.residual = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    out.converged = out.residual <= opts.tol;
    return out;
}

NewtonResult newton_solve(const VectorMap& f, const JacobianMap& jac, const Coefficients<double>& x0,
                          const NewtonOptions& opts) {
    return newton_solve(f, jac, x0.values, opts);
}

Eigen::MatrixXd central_difference_jacobian(const VectorMap& f, const Eigen::VectorXd& x, double step) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd j;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::VectorXd xp = x;
        Eigen::VectorXd xm = x;
        xp(k) += step;
        xm(k) -= step;
        const Eigen::VectorXd d = (f(xp) - f(xm)) / (2.0 * step);
        if (k == 0) j.resize(d.size(), n);
        j.col(k) = d;
    }
    return j;
}

} // namespace moduli::numerics
