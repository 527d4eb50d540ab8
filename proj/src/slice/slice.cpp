#include "moduli/slice/slice.hpp"

#include "moduli/error.hpp"
#include "moduli/numerics/newton.hpp"

#include <algorithm>
#include <cmath>

namespace moduli::slice {

using numerics::Complex;
using numerics::LabeledBasis;
using numerics::Matrix;
using numerics::Rng;

namespace {

template <class T>
bool same_partition(const BlockOperator<T>& a, const BlockOperator<T>& b) {
    if (a.blocks.size() != b.blocks.size()) return false;
    for (size_t k = 0; k < a.blocks.size(); ++k)
        if (a.blocks[k].dom != b.blocks[k].dom) return false;
    return true;
}

double gram_norm(const LabeledBasis& b, const Eigen::VectorXd& v) { return numerics::norm<double>(b, v); }

Eigen::VectorXd whiten(const LabeledBasis& b, const Eigen::VectorXd& v) {
    return b.whiten<double>(v);
}

} // namespace

template <class T>
SliceModel<T> build_linear_slice(const BlockOperator<T>& p, const BlockOperator<T>* q_lin, double rel_tol) {
    SliceModel<T> m;
    m.rel_tol = rel_tol;
    m.kernel_P = numerics::kernel_basis(p, rel_tol);
    m.E_perp = numerics::coimage_basis(p, rel_tol);
    m.F = numerics::image_basis(p, rel_tol);
    const BlockOperator<T> p_star = numerics::gram_adjoint(p);
    m.F_perp = numerics::kernel_basis(p_star, rel_tol);
    if (q_lin == nullptr || q_lin->codomain == nullptr) {
        m.K_tangent = m.F_perp;
        return m;
    }
    if (same_partition(p_star, *q_lin)) {
        m.K_tangent = numerics::kernel_basis(numerics::stack<T>({p_star, *q_lin}, "K-equations"), rel_tol);
    } else {
        const auto a = BlockOperator<T>::single(p_star.to_dense());
        const auto b = BlockOperator<T>::single(q_lin->to_dense());
        m.K_tangent = numerics::kernel_basis(numerics::stack<T>({a, b}, "K-equations"), rel_tol);
    }
    return m;
}

template SliceModel<double> build_linear_slice<double>(const BlockOperator<double>&, const BlockOperator<double>*,
                                                       double);
template SliceModel<Complex> build_linear_slice<Complex>(const BlockOperator<Complex>&,
                                                         const BlockOperator<Complex>*, double);

Eigen::MatrixXd integrability_linearization(const ActionSystem& sys, double step) {
    const Index n = sys.structure_space->dim();
    if (!sys.integrability) return Eigen::MatrixXd(0, n);
    return numerics::central_difference_jacobian(sys.integrability, Eigen::VectorXd::Zero(n), step);
}

SliceModel<double> build_slice(const ActionSystem& sys, const SliceOptions& opts) {
    if (!sys.integrability) return build_linear_slice<double>(sys.P, nullptr, opts.rel_tol);
    const Eigen::MatrixXd q = integrability_linearization(sys, opts.q_step);
    if (q.rows() == 0) return build_linear_slice<double>(sys.P, nullptr, opts.rel_tol);
    auto qb = LabeledBasis::euclidean(sys.name + "-integrability", q.rows());
    const auto q_op = BlockOperator<double>::single(numerics::RealOperator(sys.structure_space, qb, q));
    return build_linear_slice<double>(sys.P, &q_op, opts.rel_tol);
}

double action_derivative_defect(const ActionSystem& sys, double step) {
    const Index ng = sys.group_chart->dim();
    const Index ns = sys.structure_space->dim();
    const Eigen::MatrixXd p = sys.P.to_dense().entries;
    double worst = 0.0;
    const Eigen::VectorXd zg = Eigen::VectorXd::Zero(ng);
    const Eigen::VectorXd zs = Eigen::VectorXd::Zero(ns);
    for (Index k = 0; k < ng; ++k) {
        Eigen::VectorXd e = zg;
        e(k) = 1.0;
        const Eigen::VectorXd d = (sys.act(step * e, zs) - sys.act(-step * e, zs)) / (2.0 * step);
        const Eigen::VectorXd expect = p * e;
        const double scale = std::max(gram_norm(*sys.structure_space, expect), gram_norm(*sys.group_chart, e));
        worst = std::max(worst, gram_norm(*sys.structure_space, d - expect) / scale);
    }
    for (Index k = 0; k < ns; ++k) {
        Eigen::VectorXd e = zs;
        e(k) = 1.0;
        const Eigen::VectorXd d = (sys.act(zg, step * e) - sys.act(zg, -step * e)) / (2.0 * step);
        worst = std::max(worst, gram_norm(*sys.structure_space, d - e) / gram_norm(*sys.structure_space, e));
    }
    return worst;
}

Eigen::VectorXd slice_chart(const ActionSystem& sys, const SliceModel<double>& model, const Eigen::VectorXd& xi,
                            const Eigen::VectorXd& kappa) {
    if (xi.size() != sys.group_chart->dim() || kappa.size() != sys.structure_space->dim())
        throw DimensionError("slice_chart arguments");
    const double nx = gram_norm(*sys.group_chart, xi);
    const double nk = gram_norm(*sys.structure_space, kappa);
    if (nx > sys.chart_radius || nk > sys.chart_radius) throw DomainError("slice_chart: outside chart radius");
    const double tol = 1e-8;
    if (gram_norm(*sys.group_chart, xi - model.E_perp.project(xi)) > tol * std::max(1.0, nx))
        throw DomainError("slice_chart: xi not in E_perp");
    if (gram_norm(*sys.structure_space, kappa - model.F_perp.project(kappa)) > tol * std::max(1.0, nk))
        throw DomainError("slice_chart: kappa not in F_perp");
    return sys.act(xi, kappa);
}

SliceCoordinates slice_invert(const ActionSystem& sys, const SliceModel<double>& model, const Eigen::VectorXd& j,
                              const SliceOptions& opts) {
    if (j.size() != sys.structure_space->dim()) throw DimensionError("slice_invert argument");
    const Eigen::MatrixXd e = model.E_perp.dense();
    const Eigen::MatrixXd f = model.F_perp.dense();
    const Index ne = e.cols();
    const Index nf = f.cols();
    const LabeledBasis& sb = *sys.structure_space;
    auto unpack = [&](const Eigen::VectorXd& x, Eigen::VectorXd& xi, Eigen::VectorXd& kappa) {
        xi = e * x.head(ne);
        kappa = f * x.tail(nf);
    };
    numerics::VectorMap fun = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd xi, kappa;
        unpack(x, xi, kappa);
        return Eigen::VectorXd(whiten(sb, sys.act(xi, kappa) - j));
    };
    numerics::JacobianMap jac = [&](const Eigen::VectorXd& x) {
        return numerics::central_difference_jacobian(fun, x, opts.jacobian_step);
    };
    // linear guess from kappa + P xi = J
    Eigen::MatrixXd lin(sb.dim(), ne + nf);
    lin << sys.P.to_dense().entries * e, f;
    const Eigen::MatrixXd wl = sb.whiten<double>(lin);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(ne + nf);
    if (ne + nf > 0) x0 = wl.completeOrthogonalDecomposition().solve(whiten(sb, j));

    SliceCoordinates out;
    if (ne + nf == 0) {
        out.xi = Eigen::VectorXd::Zero(sys.group_chart->dim());
        out.kappa = Eigen::VectorXd::Zero(sb.dim());
        out.residual = gram_norm(sb, sys.act(out.xi, out.kappa) - j);
        if (out.residual > opts.newton_tol) throw OutsideChartError(out.residual);
        return out;
    }
    numerics::NewtonOptions no;
    no.tol = opts.newton_tol;
    no.max_iter = opts.max_iter;
    no.rank_tol = opts.rel_tol;
    const auto r = numerics::newton_solve(fun, jac, x0, no);
    if (!r.converged) throw OutsideChartError(r.residual);
    unpack(r.x, out.xi, out.kappa);
    out.residual = r.residual;
    out.iterations = r.iterations;
    if (r.x.head(ne).norm() > sys.chart_radius || r.x.tail(nf).norm() > sys.chart_radius)
        throw OutsideChartError(r.residual);
    return out;
}

Eigen::VectorXd sample_ball(const LabeledBasis& basis, Rng& rng, double radius) {
    const Eigen::VectorXd w = numerics::random_in_ball(rng, basis.dim(), radius);
    // x with L^T x = w has Gram norm |w|
    return basis.unwhiten<double>(w);
}

Eigen::VectorXd sample_subspace_ball(const Subspace<double>& sub, Rng& rng, double radius) {
    if (sub.dim() == 0) return Eigen::VectorXd::Zero(sub.ambient->dim());
    return sub.vectors * numerics::random_in_ball(rng, sub.dim(), radius);
}

double retraction_idempotence(const ActionSystem& sys, const SliceModel<double>& model, int samples, double radius,
                              std::uint64_t seed, const SliceOptions& opts) {
    if (samples < 1) throw DomainError("retraction_idempotence: samples must be >= 1");
    Rng rng(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Eigen::VectorXd j = sample_ball(*sys.structure_space, rng, radius);
        const auto once = slice_invert(sys, model, j, opts);
        const auto twice = slice_invert(sys, model, once.kappa, opts);
        worst = std::max(worst, gram_norm(*sys.structure_space, twice.kappa - once.kappa));
    }
    return worst;
}

double round_trip_defect(const ActionSystem& sys, const SliceModel<double>& model, int samples, double radius,
                         std::uint64_t seed, const SliceOptions& opts) {
    if (samples < 1) throw DomainError("round_trip_defect: samples must be >= 1");
    Rng rng(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Eigen::VectorXd xi = sample_subspace_ball(model.E_perp, rng, radius);
        const Eigen::VectorXd kappa = sample_subspace_ball(model.F_perp, rng, radius);
        const auto back = slice_invert(sys, model, slice_chart(sys, model, xi, kappa), opts);
        worst = std::max({worst, gram_norm(*sys.group_chart, back.xi - xi),
                          gram_norm(*sys.structure_space, back.kappa - kappa)});
    }
    return worst;
}

double fiber_defect(const ActionSystem& sys, const SliceModel<double>& model, int samples, double radius,
                    std::uint64_t seed, const SliceOptions& opts) {
    if (samples < 1) throw DomainError("fiber_defect: samples must be >= 1");
    Rng rng(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Eigen::VectorXd j = sample_ball(*sys.structure_space, rng, radius);
        const Eigen::VectorXd g = sample_ball(*sys.group_chart, rng, radius);
        try {
            const auto a = slice_invert(sys, model, j, opts);
            const auto b = slice_invert(sys, model, sys.act(g, j), opts);
            worst = std::max(worst, gram_norm(*sys.structure_space, b.kappa - a.kappa));
        } catch (const OutsideChartError&) {
        }
    }
    return worst;
}

Mc2Report mc2_probe(const ActionSystem& sys, const SliceModel<double>& model, int samples, double radius,
                    std::uint64_t seed, double tol, const SliceOptions& opts) {
    if (samples < 1) throw DomainError("mc2_probe: samples must be >= 1");
    Mc2Report rep;
    rep.samples = samples;
    rep.tol = tol;
    Rng rng(seed);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.structure_space->dim());
    for (int s = 0; s < samples; ++s) {
        const Eigen::VectorXd xi = sample_ball(*sys.group_chart, rng, radius);
        const Eigen::VectorXd j = sys.act(xi, zero);
        const Eigen::VectorXd proj = model.F_perp.project(j);
        double dist = gram_norm(*sys.structure_space, j - proj);
        if (sys.integrability) dist += sys.integrability(proj).norm();
        if (dist <= tol) {
            ++rep.on_slice;
            if (gram_norm(*sys.structure_space, j) > tol) {
                ++rep.violations;
                rep.counterexamples.push_back(xi);
            }
        }
        try {
            const auto c = slice_invert(sys, model, j, opts);
            rep.max_retraction = std::max(rep.max_retraction, gram_norm(*sys.structure_space, c.kappa));
        } catch (const Error&) {
            ++rep.outside_chart;
        }
    }
    return rep;
}

} // namespace moduli::slice
