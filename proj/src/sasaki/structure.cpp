#include "moduli/sasaki/structure.hpp"

#include "moduli/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>

namespace moduli::sasaki {

namespace {

constexpr numerics::Complex kI(0.0, 1.0);
constexpr int kDirections = 16;
constexpr double kRankTol = 1e-10;

Eigen::Index complex_rank(const Eigen::MatrixXcd& m) {
    if (m.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > kRankTol * s(0)) ++r;
    return r;
}

/// Orthonormal basis (Hermitian) of the column span.
Eigen::MatrixXcd orthonormal_span(const Eigen::MatrixXcd& m) {
    if (m.cols() == 0) return Eigen::MatrixXcd(m.rows(), 0);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(0) > 0.0 && s(i) > kRankTol * s(0)) ++r;
    return svd.matrixU().leftCols(r);
}

/// Kernel of a complex row vector acting on coefficient space (orthonormal columns).
Eigen::MatrixXcd row_kernel(const Eigen::RowVectorXcd& row) {
    const Eigen::Index k = row.size();
    if (row.norm() <= kRankTol) return Eigen::MatrixXcd::Identity(k, k);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(row, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(k - 1);
}

double distance_to_span(const Eigen::MatrixXcd& q, const Eigen::Vector3cd& v) {
    const double n = v.norm();
    if (n == 0.0) return 0.0;
    return (v - q * (q.adjoint() * v)).norm() / n;
}

/// Orthonormal real basis of Ker eta.
Eigen::Matrix<double, 3, 2> contact_plane(const Eigen::Vector3d& eta) {
    Eigen::JacobiSVD<Eigen::Matrix<double, 1, 3>> svd(eta.transpose(), Eigen::ComputeFullV);
    return svd.matrixV().rightCols<2>();
}

/// The line L = E cap D_C at a point: generator (zero columns if L = 0, two if L = D_C).
Eigen::MatrixXcd line_in_contact_plane(const Eigen::MatrixXcd& q, const Eigen::Vector3d& eta) {
    const Eigen::RowVectorXcd row = eta.cast<numerics::Complex>().transpose() * q;
    const Eigen::MatrixXcd ker = row_kernel(row);
    return orthonormal_span(q * ker);
}

struct Positivity {
    double min = std::numeric_limits<double>::infinity();
    bool vacuous = true;
};

/// min over unit u in D of 2i d eta(V, conj V), V the L-component of u.
Positivity positivity_at(const Eigen::MatrixXcd& l, const Eigen::Vector3d& eta, const Eigen::Matrix3d& deta) {
    Positivity p;
    if (l.cols() == 0) return p;
    p.vacuous = false;
    const Eigen::Matrix<double, 3, 2> plane = contact_plane(eta);
    const Eigen::Matrix3cd om = deta.cast<numerics::Complex>();
    auto form = [&](const Eigen::Vector3cd& v) {
        const numerics::Complex val = 2.0 * kI * (v.transpose() * om * v.conjugate())(0, 0);
        return val.real();
    };
    for (int k = 0; k < kDirections; ++k) {
        const double th = std::numbers::pi * k / kDirections;
        const Eigen::Vector3d u = std::cos(th) * plane.col(0) + std::sin(th) * plane.col(1);
        Eigen::Vector3cd v;
        if (l.cols() >= 2) {
            v = u.cast<numerics::Complex>();
        } else {
            const Eigen::Vector3cd ell = l.col(0);
            // u = a ell + b conj(ell) in the plane coordinates
            Eigen::Matrix2cd sys;
            const Eigen::Vector2cd c = plane.transpose().cast<numerics::Complex>() * ell;
            sys.col(0) = c;
            sys.col(1) = c.conjugate();
            if (std::abs(sys.determinant()) <= kRankTol) {
                // real line: u has no splitting, the form degenerates
                p.min = std::min(p.min, 0.0);
                continue;
            }
            const Eigen::Vector2cd ab = sys.fullPivLu().solve(Eigen::Vector2cd(std::cos(th), std::sin(th)));
            v = ab(0) * ell;
        }
        p.min = std::min(p.min, form(v));
    }
    return p;
}

} // namespace

std::vector<Su2> evaluation_points(const OneForm& eta, int samples) {
    if (eta.left_invariant()) return {Su2::Identity()};
    if (samples < 1) throw DomainError("at least one sample point is required");
    return su2::sample_points(samples);
}

Eigen::Vector3d reeb_at(const Eigen::Vector3d& eta, const Eigen::Matrix3d& deta) {
    // kernel of the antisymmetric d eta
    const Eigen::Vector3d k(deta(1, 2), deta(2, 0), deta(0, 1));
    const double vol = eta.dot(k);
    if (std::abs(vol) <= 1e-12 * std::max(1e-300, eta.norm() * k.norm()) || k.norm() == 0.0)
        throw NotContactError("eta ^ d eta vanishes at a sample point");
    return k / vol;
}

ReebField reeb_solve(const InvariantFrame& frame, const OneForm& eta, int samples) {
    ReebField r;
    r.points = evaluation_points(eta, samples);
    const auto d = eta.differential(frame);
    for (const Su2& x : r.points) {
        const Eigen::Vector3d e = eta.value(x);
        Eigen::Matrix3d om;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) om(a, b) = d[static_cast<size_t>(a)][static_cast<size_t>(b)].evaluate(x).real();
        const Eigen::Vector3d xi = reeb_at(e, om);
        r.eta_residual = std::max(r.eta_residual, std::abs(e.dot(xi) - 1.0));
        r.deta_residual = std::max(r.deta_residual, (om.transpose() * xi).cwiseAbs().maxCoeff());
        r.xi.push_back(xi);
    }
    return r;
}

std::vector<int> EcharReport::failing() const {
    std::vector<int> out;
    for (int i = 0; i < 5; ++i)
        if (!pass[static_cast<size_t>(i)]) out.push_back(i + 1);
    return out;
}

EcharReport echar_verify(const InvariantFrame& frame, const ComplexFrameSpan& E, const OneForm& eta, int samples) {
    EcharReport rep;
    const Eigen::MatrixXcd e = E;
    const Eigen::MatrixXcd q = orthonormal_span(e);
    Eigen::MatrixXcd both(3, 2 * e.cols());
    both << e, e.conjugate();
    const Eigen::Index r_sum = complex_rank(both);
    rep.residual[0] = static_cast<double>(3 - r_sum);

    const Eigen::Index r_e = q.cols();
    const Eigen::Index dim_cap = 2 * r_e - r_sum;
    double reeb_dist = 0.0;
    double deta_e = 0.0;
    Positivity pos;
    const auto points = evaluation_points(eta, samples);
    rep.points = static_cast<int>(points.size());
    const auto d = eta.differential(frame);
    for (const Su2& x : points) {
        const Eigen::Vector3d ev = eta.value(x);
        Eigen::Matrix3d om;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) om(a, b) = d[static_cast<size_t>(a)][static_cast<size_t>(b)].evaluate(x).real();
        try {
            const Eigen::Vector3d xi = reeb_at(ev, om);
            reeb_dist = std::max(reeb_dist, distance_to_span(q, xi.cast<numerics::Complex>()));
        } catch (const NotContactError&) {
            rep.contact = false;
        }
        const Eigen::MatrixXcd dq = q.transpose() * om.cast<numerics::Complex>() * q;
        if (dq.size() > 0) deta_e = std::max(deta_e, dq.cwiseAbs().maxCoeff());
        const Positivity p = positivity_at(line_in_contact_plane(q, ev), ev, om);
        pos.vacuous = pos.vacuous && p.vacuous;
        pos.min = std::min(pos.min, p.min);
    }
    rep.residual[1] = rep.contact ? std::abs(static_cast<double>(dim_cap) - 1.0) + reeb_dist
                                  : std::numeric_limits<double>::infinity();

    double invol = 0.0;
    for (Eigen::Index i = 0; i < e.cols(); ++i)
        for (Eigen::Index j = i + 1; j < e.cols(); ++j) {
            const double scale = e.col(i).norm() * e.col(j).norm();
            if (scale == 0.0) continue;
            const Eigen::Vector3cd br = frame.bracket(e.col(i), e.col(j));
            invol = std::max(invol, (br - q * (q.adjoint() * br)).norm() / scale);
        }
    rep.residual[2] = invol;
    rep.residual[3] = deta_e;
    rep.positivity_vacuous = pos.vacuous;
    rep.residual[4] = pos.min;
    for (size_t i = 0; i < 4; ++i) rep.pass[i] = rep.residual[i] <= kEcharTol;
    rep.pass[4] = rep.positivity_vacuous || rep.residual[4] > 0.0;
    return rep;
}

Eigen::Matrix3d unsymmetrized_metric(const PointFrame& p) {
    return 0.5 * p.deta * p.phi + p.eta * p.eta.transpose();
}

SasakiData build_structure(const InvariantFrame& frame, const ComplexFrameSpan& E, const OneForm& eta, int samples) {
    const EcharReport rep = echar_verify(frame, E, eta, samples);
    if (!rep.pass[0]) throw DomainError("E + conj(E) does not span the complexified tangent space");
    if (!rep.contact) throw NotContactError("eta ^ d eta vanishes at a sample point");
    if (!rep.pass[4]) throw NotPositiveContactError("d eta(V, i conj V) + d eta(conj V, -i V) is not positive");

    SasakiData s;
    s.frame = frame;
    s.E = E;
    s.eta = eta;
    s.left_invariant = eta.left_invariant();
    const Eigen::MatrixXcd q = orthonormal_span(E);
    const auto d = eta.differential(frame);
    for (const Su2& x : evaluation_points(eta, samples)) {
        PointFrame p;
        p.x = x;
        p.eta = eta.value(x);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                p.deta(a, b) = d[static_cast<size_t>(a)][static_cast<size_t>(b)].evaluate(x).real();
        p.xi = reeb_at(p.eta, p.deta);
        const Eigen::MatrixXcd l = line_in_contact_plane(q, p.eta);
        if (l.cols() != 1) throw NotPositiveContactError("E cap D_C is not a line");
        const Eigen::Vector3cd ell = l.col(0);
        Eigen::Matrix3cd basis;
        basis << p.xi.cast<numerics::Complex>(), ell, ell.conjugate();
        Eigen::FullPivLU<Eigen::Matrix3cd> lu(basis);
        if (!lu.isInvertible()) throw NotPositiveContactError("E cap D_C is a real line");
        const Eigen::Vector3cd diag(0.0, -kI, kI);
        const Eigen::Matrix3cd phi = basis * diag.asDiagonal() * lu.inverse();
        p.phi = phi.real();
        p.d01 = ell;
        const Eigen::Matrix3d dphi = p.deta * p.phi;
        p.metric = 0.25 * (dphi + dphi.transpose()) + p.eta * p.eta.transpose();
        Eigen::LLT<Eigen::Matrix3d> llt(p.metric);
        if (llt.info() != Eigen::Success || p.metric.eigenvalues().real().minCoeff() <= 0.0)
            throw NotPositiveContactError("the induced metric is not positive definite");
        s.points.push_back(p);
    }
    return s;
}

} // namespace moduli::sasaki
