#include "moduli/sasaki/deform.hpp"

#include "moduli/error.hpp"
#include "moduli/numerics/random.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace moduli::sasaki {

namespace {

constexpr Complex kI(0.0, 1.0);

size_t sz(int i) { return static_cast<size_t>(i); }

/// Orthonormal kernel of a dense matrix (Euclidean), singular values <= rel_tol sigma_max.
Eigen::MatrixXd dense_kernel(const Eigen::MatrixXd& m, double rel_tol) {
    const Index n = m.cols();
    if (n == 0) return Eigen::MatrixXd(0, 0);
    if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (smax > 0.0 && s(i) > rel_tol * smax) ++r;
    return svd.matrixV().rightCols(n - r);
}

/// Orthonormal basis of the column span (Euclidean).
Eigen::MatrixXd dense_image(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.cols() == 0 || m.rows() == 0) return Eigen::MatrixXd(m.rows(), 0);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (smax > 0.0 && s(i) > rel_tol * smax) ++r;
    return svd.matrixU().leftCols(r);
}

/// Orthonormal complement of span(a) (orthonormal columns) in R^n.
Eigen::MatrixXd complement(const Eigen::MatrixXd& a, Index n, double rel_tol) {
    if (a.cols() == 0) return Eigen::MatrixXd::Identity(n, n);
    return dense_kernel(a.transpose(), rel_tol);
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ComponentExpr complex_pair(int re, int im) { return {{re, 1.0}, {im, kI}}; }

/// Adapted frame of the standard structure: f_1 spans D^{0,1}, f_2 = xi, f_3 = conj(f_1).
AdaptedFrame adapted_frame(const SasakiData& base) {
    AdaptedFrame a;
    const su2::PointFrame& p = base.base();
    a.f[0] = p.d01;
    a.f[1] = p.xi.cast<Complex>();
    a.f[2] = p.d01.conjugate();
    Eigen::Matrix3cd m;
    for (int k = 0; k < 3; ++k) m.col(k) = a.f[sz(k)];
    a.to_adapted = m.inverse();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a.gamma[sz(i)][sz(j)] = a.to_adapted * base.frame.bracket(a.f[sz(i)], a.f[sz(j)]);
    return a;
}

/// Z-coefficient of a real field chi as a component expression over (chi_1, chi_2, chi_3).
ComponentExpr z_part(const DeformationSetup& s, int offset = 0) {
    ComponentExpr e;
    for (int a = 0; a < 3; ++a) {
        const Complex c = s.adapted.to_adapted(2, a);
        if (std::abs(c) > 1e-15) e.emplace_back(offset + a, c);
    }
    return e;
}

/// d alpha(u, v) with alpha in components offset..offset+2.
void add_d_alpha(FrameOperator& op, const DeformationSetup& s, Slot out, int offset, const Eigen::Vector3cd& u,
                 const Eigen::Vector3cd& v, Complex coef) {
    for (int b = 0; b < 3; ++b) {
        if (v(b) != 0.0) op.add_derivative(out, {{offset + b, v(b)}}, u, coef);
        if (u(b) != 0.0) op.add_derivative(out, {{offset + b, u(b)}}, v, -coef);
    }
    for (int k = 0; k < 3; ++k) {
        const Complex ck = (u.transpose() * s.base.frame.c[sz(k)].cast<Complex>() * v)(0, 0);
        if (ck != 0.0) op.add_zero_order(out, {{offset + k, 1.0}}, -coef * ck);
    }
}

Complex deta_pair(const DeformationSetup& s, const Eigen::Vector3cd& u, const Eigen::Vector3cd& v) {
    return (u.transpose() * s.deta.cast<Complex>() * v)(0, 0);
}

} // namespace

// ----------------------------------------------------------------------------
// SectionSpace

SectionSpace::SectionSpace(std::shared_ptr<const WignerSpace> w, std::string id, std::vector<std::string> comps,
                           std::vector<double> weights)
    : w_(std::move(w)), names_(std::move(comps)) {
    if (names_.size() != weights.size() || names_.empty()) throw DimensionError("section components and weights");
    weights_ = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Index>(weights.size()));
    const auto& fl = w_->real_basis()->labels();
    const Eigen::VectorXd& fw = w_->real_basis()->weights();
    std::vector<numerics::Label> labels;
    std::vector<double> gw;
    for (int tj = 0; tj <= w_->two_j_max(); ++tj) {
        const Index o = w_->block_offset(tj);
        for (int c = 0; c < components(); ++c)
            for (Index i = 0; i < WignerSpace::block_size(tj); ++i) {
                numerics::Label l{c};
                l.insert(l.end(), fl[static_cast<size_t>(o + i)].begin(), fl[static_cast<size_t>(o + i)].end());
                labels.push_back(std::move(l));
                gw.push_back(weights_(c) * fw(o + i));
            }
    }
    basis_ = numerics::LabeledBasis::diagonal(
        id, std::move(labels), Eigen::Map<const Eigen::VectorXd>(gw.data(), static_cast<Index>(gw.size())));
}

Index SectionSpace::block_offset(int tj) const { return components() * w_->block_offset(tj); }
Index SectionSpace::block_size(int tj) const { return components() * WignerSpace::block_size(tj); }

std::vector<Index> SectionSpace::block_indices(int tj) const {
    std::vector<Index> out(static_cast<size_t>(block_size(tj)));
    for (Index i = 0; i < block_size(tj); ++i) out[static_cast<size_t>(i)] = block_offset(tj) + i;
    return out;
}

Index SectionSpace::index(int tj, int comp, Index local) const {
    return block_offset(tj) + comp * WignerSpace::block_size(tj) + local;
}

Eigen::VectorXd SectionSpace::component(const Eigen::VectorXd& v, int comp) const {
    if (v.size() != dim()) throw DimensionError("section coordinates");
    Eigen::VectorXd out(w_->dim());
    for (int tj = 0; tj <= two_j_max(); ++tj)
        out.segment(w_->block_offset(tj), WignerSpace::block_size(tj)) =
            v.segment(index(tj, comp, 0), WignerSpace::block_size(tj));
    return out;
}

void SectionSpace::set_component(Eigen::VectorXd& v, int comp, const Eigen::VectorXd& coords) const {
    if (v.size() != dim() || coords.size() != w_->dim()) throw DimensionError("section coordinates");
    for (int tj = 0; tj <= two_j_max(); ++tj)
        v.segment(index(tj, comp, 0), WignerSpace::block_size(tj)) =
            coords.segment(w_->block_offset(tj), WignerSpace::block_size(tj));
}

WignerPoly SectionSpace::poly(const Eigen::VectorXd& v, int comp) const {
    return WignerPoly::from_real(*w_, component(v, comp));
}

void SectionSpace::set_poly(Eigen::VectorXd& v, int comp, const WignerPoly& p) const {
    set_component(v, comp, p.to_real(*w_));
}

Eigen::VectorXd SectionSpace::block_weights(int tj) const {
    return basis_->weights().segment(block_offset(tj), block_size(tj));
}

// ----------------------------------------------------------------------------
// FrameOperator

FrameOperator::FrameOperator(int out_components, int in_components) : out(out_components), in(in_components) {
    for (auto& a : A) a = Eigen::MatrixXd::Zero(out, in);
    B = Eigen::MatrixXd::Zero(out, in);
}

void FrameOperator::add_derivative(Slot o, const ComponentExpr& expr, const Eigen::Vector3cd& dir, Complex coef) {
    for (const auto& [comp, factor] : expr)
        for (int a = 0; a < 3; ++a) {
            const Complex k = coef * factor * dir(a);
            A[sz(a)](o.re, comp) += k.real();
            if (o.im >= 0) A[sz(a)](o.im, comp) += k.imag();
        }
}

void FrameOperator::add_zero_order(Slot o, const ComponentExpr& expr, Complex coef) {
    for (const auto& [comp, factor] : expr) {
        const Complex k = coef * factor;
        B(o.re, comp) += k.real();
        if (o.im >= 0) B(o.im, comp) += k.imag();
    }
}

FrameOperator FrameOperator::formal_adjoint(const Eigen::VectorXd& w_in, const Eigen::VectorXd& w_out) const {
    if (w_in.size() != in || w_out.size() != out) throw DimensionError("formal adjoint weights");
    FrameOperator r(in, out);
    const Eigen::MatrixXd wi = w_in.cwiseInverse().asDiagonal();
    for (size_t a = 0; a < 3; ++a) r.A[a] = -wi * A[a].transpose() * w_out.asDiagonal();
    r.B = wi * B.transpose() * w_out.asDiagonal();
    return r;
}

Eigen::MatrixXd FrameOperator::symbol(const Eigen::Vector3d& v) const {
    return v(0) * A[0] + v(1) * A[1] + v(2) * A[2];
}

FrameOperator FrameOperator::operator+(const FrameOperator& o) const {
    if (o.in != in || o.out != out) throw DimensionError("frame operator sum");
    FrameOperator r = *this;
    for (size_t a = 0; a < 3; ++a) r.A[a] += o.A[a];
    r.B += o.B;
    return r;
}

FrameOperator FrameOperator::placed(int out_total, int out_offset, int in_total, int in_offset) const {
    if (out_offset + out > out_total || in_offset + in > in_total) throw DimensionError("frame operator placement");
    FrameOperator r(out_total, in_total);
    for (size_t a = 0; a < 3; ++a) r.A[a].block(out_offset, in_offset, out, in) = A[a];
    r.B.block(out_offset, in_offset, out, in) = B;
    return r;
}

Eigen::MatrixXd FrameOperator::block(const WignerSpace& w, int tj) const {
    const Index n = WignerSpace::block_size(tj);
    Eigen::MatrixXd m = kron(B, Eigen::MatrixXd::Identity(n, n));
    for (int a = 0; a < 3; ++a)
        if (!A[sz(a)].isZero(0.0)) m += kron(A[sz(a)], w.real_frame_block(tj, a));
    return m;
}

BlockOperator<double> FrameOperator::assemble(const SectionSpace& dom, const SectionSpace& cod) const {
    if (dom.components() != in || cod.components() != out || dom.two_j_max() != cod.two_j_max())
        throw DimensionError("frame operator assembly");
    std::vector<numerics::OperatorBlock<double>> blocks;
    for (int tj = 0; tj <= dom.two_j_max(); ++tj) {
        numerics::OperatorBlock<double> b;
        b.dom = dom.block_indices(tj);
        b.cod = cod.block_indices(tj);
        b.entries = block(dom.wigner(), tj);
        blocks.push_back(std::move(b));
    }
    return BlockOperator<double>(dom.basis(), cod.basis(), std::move(blocks));
}

// ----------------------------------------------------------------------------
// Setup

DeformationSetup make_setup(int two_j_max, const InvariantFrame& frame) {
    if (two_j_max < 0) throw DomainError("two_j_max must be non-negative");
    DeformationSetup s;
    s.w = std::make_shared<const WignerSpace>(two_j_max);
    s.base = su2::standard_sasaki(frame);
    const su2::PointFrame& p = s.base.base();
    if ((p.eta - Eigen::Vector3d(0.0, 0.0, 1.0)).norm() > 1e-14 || (p.xi - Eigen::Vector3d(0.0, 0.0, 1.0)).norm() > 1e-12)
        throw ConfigurationError("the deformation layout assumes eta = e^3 and xi = e_3");
    s.eta = p.eta;
    s.deta = p.deta;
    s.metric = p.metric;
    if (!s.metric.isDiagonal(1e-14)) throw ConfigurationError("the deformation layout assumes a diagonal metric");
    s.metric_inv = s.metric.inverse();
    s.adapted = adapted_frame(s.base);

    // |omega|^2 = sum_k |omega_k|^2 |f_3|^2 / |f_k|^2 for the g-orthogonal pair (f_1, xi)
    auto hnorm = [&](const Eigen::Vector3cd& v) { return (v.adjoint() * s.metric.cast<Complex>() * v)(0, 0).real(); };
    const Complex cross = (s.adapted.f[0].adjoint() * s.metric.cast<Complex>() * s.adapted.f[1])(0, 0);
    if (std::abs(cross) > 1e-14) throw ConfigurationError("f_1 and xi are not orthogonal");
    const double w1 = hnorm(s.adapted.f[2]) / hnorm(s.adapted.f[0]);
    const double w3 = hnorm(s.adapted.f[2]) / hnorm(s.adapted.f[1]);
    const Eigen::Vector3d gi = s.metric_inv.diagonal();
    const Eigen::Vector3d g = s.metric.diagonal();

    s.fun = std::make_shared<const SectionSpace>(s.w, "fun", std::vector<std::string>{"h"}, std::vector<double>{1.0});
    s.cfun = std::make_shared<const SectionSpace>(s.w, "cfun", std::vector<std::string>{"re", "im"},
                                                  std::vector<double>{1.0, 1.0});
    s.vf = std::make_shared<const SectionSpace>(s.w, "vf", std::vector<std::string>{"chi1", "chi2", "chi3"},
                                                std::vector<double>{g(0), g(1), g(2)});
    s.form = std::make_shared<const SectionSpace>(s.w, "form", std::vector<std::string>{"alpha1", "alpha2", "alpha3"},
                                                  std::vector<double>{gi(0), gi(1), gi(2)});
    s.omega = std::make_shared<const SectionSpace>(
        s.w, "omega", std::vector<std::string>{"re_omega1", "im_omega1", "re_omega3", "im_omega3"},
        std::vector<double>{w1, w1, w3, w3});
    s.structure = std::make_shared<const SectionSpace>(
        s.w, "structure",
        std::vector<std::string>{"re_omega1", "im_omega1", "re_omega3", "im_omega3", "alpha1", "alpha2", "alpha3"},
        std::vector<double>{w1, w1, w3, w3, gi(0), gi(1), gi(2)});
    s.equations = std::make_shared<const SectionSpace>(s.w, "equations",
                                                       std::vector<std::string>{"re_mc", "im_mc", "re_q", "im_q"},
                                                       std::vector<double>{1.0, 1.0, 1.0, 1.0});
    return s;
}

// ----------------------------------------------------------------------------
// Operators

FrameOperator exterior_d(const DeformationSetup&) {
    FrameOperator op(3, 1);
    for (int b = 0; b < 3; ++b) op.A[sz(b)](b, 0) = 1.0;
    return op;
}

FrameOperator interior_deta(const DeformationSetup& s) {
    FrameOperator op(3, 3);
    // (i_chi d eta)_b = sum_a chi_a d eta(e_a, e_b)
    op.B = s.deta.transpose();
    return op;
}

FrameOperator lie_eta(const DeformationSetup& s) {
    FrameOperator op = interior_deta(s);
    // d(eta(chi))
    for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) op.A[sz(b)](b, a) += s.eta(a);
    return op;
}

FrameOperator dbar_t(const DeformationSetup& s) {
    FrameOperator op(4, 3);
    const ComponentExpr w = z_part(s);
    // omega_k = f_k w + w gamma_{k3}^3 for k = 1 (f_1) and k = 2 (xi)
    for (int k = 0; k < 2; ++k) {
        const Slot out{2 * k, 2 * k + 1};
        op.add_derivative(out, w, s.adapted.f[sz(k)]);
        op.add_zero_order(out, w, s.adapted.gamma[sz(k)][2](2));
    }
    return op;
}

FrameOperator general_P_operator(const DeformationSetup& s) {
    return dbar_t(s).placed(7, 0, 3, 0) + lie_eta(s).placed(7, 4, 3, 0);
}

FrameOperator mc_linear(const DeformationSetup& s) {
    FrameOperator op(2, 4);
    const Slot out{0, 1};
    const ComponentExpr w1 = complex_pair(0, 1);
    const ComponentExpr w3 = complex_pair(2, 3);
    const auto& g = s.adapted.gamma;
    op.add_derivative(out, w3, s.adapted.f[0]);
    op.add_derivative(out, w1, s.adapted.f[1], -1.0);
    op.add_zero_order(out, w3, g[0][2](2) - g[0][1](1));
    op.add_zero_order(out, w1, g[2][1](2) - g[0][1](0));
    return op;
}

FrameOperator d_alpha_on_E(const DeformationSetup& s) {
    FrameOperator op(2, 3);
    add_d_alpha(op, s, {0, 1}, 0, s.adapted.f[0], s.adapted.f[1], 1.0);
    return op;
}

FrameOperator q_linear(const DeformationSetup& s) {
    FrameOperator op = d_alpha_on_E(s).placed(2, 0, 7, 4);
    const Slot out{0, 1};
    const auto& f = s.adapted.f;
    op.add_zero_order(out, complex_pair(0, 1), -deta_pair(s, f[2], f[1]));
    op.add_zero_order(out, complex_pair(2, 3), -deta_pair(s, f[0], f[2]));
    return op;
}

FrameOperator reeb_contraction(const DeformationSetup& s) {
    FrameOperator op(1, 3);
    op.B.row(0) = s.base.base().xi.transpose();
    return op;
}

FrameOperator lie_xi_form(const DeformationSetup& s) {
    // (L_xi alpha)_b = xi(alpha_b) - sum_{a,c} xi_a c_ab^c alpha_c (xi constant)
    FrameOperator op(3, 3);
    const Eigen::Vector3d xi = s.base.base().xi;
    for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) op.A[sz(a)](b, b) += xi(a);
        for (int c = 0; c < 3; ++c)
            for (int a = 0; a < 3; ++a) op.B(b, c) -= xi(a) * s.base.frame.c[sz(c)](a, b);
    }
    return op;
}

FrameOperator integrability_linear(const DeformationSetup& s) {
    return mc_linear(s).placed(4, 0, 7, 0) + q_linear(s).placed(4, 2, 7, 0);
}

FrameOperator codifferential(const DeformationSetup& s) {
    FrameOperator op(1, 3);
    for (int a = 0; a < 3; ++a) op.A[sz(a)].row(0) = -s.metric_inv.row(a);
    return op;
}

FrameOperator sharp_deta(const DeformationSetup& s) {
    FrameOperator op(3, 3);
    op.B = -s.metric_inv * s.deta.transpose() * s.metric_inv;
    return op;
}

FrameOperator contact_P_star_operator(const DeformationSetup& s) {
    // the xi-coefficient of a field is chi_3 since xi = e_3
    return sharp_deta(s) + codifferential(s).placed(3, 2, 3, 0);
}

FrameOperator general_P_star_operator(const DeformationSetup& s) {
    const FrameOperator dbar = dbar_t(s);
    const FrameOperator dbar_star = dbar.formal_adjoint(s.vf->weights(), s.omega->weights());
    return dbar_star.placed(3, 0, 7, 0) + contact_P_star_operator(s).placed(3, 0, 7, 4);
}

// ----------------------------------------------------------------------------
// Reduced domains

Eigen::VectorXd ReducedDomain::lift(const SectionSpace& vf, const Eigen::VectorXd& r) const {
    if (r.size() != dim()) throw DimensionError("reduced coordinates");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(vf.dim());
    for (int tj = 0; tj <= vf.two_j_max(); ++tj) {
        const auto& e = embed[sz(tj)];
        v.segment(vf.block_offset(tj), vf.block_size(tj)) = e * r.segment(offsets[sz(tj)], e.cols());
    }
    return v;
}

Eigen::VectorXd ReducedDomain::project(const SectionSpace& vf, const Eigen::VectorXd& v) const {
    if (v.size() != vf.dim()) throw DimensionError("vector field coordinates");
    Eigen::VectorXd r(dim());
    for (int tj = 0; tj <= vf.two_j_max(); ++tj) {
        const auto& e = embed[sz(tj)];
        const Eigen::VectorXd gv = vf.block_weights(tj).cwiseProduct(v.segment(vf.block_offset(tj), vf.block_size(tj)));
        r.segment(offsets[sz(tj)], e.cols()) = e.transpose() * gv;
    }
    return r;
}

TransverseSpaces transverse_spaces(const DeformationSetup& s, double rel_tol) {
    TransverseSpaces t;
    const SectionSpace& vf = *s.vf;
    const FrameOperator dbar = dbar_t(s);
    const FrameOperator ideta = interior_deta(s);
    const FrameOperator d = exterior_d(s);
    for (int tj = 0; tj <= s.two_j_max(); ++tj) {
        const Index n = WignerSpace::block_size(tj);
        const Eigen::VectorXd wv = vf.block_weights(tj);
        const Eigen::VectorXd wo = s.omega->block_weights(tj).cwiseSqrt();
        const Eigen::VectorXd wf = s.form->block_weights(tj).cwiseSqrt();
        // Gram-orthonormal transverse columns (chi_1, chi_2 components)
        Eigen::MatrixXd tr = Eigen::MatrixXd::Zero(vf.block_size(tj), 2 * n);
        for (Index i = 0; i < 2 * n; ++i) tr(i, i) = 1.0 / std::sqrt(wv(i));
        const Eigen::MatrixXd kx = dense_kernel(wo.asDiagonal() * dbar.block(*s.w, tj) * tr, rel_tol);
        const Eigen::MatrixXd xn = tr * kx;
        const Eigen::MatrixXd img_d = dense_image(wf.asDiagonal() * d.block(*s.w, tj), rel_tol);
        Eigen::MatrixXd i_xn = wf.asDiagonal() * ideta.block(*s.w, tj) * xn;
        i_xn -= img_d * (img_d.transpose() * i_xn);
        const Eigen::MatrixXd ks = xn.cols() > 0 ? dense_kernel(i_xn, rel_tol) : Eigen::MatrixXd(0, 0);
        const Eigen::MatrixXd kx_s = kx * ks;
        t.transverse.push_back(tr);
        t.xn.push_back(xn);
        t.s.push_back(tr * kx_s);
        t.xn_prime.push_back(xn.cols() > 0 ? Eigen::MatrixXd(xn * complement(ks, xn.cols(), rel_tol))
                                           : Eigen::MatrixXd(vf.block_size(tj), 0));
        t.gamma0.push_back(tr * complement(kx_s, 2 * n, rel_tol));
        t.dim_xn += xn.cols();
        t.dim_s += ks.cols();
        t.dim_xn_prime += t.xn_prime.back().cols();
    }
    return t;
}

ReducedDomain reduced_domain(const DeformationSetup& s, const std::vector<Eigen::MatrixXd>& transverse, bool basic_h,
                             const std::string& id, double rel_tol) {
    ReducedDomain r;
    r.id = id;
    const SectionSpace& vf = *s.vf;
    std::vector<numerics::Label> labels;
    Index offset = 0;
    for (int tj = 0; tj <= s.two_j_max(); ++tj) {
        const Index n = WignerSpace::block_size(tj);
        const Eigen::VectorXd wv = vf.block_weights(tj);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(vf.block_size(tj), n);
        for (Index i = 0; i < n; ++i) h(2 * n + i, i) = 1.0 / std::sqrt(wv(2 * n + i));
        if (basic_h) {
            // xi-invariant h: e_3 h = 0, in Gram-orthonormal function coordinates
            const Eigen::VectorXd wfun = s.fun->block_weights(tj).cwiseSqrt();
            const Eigen::MatrixXd e3 = wfun.asDiagonal() * s.w->real_frame_block(tj, 2) * wfun.cwiseInverse().asDiagonal();
            h = h * dense_kernel(e3, rel_tol);
        }
        const Eigen::MatrixXd& t = transverse[sz(tj)];
        Eigen::MatrixXd e(vf.block_size(tj), h.cols() + t.cols());
        e << h, t;
        for (Index i = 0; i < e.cols(); ++i) labels.push_back({tj, static_cast<int>(i)});
        r.offsets.push_back(offset);
        offset += e.cols();
        r.embed.push_back(std::move(e));
    }
    r.basis = numerics::LabeledBasis::orthonormal(id, std::move(labels));
    return r;
}

BlockOperator<double> restrict_operator(const DeformationSetup& s, const FrameOperator& op, const SectionSpace& cod,
                                        const ReducedDomain& dom) {
    if (op.in != 3) throw DimensionError("restricted operators act on vector fields");
    std::vector<numerics::OperatorBlock<double>> blocks;
    for (int tj = 0; tj <= s.two_j_max(); ++tj) {
        numerics::OperatorBlock<double> b;
        const Index k = dom.embed[sz(tj)].cols();
        for (Index i = 0; i < k; ++i) b.dom.push_back(dom.offsets[sz(tj)] + i);
        b.cod = cod.block_indices(tj);
        b.entries = op.block(*s.w, tj) * dom.embed[sz(tj)];
        blocks.push_back(std::move(b));
    }
    return BlockOperator<double>(dom.basis, cod.basis(), std::move(blocks));
}

namespace {

/// Reduced-coordinate form of a vf-valued frame operator: c = E^T G (op x), per block.
BlockOperator<double> project_operator(const DeformationSetup& s, const FrameOperator& op, const SectionSpace& dom,
                                       const ReducedDomain& red) {
    std::vector<numerics::OperatorBlock<double>> blocks;
    for (int tj = 0; tj <= s.two_j_max(); ++tj) {
        numerics::OperatorBlock<double> b;
        b.dom = dom.block_indices(tj);
        const Index k = red.embed[sz(tj)].cols();
        for (Index i = 0; i < k; ++i) b.cod.push_back(red.offsets[sz(tj)] + i);
        b.entries = red.embed[sz(tj)].transpose() * s.vf->block_weights(tj).asDiagonal() * op.block(*s.w, tj);
        blocks.push_back(std::move(b));
    }
    return BlockOperator<double>(dom.basis(), red.basis, std::move(blocks));
}

} // namespace

ContactProblem contact_problem(const DeformationSetup& s, bool basic_h, double rel_tol) {
    ContactProblem c;
    c.spaces = transverse_spaces(s, rel_tol);
    c.domain = reduced_domain(s, c.spaces.xn_prime, basic_h, basic_h ? "contact-basic-domain" : "contact-domain",
                              rel_tol);
    c.P = restrict_operator(s, lie_eta(s), *s.form, c.domain);
    c.P_star = project_operator(s, contact_P_star_operator(s), *s.form, c.domain);
    return c;
}

GeneralProblem general_problem(const DeformationSetup& s, double rel_tol) {
    GeneralProblem g;
    g.spaces = transverse_spaces(s, rel_tol);
    g.domain = reduced_domain(s, g.spaces.gamma0, false, "general-domain", rel_tol);
    g.P = restrict_operator(s, general_P_operator(s), *s.structure, g.domain);
    g.P_star = project_operator(s, general_P_star_operator(s), *s.structure, g.domain);
    return g;
}

Eigen::VectorXd contact_P(const DeformationSetup&, const ContactProblem& c, const Eigen::VectorXd& u) {
    return c.P.apply(u);
}

Eigen::VectorXd contact_P_star(const DeformationSetup& s, const ContactProblem& c, const Eigen::VectorXd& alpha) {
    const Eigen::VectorXd full = contact_P_star_operator(s).assemble(*s.form, *s.vf).apply(alpha);
    return c.domain.project(*s.vf, full);
}

Eigen::VectorXd general_P(const DeformationSetup& s, const Eigen::VectorXd& chi) {
    return general_P_operator(s).assemble(*s.vf, *s.structure).apply(chi);
}

Eigen::VectorXd general_P_star(const DeformationSetup& s, const GeneralProblem& g, const Eigen::VectorXd& structure) {
    const Eigen::VectorXd full = general_P_star_operator(s).assemble(*s.structure, *s.vf).apply(structure);
    return g.domain.project(*s.vf, full);
}

VectorFieldSplit split_vector_field(const DeformationSetup& s, const Eigen::VectorXd& chi) {
    std::array<WignerPoly, 3> c;
    for (int a = 0; a < 3; ++a) c[sz(a)] = s.vf->poly(chi, a);
    auto coefficient = [&](int k) {
        WignerPoly p;
        for (int a = 0; a < 3; ++a) p += c[sz(a)] * s.adapted.to_adapted(k, a);
        return p;
    };
    VectorFieldSplit v;
    v.chi01 = coefficient(0);
    v.chi_xi = coefficient(1);
    v.chi10 = coefficient(2);
    return v;
}

// ----------------------------------------------------------------------------
// Slices

Index dense_kernel_dim(const Eigen::MatrixXd& m, double rel_tol) { return dense_kernel(m, rel_tol).cols(); }

namespace {

/// Whitened dense matrix of a block operator: sqrt(W_cod) M sqrt(W_dom)^{-1}.
Eigen::MatrixXd whitened(const BlockOperator<double>& op) {
    const Eigen::MatrixXd m = op.to_dense().entries;
    return op.codomain->weights().cwiseSqrt().asDiagonal() * m * op.domain->weights().cwiseSqrt().cwiseInverse().asDiagonal();
}

/// Dense oracle: kernel of [P^T W_cod; constraints] computed from the raw P matrix.
Index dense_slice_dim(const BlockOperator<double>& p, const BlockOperator<double>& q, double rel_tol) {
    // P* = W_dom^{-1} P^T W_cod; in whitened structure coordinates the kernel of P* is that of
    // (whitened P)^T, and the constraint rows are whitened the same way.
    const Eigen::MatrixXd pw = whitened(p);
    const Eigen::MatrixXd qw = whitened(q);
    Eigen::MatrixXd stacked(pw.cols() + qw.rows(), pw.rows());
    stacked << pw.transpose(), qw;
    return dense_kernel_dim(stacked, rel_tol);
}

KetaResult finish(const DeformationSetup& s, const BlockOperator<double>& p, const BlockOperator<double>& q,
                  bool dense_oracle, double rel_tol) {
    KetaResult r;
    r.two_j_max = s.two_j_max();
    r.model = slice::build_linear_slice<double>(p, &q, rel_tol);
    r.dim = r.model.K_tangent.dim();
    if (dense_oracle) r.dense_dim = dense_slice_dim(p, q, rel_tol);
    return r;
}

} // namespace

KetaResult keta_tangent(const DeformationSetup& s, bool dense_oracle, double rel_tol) {
    const ContactProblem c = contact_problem(s, false, rel_tol);
    const BlockOperator<double> q = d_alpha_on_E(s).assemble(*s.form, *s.cfun);
    return finish(s, c.P, q, dense_oracle, rel_tol);
}

KetaResult keta_prime_tangent(const DeformationSetup& s, bool dense_oracle, double rel_tol) {
    const ContactProblem c = contact_problem(s, true, rel_tol);
    const SectionSpace cons(s.w, "keta-prime-constraints", {"re", "im", "reeb"}, {1.0, 1.0, 1.0});
    const FrameOperator q = d_alpha_on_E(s).placed(3, 0, 3, 0) + reeb_contraction(s).placed(3, 2, 3, 0);
    return finish(s, c.P, q.assemble(*s.form, cons), dense_oracle, rel_tol);
}

KetaResult kuranishi_general(const DeformationSetup& s, bool dense_oracle, double rel_tol) {
    const GeneralProblem g = general_problem(s, rel_tol);
    const BlockOperator<double> q = integrability_linear(s).assemble(*s.structure, *s.equations);
    return finish(s, g.P, q, dense_oracle, rel_tol);
}

Index containment_defect(const SectionSpace& space, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         double rel_tol) {
    Eigen::MatrixXd both(space.dim(), a.cols() + b.cols());
    both << a, b;
    const Index r_both = numerics::span_rank<double>(*space.basis(), both, rel_tol);
    const Index r_b = numerics::span_rank<double>(*space.basis(), b, rel_tol);
    return r_both - r_b;
}

XnReport xn_report(const DeformationSetup& s, double rel_tol) {
    const TransverseSpaces t = transverse_spaces(s, rel_tol);
    XnReport r;
    r.two_j_max = s.two_j_max();
    r.dim_xn = t.dim_xn;
    r.dim_s = t.dim_s;
    r.dim_xn_prime = t.dim_xn_prime;
    r.local_moduli_regime = t.dim_xn == 0;
    return r;
}

BasicFormReport basic_11_forms(const DeformationSetup& s, double rel_tol) {
    // i_xi alpha = 0, L_xi alpha = 0, d alpha|_E = 0
    const SectionSpace cons(s.w, "basic-11-constraints", {"reeb", "lie1", "lie2", "lie3", "re", "im"},
                            {1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
    const FrameOperator q = reeb_contraction(s).placed(6, 0, 3, 0) + lie_xi_form(s).placed(6, 1, 3, 0) +
                            d_alpha_on_E(s).placed(6, 4, 3, 0);
    const BlockOperator<double> qb = q.assemble(*s.form, cons);
    const auto basic = numerics::kernel_basis(qb, rel_tol);
    const ContactProblem c = contact_problem(s, false, rel_tol);
    BasicFormReport r;
    r.two_j_max = s.two_j_max();
    r.dim_basic_11 = basic.dim();
    if (basic.dim() == 0) return r;
    // forms in the basic space annihilated by P*: kernel of P* restricted to it
    const Eigen::MatrixXd b = basic.dense();
    const Eigen::MatrixXd ps = c.P_star.to_dense().entries * b;
    r.dim_in_kernel = dense_kernel_dim(ps, rel_tol);
    return r;
}

// ----------------------------------------------------------------------------
// Symbol

Eigen::Matrix<double, 7, 3> symbol_formula(const DeformationSetup& s, const Eigen::Vector3d& v) {
    // omega_k = v(f_k) chi^{1,0}, alpha = (i_chi eta) v
    Eigen::Matrix<double, 7, 3> m = Eigen::Matrix<double, 7, 3>::Zero();
    for (int k = 0; k < 2; ++k) {
        const Complex vf = (v.cast<Complex>().transpose() * s.adapted.f[sz(k)])(0, 0);
        for (int a = 0; a < 3; ++a) {
            const Complex c = vf * s.adapted.to_adapted(2, a);
            m(2 * k, a) = c.real();
            m(2 * k + 1, a) = c.imag();
        }
    }
    for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) m(4 + b, a) = v(b) * s.eta(a);
    return m;
}

double symbol_sigma_min(const DeformationSetup& s, const Eigen::Vector3d& v) {
    const Eigen::MatrixXd sym = general_P_operator(s).symbol(v);
    const Eigen::VectorXd wo = s.structure->weights().cwiseSqrt();
    const Eigen::VectorXd wi = s.vf->weights().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd m = wo.asDiagonal() * sym * wi.asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().minCoeff();
}

SymbolReport symbol_check(const DeformationSetup& s, int samples, std::uint64_t seed) {
    if (samples < 1) throw DomainError("symbol_check needs at least one sample");
    numerics::Rng rng(seed);
    SymbolReport r;
    r.samples = samples;
    r.min_sigma = std::numeric_limits<double>::infinity();
    const FrameOperator p = general_P_operator(s);
    const Eigen::Vector3d gi_sqrt = s.metric_inv.diagonal().cwiseSqrt();
    for (int i = 0; i < samples; ++i) {
        Eigen::Vector3d v = numerics::random_vector<double>(rng, 3);
        // unit covector for the dual metric
        v /= gi_sqrt.cwiseProduct(v).norm();
        const double sm = symbol_sigma_min(s, v);
        if (sm < r.min_sigma) {
            r.min_sigma = sm;
            r.worst_covector = v;
        }
        r.max_sigma = std::max(r.max_sigma, sm);
        r.formula_defect = std::max(r.formula_defect, (p.symbol(v) - symbol_formula(s, v)).cwiseAbs().maxCoeff());
    }
    return r;
}

} // namespace moduli::sasaki
