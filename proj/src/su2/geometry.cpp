#include "moduli/su2/geometry.hpp"

#include "moduli/error.hpp"

#include <Eigen/Cholesky>

namespace moduli::su2 {

namespace {

double levi_civita(int a, int b, int c) {
    if (a == b || b == c || a == c) return 0.0;
    return ((b - a + 3) % 3 == 1) ? 1.0 : -1.0;
}

} // namespace

InvariantFrame InvariantFrame::su2() {
    InvariantFrame f;
    for (int k = 0; k < 3; ++k)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) f.c[static_cast<size_t>(k)](a, b) = 2.0 * levi_civita(a, b, k);
    return f;
}

Eigen::Vector3cd InvariantFrame::bracket(const Eigen::Vector3cd& u, const Eigen::Vector3cd& v) const {
    Eigen::Vector3cd out;
    for (int k = 0; k < 3; ++k) out(k) = u.transpose() * c[static_cast<size_t>(k)].cast<Complex>() * v;
    return out;
}

double InvariantFrame::antisymmetry_defect() const {
    double d = 0.0;
    for (const auto& m : c) d = std::max(d, (m + m.transpose()).cwiseAbs().maxCoeff());
    return d;
}

double InvariantFrame::jacobi_defect() const {
    double d = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int e = 0; e < 3; ++e)
                for (int l = 0; l < 3; ++l) {
                    // sum_k c_ab^k c_ke^l + cyclic
                    double s = 0.0;
                    for (int k = 0; k < 3; ++k) {
                        s += c[static_cast<size_t>(k)](a, b) * c[static_cast<size_t>(l)](k, e);
                        s += c[static_cast<size_t>(k)](b, e) * c[static_cast<size_t>(l)](k, a);
                        s += c[static_cast<size_t>(k)](e, a) * c[static_cast<size_t>(l)](k, b);
                    }
                    d = std::max(d, std::abs(s));
                }
    return d;
}

Eigen::Matrix3d InvariantFrame::differential(const Eigen::Vector3d& beta) const {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 3; ++k) m -= beta(k) * c[static_cast<size_t>(k)];
    return m;
}

Eigen::Matrix3d LeftInvariantMetric::matrix() const { return Eigen::Vector3d(l1, l2, l3).asDiagonal(); }

Eigen::Matrix3d ricci(const InvariantFrame& frame, const Eigen::Matrix3d& g) {
    Eigen::LLT<Eigen::Matrix3d> llt(g);
    if (llt.info() != Eigen::Success) throw DomainError("metric is not positive definite");
    // f_i = sum_a L_ai e_a is orthonormal for L = (chol^T)^{-1}
    const Eigen::Matrix3d lt = llt.matrixL().transpose();
    const Eigen::Matrix3d l = lt.inverse();
    // C[k](i, j) = <[f_i, f_j], f_k>
    std::array<Eigen::Matrix3d, 3> cf{};
    for (int k = 0; k < 3; ++k) cf[static_cast<size_t>(k)].setZero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d br = Eigen::Vector3d::Zero(); // in e-frame
            for (int k = 0; k < 3; ++k) br(k) = l.col(i).transpose() * frame.c[static_cast<size_t>(k)] * l.col(j);
            const Eigen::Vector3d inf = lt * br;
            for (int k = 0; k < 3; ++k) cf[static_cast<size_t>(k)](i, j) = inf(k);
        }
    auto C = [&](int i, int j, int k) { return cf[static_cast<size_t>(k)](i, j); };
    // nabla_{f_i} f_j = sum_k G[i](k, j) f_k (Koszul formula)
    std::array<Eigen::Matrix3d, 3> conn{};
    for (int i = 0; i < 3; ++i) {
        Eigen::Matrix3d a;
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) a(k, j) = 0.5 * (C(i, j, k) - C(j, k, i) + C(k, i, j));
        conn[static_cast<size_t>(i)] = a;
    }
    Eigen::Matrix3d ric = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Eigen::Matrix3d r = conn[static_cast<size_t>(i)] * conn[static_cast<size_t>(j)] -
                                conn[static_cast<size_t>(j)] * conn[static_cast<size_t>(i)];
            for (int q = 0; q < 3; ++q) r -= C(i, j, q) * conn[static_cast<size_t>(q)];
            // Ric(f_j, f_m) += <R(f_i, f_j) f_m, f_i>
            for (int m = 0; m < 3; ++m) ric(j, m) += r(i, m);
        }
    return lt.transpose() * ric * lt;
}

double einstein_residual(const InvariantFrame& frame, const Eigen::Matrix3d& g) {
    return (ricci(frame, g) - kEinsteinConstant * g).cwiseAbs().maxCoeff();
}

double einstein_residual(const LeftInvariantMetric& g) {
    if (!g.positive()) throw DomainError("metric coefficients must be positive");
    return einstein_residual(InvariantFrame::su2(), g.matrix());
}

namespace {

void check_axis(int a) {
    if (a < 0 || a > 2) throw DomainError("frame axis must be 0, 1 or 2");
}

} // namespace

numerics::ComplexOperator frame_derivative(const WignerSpace& s, int a) {
    check_axis(a);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(s.dim(), s.dim());
    for (int tj = 0; tj <= s.two_j_max(); ++tj) {
        const Index o = s.block_offset(tj);
        const Index n = WignerSpace::block_size(tj);
        m.block(o, o, n, n) = s.complex_frame_block(tj, a);
    }
    return {s.complex_basis(), s.complex_basis(), std::move(m)};
}

numerics::RealOperator frame_derivative_real(const WignerSpace& s, int a) {
    check_axis(a);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.dim(), s.dim());
    for (int tj = 0; tj <= s.two_j_max(); ++tj) {
        const Index o = s.block_offset(tj);
        const Index n = WignerSpace::block_size(tj);
        m.block(o, o, n, n) = s.real_frame_block(tj, a);
    }
    return {s.real_basis(), s.real_basis(), std::move(m)};
}

BlockOperator<double> frame_derivative_blocks(const WignerSpace& s, int a) {
    check_axis(a);
    std::vector<numerics::OperatorBlock<double>> blocks;
    for (int tj = 0; tj <= s.two_j_max(); ++tj) {
        numerics::OperatorBlock<double> b;
        const Index o = s.block_offset(tj);
        for (Index i = 0; i < WignerSpace::block_size(tj); ++i) b.dom.push_back(o + i);
        b.cod = b.dom;
        b.entries = s.real_frame_block(tj, a);
        blocks.push_back(std::move(b));
    }
    return BlockOperator<double>(s.real_basis(), s.real_basis(), std::move(blocks));
}

std::vector<numerics::Coefficients<double>> basic_subspace(const WignerSpace& s, double rel_tol) {
    const auto ker = numerics::kernel_basis(frame_derivative_blocks(s, 2), rel_tol);
    std::vector<numerics::Coefficients<double>> out;
    for (Index i = 0; i < ker.dim(); ++i) out.push_back(ker.vector(i));
    return out;
}

OneForm OneForm::coframe(int a) {
    check_axis(a);
    OneForm f;
    f.comp[static_cast<size_t>(a)] = WignerPoly::constant(1.0);
    return f;
}

OneForm OneForm::times(const WignerPoly& f) const {
    OneForm out;
    for (size_t a = 0; a < 3; ++a) out.comp[a] = comp[a] * f;
    return out;
}

OneForm OneForm::operator+(const OneForm& o) const {
    OneForm out;
    for (size_t a = 0; a < 3; ++a) out.comp[a] = comp[a] + o.comp[a];
    return out;
}

OneForm OneForm::operator*(double s) const {
    OneForm out;
    for (size_t a = 0; a < 3; ++a) out.comp[a] = comp[a] * Complex(s);
    return out;
}

Eigen::Vector3d OneForm::value(const Su2& g) const {
    Eigen::Vector3d v;
    for (int a = 0; a < 3; ++a) v(a) = comp[static_cast<size_t>(a)].evaluate(g).real();
    return v;
}

std::array<std::array<WignerPoly, 3>, 3> OneForm::differential(const InvariantFrame& frame) const {
    std::array<std::array<WignerPoly, 3>, 3> d;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            WignerPoly p = comp[static_cast<size_t>(b)].derivative(a) - comp[static_cast<size_t>(a)].derivative(b);
            for (int k = 0; k < 3; ++k) {
                const double ck = frame.c[static_cast<size_t>(k)](a, b);
                if (ck != 0.0) p -= comp[static_cast<size_t>(k)] * Complex(ck);
            }
            d[static_cast<size_t>(a)][static_cast<size_t>(b)] = std::move(p);
        }
    return d;
}

Eigen::Matrix3d OneForm::differential_at(const InvariantFrame& frame, const Su2& g) const {
    const auto d = differential(frame);
    Eigen::Matrix3d m;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) m(a, b) = d[static_cast<size_t>(a)][static_cast<size_t>(b)].evaluate(g).real();
    return m;
}

bool OneForm::left_invariant() const {
    for (const auto& p : comp)
        for (const auto& [l, c] : p.terms())
            if (l.tj != 0) return false;
    return true;
}

int standard_sigma(const InvariantFrame& frame) {
    const Eigen::Matrix3d deta = frame.differential(Eigen::Vector3d(0.0, 0.0, 1.0));
    // d eta(e_1, Phi e_1) = sigma d eta(e_1, e_2)
    for (int sigma : {1, -1})
        if (sigma * deta(0, 1) > 0.0) return sigma;
    throw ConfigurationError("no sign of Phi makes d eta(V, Phi V) positive on D");
}

SasakiData standard_sasaki(const InvariantFrame& frame) {
    const int sigma = standard_sigma(frame);
    SasakiData s;
    s.frame = frame;
    s.eta = OneForm::coframe(2);
    s.left_invariant = true;
    PointFrame p;
    p.eta = Eigen::Vector3d(0.0, 0.0, 1.0);
    p.deta = frame.differential(p.eta);
    // i_xi eta = 1, i_xi d eta = 0
    Eigen::Matrix<double, 4, 3> sys;
    sys.row(0) = p.eta.transpose();
    sys.bottomRows<3>() = p.deta.transpose();
    p.xi = sys.colPivHouseholderQr().solve(Eigen::Vector4d(1.0, 0.0, 0.0, 0.0));
    p.phi.setZero();
    p.phi(1, 0) = sigma;
    p.phi(0, 1) = -sigma;
    p.metric = 0.5 * p.deta * p.phi + p.eta * p.eta.transpose();
    p.d01 = Eigen::Vector3cd(1.0, Complex(0.0, sigma), 0.0);
    s.E.resize(3, 2);
    s.E.col(0) = p.d01;
    s.E.col(1) = p.xi.cast<Complex>();
    s.points.push_back(p);
    return s;
}

} // namespace moduli::su2
