#include "moduli/error.hpp"
#include "moduli/numerics/random.hpp"
#include "moduli/su2/geometry.hpp"
#include "moduli/su2/wigner.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace moduli;
using namespace moduli::su2;

namespace {

constexpr Complex kI(0.0, 1.0);

WignerPoly random_poly(numerics::Rng& rng, int two_j_max) {
    const WignerSpace s(two_j_max);
    return WignerPoly::from_complex(s, numerics::random_vector<Complex>(rng, s.dim()));
}

// Gauss-Legendre nodes/weights on [0, 1] by Golub-Welsch.
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        j(k, k - 1) = b;
        j(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    x = (es.eigenvalues().array() + 1.0) / 2.0;
    w = es.eigenvectors().row(0).transpose().array().square();
}

// Exact quadrature of polynomial integrands of degree < 2*grid on S^3 (Hopf coordinates).
template <class F>
Complex integrate_s3(int grid, int legendre, F f) {
    Eigen::VectorXd u, wu;
    gauss_legendre(legendre, u, wu);
    Complex acc(0.0);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int k = 0; k < legendre; ++k) {
        const double c = std::sqrt(1.0 - u(k));
        const double s = std::sqrt(u(k));
        for (int a = 0; a < grid; ++a)
            for (int b = 0; b < grid; ++b) {
                const double x1 = two_pi * a / grid;
                const double x2 = two_pi * b / grid;
                const Eigen::Vector4d q(c * std::cos(x1), s * std::cos(x2), s * std::sin(x2), c * std::sin(x1));
                acc += wu(k) * f(su2_from_quaternion(q));
            }
    }
    // volume element 1/2 du dx1 dx2
    return acc * 0.5 * (two_pi / grid) * (two_pi / grid);
}

// Left-invariant metric in the chart x -> sqrt(1-|x|^2) I + x_a X_a.
Eigen::Matrix3d chart_metric(const Eigen::Matrix3d& lambda, const Eigen::Vector3d& x) {
    const double w = std::sqrt(1.0 - x.squaredNorm());
    Su2 g = w * Eigen::Matrix2cd::Identity();
    for (int a = 0; a < 3; ++a) g += x(a) * generator(a);
    Eigen::Matrix3d theta; // theta(i, a)
    for (int i = 0; i < 3; ++i) {
        const Eigen::Matrix2cd dg = -(x(i) / w) * Eigen::Matrix2cd::Identity() + generator(i);
        const Eigen::Matrix2cd t = g.adjoint() * dg;
        for (int a = 0; a < 3; ++a) theta(i, a) = (t * generator(a).adjoint()).trace().real() / 2.0;
    }
    return theta * lambda * theta.transpose();
}

template <class F>
auto central4(F f, const Eigen::Vector3d& x, int i, double h) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(i) = h;
    return (-f(x + 2 * e) + 8.0 * f(x + e) - 8.0 * f(x - e) + f(x - 2 * e)) / (12.0 * h);
}

using Christoffel = std::array<Eigen::Matrix3d, 3>; // gamma[l](i, j)

Christoffel chart_christoffel(const Eigen::Matrix3d& lambda, const Eigen::Vector3d& x, double h) {
    auto metric = [&](const Eigen::Vector3d& y) { return Eigen::Matrix3d(chart_metric(lambda, y)); };
    std::array<Eigen::Matrix3d, 3> dg;
    for (int i = 0; i < 3; ++i) dg[static_cast<size_t>(i)] = central4(metric, x, i, h);
    const Eigen::Matrix3d ginv = metric(x).inverse();
    Christoffel gam;
    for (int l = 0; l < 3; ++l) {
        gam[static_cast<size_t>(l)].setZero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int m = 0; m < 3; ++m)
                    gam[static_cast<size_t>(l)](i, j) +=
                        0.5 * ginv(l, m) *
                        (dg[static_cast<size_t>(i)](j, m) + dg[static_cast<size_t>(j)](i, m) -
                         dg[static_cast<size_t>(m)](i, j));
    }
    return gam;
}

// Ricci tensor at the identity from finite differences of the chart connection.
Eigen::Matrix3d fd_ricci(const Eigen::Matrix3d& lambda) {
    const double h = 1e-3;
    const Eigen::Vector3d o = Eigen::Vector3d::Zero();
    const Christoffel g0 = chart_christoffel(lambda, o, h);
    std::array<Christoffel, 3> dgam; // dgam[i][l](j, k) = d_i Gamma^l_jk
    for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(i) = h;
        const auto p2 = chart_christoffel(lambda, o + 2 * e, h);
        const auto p1 = chart_christoffel(lambda, o + e, h);
        const auto m1 = chart_christoffel(lambda, o - e, h);
        const auto m2 = chart_christoffel(lambda, o - 2 * e, h);
        for (size_t l = 0; l < 3; ++l)
            dgam[static_cast<size_t>(i)][l] = (-p2[l] + 8.0 * p1[l] - 8.0 * m1[l] + m2[l]) / (12.0 * h);
    }
    auto G = [&](int l, int i, int j) { return g0[static_cast<size_t>(l)](i, j); };
    auto dG = [&](int i, int l, int j, int k) { return dgam[static_cast<size_t>(i)][static_cast<size_t>(l)](j, k); };
    Eigen::Matrix3d ric = Eigen::Matrix3d::Zero();
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i) {
                // R^i_{ijk} = d_i G^i_jk - d_j G^i_ik + G^i_im G^m_jk - G^i_jm G^m_ik
                double r = dG(i, i, j, k) - dG(j, i, i, k);
                for (int m = 0; m < 3; ++m) r += G(i, i, m) * G(m, j, k) - G(i, j, m) * G(m, i, k);
                ric(j, k) += r;
            }
    return ric;
}

// Milnor's closed form for [e2,e3] = l1 e1 etc. in an orthonormal frame.
Eigen::Vector3d milnor_ricci(const Eigen::Vector3d& lam) {
    const double m1 = 0.5 * (lam(1) + lam(2) - lam(0));
    const double m2 = 0.5 * (lam(2) + lam(0) - lam(1));
    const double m3 = 0.5 * (lam(0) + lam(1) - lam(2));
    return {2.0 * m2 * m3, 2.0 * m3 * m1, 2.0 * m1 * m2};
}

} // namespace

TEST_CASE("su2 group helpers") {
    const Eigen::Vector3d th(0.3, -0.2, 0.5);
    CHECK((su2_log(su2_exp(th)) - th).norm() < 1e-14);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const Eigen::Matrix2cd c = generator(a) * generator(b) - generator(b) * generator(a);
            Eigen::Matrix2cd expect = Eigen::Matrix2cd::Zero();
            const int k = 3 - a - b;
            if (a != b) expect = ((b - a + 3) % 3 == 1 ? 2.0 : -2.0) * generator(k);
            CHECK((c - expect).norm() < 1e-15);
        }
    const auto pts = sample_points(50);
    CHECK(pts.size() == 50);
    for (const auto& g : pts) {
        CHECK((g * g.adjoint() - Eigen::Matrix2cd::Identity()).norm() < 1e-14);
        CHECK(std::abs(g.determinant() - 1.0) < 1e-14);
    }
    CHECK((sample_points(7)[3] - pts[3]).norm() == 0.0);
}

TEST_CASE("Wigner matrices are a unitary representation with conjugation symmetry") {
    const auto pts = sample_points(12);
    for (int tj = 0; tj <= 4; ++tj)
        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            const auto d1 = wigner_matrix(tj, pts[i]);
            const auto d2 = wigner_matrix(tj, pts[i + 1]);
            const auto d12 = wigner_matrix(tj, pts[i] * pts[i + 1]);
            CHECK((d1 * d2 - d12).norm() < 1e-12);
            CHECK((d1 * d1.adjoint() - Eigen::MatrixXcd::Identity(tj + 1, tj + 1)).norm() < 1e-12);
            for (int im = 0; im <= tj; ++im)
                for (int in = 0; in <= tj; ++in) {
                    const int tm = m_value2(tj, im);
                    const int tn = m_value2(tj, in);
                    const Complex lhs = std::conj(d1(im, in));
                    const Complex rhs = static_cast<double>(conj_sign(tm, tn)) * d1(m_index(tj, -tm), m_index(tj, -tn));
                    CHECK(std::abs(lhs - rhs) < 1e-12);
                }
        }
    // D^{1/2} is the defining representation up to reordering of the basis
    const Su2 g = pts[5];
    const auto d = wigner_matrix(1, g);
    CHECK(std::abs(d(1, 1) - g(0, 0)) < 1e-13);
    CHECK(std::abs(d(0, 0) - g(1, 1)) < 1e-13);
}

TEST_CASE("Peter-Weyl Gram matches exact quadrature") {
    const WignerSpace s(3);
    const auto& basis = *s.complex_basis();
    double worst = 0.0;
    for (Index i = 0; i < s.dim(); ++i)
        for (Index k = i; k < s.dim(); ++k) {
            const auto pi = WignerPoly::single(s.labels()[static_cast<size_t>(i)]);
            const auto pk = WignerPoly::single(s.labels()[static_cast<size_t>(k)]);
            const Complex v = integrate_s3(8, 4, [&](const Su2& g) { return std::conj(pi.evaluate(g)) * pk.evaluate(g); });
            const double expect = i == k ? basis.weights()(i) : 0.0;
            worst = std::max(worst, std::abs(v - expect));
        }
    CHECK(worst < 1e-12);
    CHECK(std::abs(integrate_s3(4, 2, [](const Su2&) { return Complex(1.0); }) - kVolume) < 1e-12);
}

TEST_CASE("WignerSpace labels, conjugation closure and real basis") {
    for (int tjm = 0; tjm <= 6; ++tjm) {
        const WignerSpace s(tjm);
        Index expect = 0;
        for (int tj = 0; tj <= tjm; ++tj) expect += static_cast<Index>(tj + 1) * (tj + 1);
        CHECK(s.dim() == expect);
        CHECK(s.real_basis()->dim() == expect);
        for (const auto& l : s.labels()) CHECK_NOTHROW((void)s.index_of({l.tj, -l.tm, -l.tn}));
    }
    CHECK(WignerSpace(6).dim() == 140);
    CHECK_THROWS_AS(WignerSpace(-1), DomainError);

    // real basis functions are real-valued and round-trip through the complex coefficients
    const WignerSpace s(3);
    numerics::Rng rng(3);
    const Eigen::VectorXd r = numerics::random_vector<double>(rng, s.dim());
    const WignerPoly f = WignerPoly::from_real(s, r);
    for (const auto& g : sample_points(10)) CHECK(std::abs(f.evaluate(g).imag()) < 1e-12);
    CHECK((f.to_real(s) - r).norm() < 1e-12);
    // the real Gram is the L2 norm of the function
    CHECK(std::abs(numerics::norm<double>(*s.real_basis(), r) - f.norm()) < 1e-12);
}

TEST_CASE("Clebsch-Gordan coefficients and products") {
    // orthogonality: sum_{m1,m2} C(j1 m1 j2 m2|J M) C(j1 m1 j2 m2|J' M) = delta_JJ'
    for (int tj1 = 0; tj1 <= 4; ++tj1)
        for (int tj2 = 0; tj2 <= 3; ++tj2)
            for (int tJ = std::abs(tj1 - tj2); tJ <= tj1 + tj2; tJ += 2)
                for (int tJ2 = std::abs(tj1 - tj2); tJ2 <= tj1 + tj2; tJ2 += 2)
                    for (int tM = -std::min(tJ, tJ2); tM <= std::min(tJ, tJ2); tM += 2) {
                        double s = 0.0;
                        for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2)
                            s += clebsch_gordan(tj1, tm1, tj2, tM - tm1, tJ, tM) *
                                 clebsch_gordan(tj1, tm1, tj2, tM - tm1, tJ2, tM);
                        CHECK(std::abs(s - (tJ == tJ2 ? 1.0 : 0.0)) < 1e-13);
                    }
    // known values
    CHECK(std::abs(clebsch_gordan(1, 1, 1, -1, 0, 0) - std::sqrt(0.5)) < 1e-15);
    CHECK(std::abs(clebsch_gordan(1, -1, 1, 1, 0, 0) + std::sqrt(0.5)) < 1e-15);
    CHECK(std::abs(clebsch_gordan(2, 2, 2, -2, 4, 0) - std::sqrt(1.0 / 6.0)) < 1e-15);
    CHECK(clebsch_gordan(1, 1, 1, 1, 0, 2) == 0.0);

    numerics::Rng rng(11);
    for (int t = 0; t < 10; ++t) {
        const WignerPoly f = random_poly(rng, 3);
        const WignerPoly g = random_poly(rng, 2);
        const WignerPoly fg = f * g;
        CHECK(fg.max_tj() <= 5);
        for (const auto& x : sample_points(5))
            CHECK(std::abs(fg.evaluate(x) - f.evaluate(x) * g.evaluate(x)) < 1e-11 * (1.0 + f.norm() * g.norm()));
        CHECK(std::abs(fg.tail_norm(2) * fg.tail_norm(2) + fg.truncated(2).norm() * fg.truncated(2).norm() -
                       fg.norm() * fg.norm()) < 1e-9 * fg.norm() * fg.norm());
    }
}

TEST_CASE("frame_derivative examples") {
    const WignerSpace s(4);
    // constants are annihilated
    for (int a = 0; a < 3; ++a) {
        const auto m = frame_derivative(s, a);
        CHECK(m.entries.col(s.index_of({0, 0, 0})).norm() == 0.0);
    }
    // e_3 on D^{1/2}: diagonal with eigenvalues -i (n = 1/2) and +i (n = -1/2)
    const auto m3 = frame_derivative(s, 2);
    for (int tm : {-1, 1})
        for (int tn : {-1, 1}) {
            const Index i = s.index_of({1, tm, tn});
            CHECK(std::abs(m3.entries(i, i) - Complex(0.0, -tn)) < 1e-15);
            CHECK(std::abs(m3.entries.col(i).norm() - 1.0) < 1e-15);
        }
    // finite-difference flow oracle: e_3 f(g) = d/dt f(g exp(t X_3))
    numerics::Rng rng(5);
    const WignerPoly f = random_poly(rng, 4);
    const double h = 1e-4;
    for (int a = 0; a < 3; ++a) {
        const WignerPoly df = f.derivative(a);
        Eigen::Vector3d th = Eigen::Vector3d::Zero();
        th(a) = h;
        for (const auto& g : sample_points(6)) {
            const Complex fd = (-f.evaluate(g * su2_exp(2 * th)) + 8.0 * f.evaluate(g * su2_exp(th)) -
                                8.0 * f.evaluate(g * su2_exp(-th)) + f.evaluate(g * su2_exp(-2 * th))) /
                               (12.0 * h);
            CHECK(std::abs(fd - df.evaluate(g)) < 1e-8 * (1.0 + f.norm()));
        }
        // the coefficient matrix agrees with the polynomial derivative
        const Eigen::VectorXcd c = f.to_complex(s);
        CHECK((frame_derivative(s, a).entries * c - df.to_complex(s)).norm() < 1e-12 * c.norm());
    }
    CHECK_THROWS_AS(frame_derivative(s, 3), DomainError);
}

TEST_CASE("frame derivatives: commutators, skew-adjointness, j-block structure") {
    const WignerSpace s(5);
    const InvariantFrame fr = InvariantFrame::su2();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const auto ma = frame_derivative(s, a).entries;
            const auto mb = frame_derivative(s, b).entries;
            Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(s.dim(), s.dim());
            for (int k = 0; k < 3; ++k) rhs += fr.c[static_cast<size_t>(k)](a, b) * frame_derivative(s, k).entries;
            CHECK((ma * mb - mb * ma - rhs).cwiseAbs().maxCoeff() < 1e-10);
            const auto ra = frame_derivative_real(s, a).entries;
            const auto rb = frame_derivative_real(s, b).entries;
            Eigen::MatrixXd rr = Eigen::MatrixXd::Zero(s.dim(), s.dim());
            for (int k = 0; k < 3; ++k) rr += fr.c[static_cast<size_t>(k)](a, b) * frame_derivative_real(s, k).entries;
            CHECK((ra * rb - rb * ra - rr).cwiseAbs().maxCoeff() < 1e-10);
        }
    for (int a = 0; a < 3; ++a) {
        const auto m = frame_derivative(s, a).entries;
        const Eigen::MatrixXd g = s.complex_basis()->gram();
        CHECK((m.adjoint() * g + g * m).cwiseAbs().maxCoeff() < 1e-10);
        const auto r = frame_derivative_real(s, a).entries;
        const Eigen::MatrixXd gr = s.real_basis()->gram();
        CHECK((r.transpose() * gr + gr * r).cwiseAbs().maxCoeff() < 1e-10);
        for (Index i = 0; i < s.dim(); ++i)
            for (Index k = 0; k < s.dim(); ++k)
                if (s.labels()[static_cast<size_t>(i)].tj != s.labels()[static_cast<size_t>(k)].tj) {
                    CHECK(m(i, k) == Complex(0.0));
                    CHECK(r(i, k) == 0.0);
                }
    }
}

TEST_CASE("Leibniz rule for Clebsch-Gordan products") {
    numerics::Rng rng(21);
    for (int t = 0; t < 20; ++t) {
        const WignerPoly f = random_poly(rng, 3);
        const WignerPoly g = random_poly(rng, 3);
        for (int a = 0; a < 3; ++a) {
            const WignerPoly lhs = (f * g).derivative(a);
            const WignerPoly rhs = f.derivative(a) * g + f * g.derivative(a);
            CHECK((lhs - rhs).truncated(6).norm() < 1e-9 * (1.0 + lhs.norm()));
        }
    }
}

TEST_CASE("invariant frame constants") {
    const InvariantFrame f = InvariantFrame::su2();
    CHECK(f.antisymmetry_defect() == 0.0);
    CHECK(f.jacobi_defect() == 0.0);
    CHECK(f.c[2](0, 1) == 2.0);
    CHECK(f.c[0](1, 2) == 2.0);
    CHECK(f.c[1](2, 0) == 2.0);
    const Eigen::Matrix3d d = f.differential(Eigen::Vector3d(0, 0, 1));
    CHECK(d(0, 1) == -2.0);
}

TEST_CASE("standard Sasakian data") {
    const SasakiData s = standard_sasaki();
    const PointFrame& p = s.base();
    CHECK(standard_sigma() == -1);
    CHECK(std::abs(p.eta.dot(p.xi) - 1.0) < 1e-15);
    CHECK((p.deta.transpose() * p.xi).norm() < 1e-15);
    CHECK((p.xi - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
    CHECK(std::abs(p.xi.dot(p.metric * p.xi) - 1.0) < 1e-15);
    // d eta(e_1, Phi e_1) = |c_12^3|
    const Eigen::Vector3d e1(1, 0, 0);
    CHECK(std::abs(e1.dot(p.deta * (p.phi * e1)) - 2.0) < 1e-15);
    CHECK((p.phi * p.xi).norm() == 0.0);
    CHECK((p.metric - Eigen::Matrix3d::Identity()).norm() < 1e-15);
    CHECK(s.E.cols() == 2);
    // Phi on D^{0,1} is -i
    const Eigen::Vector3cd v = p.phi.cast<Complex>() * p.d01;
    CHECK((v + kI * p.d01).norm() < 1e-15);

    InvariantFrame flat;
    for (auto& m : flat.c) m.setZero();
    CHECK_THROWS_AS(standard_sasaki(flat), ConfigurationError);
}

TEST_CASE("einstein_residual") {
    CHECK(einstein_residual(LeftInvariantMetric::round()) <= 1e-12);
    const double squashed = einstein_residual(LeftInvariantMetric{1.0, 1.0, 2.0});
    CHECK(squashed > 0.1);
    CHECK(std::abs(squashed - 4.0) < 1e-12);
    for (double c : {0.5, 2.0, 3.0})
        CHECK(std::abs(einstein_residual(LeftInvariantMetric{c, c, c}) - std::abs(2.0 - 2.0 * c)) < 1e-12);
    CHECK_THROWS_AS(einstein_residual(LeftInvariantMetric{1.0, -1.0, 1.0}), DomainError);

    // Milnor closed form in the orthonormal frame f_a = e_a / sqrt(l_a)
    const InvariantFrame fr = InvariantFrame::su2();
    numerics::Rng rng(2);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int t = 0; t < 10; ++t) {
        const Eigen::Vector3d l(u(rng), u(rng), u(rng));
        const Eigen::Matrix3d ric = ricci(fr, l.asDiagonal());
        const Eigen::Vector3d lam(2.0 * std::sqrt(l(0) / (l(1) * l(2))), 2.0 * std::sqrt(l(1) / (l(2) * l(0))),
                                  2.0 * std::sqrt(l(2) / (l(0) * l(1))));
        const Eigen::Vector3d mr = milnor_ricci(lam);
        for (int a = 0; a < 3; ++a) CHECK(std::abs(ric(a, a) - mr(a) * l(a)) < 1e-12);
        CHECK(std::abs(ric(0, 1)) < 1e-12);
    }
}

TEST_CASE("einstein_residual against a finite-difference curvature oracle") {
    const InvariantFrame fr = InvariantFrame::su2();
    for (const Eigen::Vector3d& l : {Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, 1, 2), Eigen::Vector3d(0.7, 1.3, 1.1)}) {
        const Eigen::Matrix3d g = l.asDiagonal();
        const Eigen::Matrix3d fd = fd_ricci(g);
        CHECK((fd - ricci(fr, g)).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(std::abs((fd - 2.0 * g).cwiseAbs().maxCoeff() - einstein_residual(fr, g)) < 1e-6);
    }
    // non-diagonal metric
    Eigen::Matrix3d g;
    g << 1.2, 0.1, -0.2, 0.1, 0.9, 0.05, -0.2, 0.05, 1.4;
    CHECK((fd_ricci(g) - ricci(fr, g)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("basic_subspace dimensions") {
    auto count_oracle = [](int tjm) {
        const WignerSpace s(tjm);
        const auto m = frame_derivative(s, 2).entries;
        int zero = 0;
        for (Index i = 0; i < m.cols(); ++i)
            if (m.col(i).norm() == 0.0) ++zero;
        return zero;
    };
    CHECK(basic_subspace(WignerSpace(0)).size() == 1);
    CHECK(basic_subspace(WignerSpace(2)).size() == 4);
    CHECK(count_oracle(2) == 4);
    CHECK(basic_subspace(WignerSpace(4)).size() == 9);
    CHECK(basic_subspace(WignerSpace(4)).size() > basic_subspace(WignerSpace(2)).size());
    CHECK(static_cast<int>(basic_subspace(WignerSpace(6)).size()) == count_oracle(6));
    // basis vectors are Gram-orthonormal and xi-invariant
    const WignerSpace s(4);
    const auto b = basic_subspace(s);
    const auto e3 = frame_derivative_real(s, 2).entries;
    for (size_t i = 0; i < b.size(); ++i) {
        CHECK((e3 * b[i].values).norm() < 1e-12);
        for (size_t k = 0; k < b.size(); ++k)
            CHECK(std::abs(numerics::inner(b[i], b[k]) - (i == k ? 1.0 : 0.0)) < 1e-12);
    }
}
