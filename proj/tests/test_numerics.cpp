#include <doctest.h>

#include "moduli/error.hpp"
#include "moduli/numerics/linalg.hpp"
#include "moduli/numerics/newton.hpp"
#include "moduli/numerics/random.hpp"

using namespace moduli::numerics;

namespace {

Eigen::MatrixXd random_spd(Rng& rng, Index n) {
    Eigen::MatrixXd a(n, n);
    for (Index i = 0; i < n; ++i) a.col(i) = random_vector<double>(rng, n);
    return a * a.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

BasisPtr spd_basis(Rng& rng, const std::string& id, Index n) {
    std::vector<Label> labels;
    for (Index i = 0; i < n; ++i) labels.push_back({static_cast<int>(i)});
    return std::make_shared<const LabeledBasis>(id, labels, random_spd(rng, n));
}

} // namespace

TEST_CASE("labeled basis validation") {
    CHECK_THROWS_AS(LabeledBasis("dup", {{0}, {0}}, Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2))), moduli::InvalidBasisError);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
    asym(0, 1) = 0.1;
    CHECK_THROWS_AS(LabeledBasis("asym", {{0}, {1}}, asym), moduli::InvalidBasisError);
    Eigen::MatrixXd indef = Eigen::MatrixXd::Identity(2, 2);
    indef(1, 1) = -1.0;
    CHECK_THROWS_AS(LabeledBasis("indef", {{0}, {1}}, indef), moduli::InvalidBasisError);
    auto b = LabeledBasis::euclidean("e", 3);
    CHECK(b->dim() == 3);
    CHECK(b->index_of({2}).value() == 2);
    CHECK_FALSE(b->index_of({7}).has_value());
}

TEST_CASE("gram_adjoint examples") {
    auto e = LabeledBasis::euclidean("e", 3);
    RealOperator id(e, e, Eigen::MatrixXd::Identity(3, 3));
    CHECK((gram_adjoint(id).entries - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);

    // A = 2 from Gram 1 to Gram 3: <Au,w> = 3*2*u*w = <u, 6 w>
    auto d = LabeledBasis::diagonal("d", {{0}}, Eigen::VectorXd::Constant(1, 1.0));
    auto c = LabeledBasis::diagonal("c", {{0}}, Eigen::VectorXd::Constant(1, 3.0));
    RealOperator a(d, c, Eigen::MatrixXd::Constant(1, 1, 2.0));
    const RealOperator as = gram_adjoint(a);
    CHECK(as.entries(0, 0) == doctest::Approx(6.0));
    const double lhs = 3.0 * (2.0 * 1.0) * 1.0; // <A e, e>_cod by hand
    const double rhs = 1.0 * 1.0 * (as.entries(0, 0) * 1.0);
    CHECK(lhs == doctest::Approx(rhs));
}

TEST_CASE("gram_adjoint identity on random SPD Grams") {
    Rng rng(11);
    auto dom = spd_basis(rng, "dom", 7);
    auto cod = spd_basis(rng, "cod", 5);
    Eigen::MatrixXd m(5, 7);
    for (Index i = 0; i < 7; ++i) m.col(i) = random_vector<double>(rng, 5);
    RealOperator a(dom, cod, m);
    const RealOperator as = gram_adjoint(a);
    // oracle: direct inner-product evaluation u^T G v
    const double pn = operator_norm(a);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
        Eigen::VectorXd u = random_vector<double>(rng, 7);
        Eigen::VectorXd w = random_vector<double>(rng, 5);
        const double lhs = (m * u).dot(cod->gram() * w);
        const double rhs = u.dot(dom->gram() * (as.entries * w));
        const double nu = std::sqrt(u.dot(dom->gram() * u));
        const double nw = std::sqrt(w.dot(cod->gram() * w));
        worst = std::max(worst, std::abs(lhs - rhs) / (pn * nu * nw));
    }
    CHECK(worst <= 1e-10);
    const RealOperator ass = gram_adjoint(as);
    CHECK((ass.entries - m).cwiseAbs().maxCoeff() <= 1e-12 * m.cwiseAbs().maxCoeff());
}

TEST_CASE("gram_adjoint complex blocks") {
    Rng rng(5);
    auto dom = LabeledBasis::diagonal("dom", {{0}, {1}, {2}, {3}}, Eigen::Vector4d(1.0, 2.0, 0.5, 3.0));
    auto cod = LabeledBasis::diagonal("cod", {{0}, {1}, {2}}, Eigen::Vector3d(4.0, 1.0, 0.25));
    OperatorBlock<Complex> b1{{0, 2}, {1}, Matrix<Complex>(1, 2)};
    b1.entries << Complex(1, 2), Complex(-0.5, 0.3);
    OperatorBlock<Complex> b2{{1, 3}, {0, 2}, Matrix<Complex>(2, 2)};
    b2.entries << Complex(0, 1), Complex(2, 0), Complex(1, 1), Complex(0, -3);
    BlockOperator<Complex> op(dom, cod, {b1, b2});
    const auto adj = gram_adjoint(op);
    CHECK(adjoint_defect(op, adj, 100, 3) <= 1e-12);
    const auto dense_adj = gram_adjoint(op.to_dense());
    CHECK((adj.to_dense().entries - dense_adj.entries).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("kernel_basis examples") {
    auto e4 = LabeledBasis::euclidean("e4", 4);
    RealOperator zero(e4, e4, Eigen::MatrixXd::Zero(4, 4));
    CHECK(kernel_basis(zero).dim() == 4);
    RealOperator id(e4, e4, Eigen::MatrixXd::Identity(4, 4));
    CHECK(kernel_basis(id).dim() == 0);

    auto e3 = LabeledBasis::euclidean("e3", 3);
    Eigen::Vector3d u(1.0, -2.0, 0.5);
    Eigen::Vector3d v(0.3, 1.0, 2.0);
    RealOperator r1(e3, e3, u * v.transpose());
    const auto k = kernel_basis(r1);
    REQUIRE(k.dim() == 2);
    const Eigen::MatrixXd kd = k.dense();
    CHECK((v.transpose() * kd).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((r1.entries * kd).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("kernel_basis is Gram-orthonormal and annihilated") {
    Rng rng(21);
    auto dom = spd_basis(rng, "dom", 8);
    auto cod = spd_basis(rng, "cod", 6);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 8);
    for (int k = 0; k < 3; ++k) m += random_vector<double>(rng, 6) * random_vector<double>(rng, 8).transpose();
    RealOperator a(dom, cod, m);
    const auto k = kernel_basis(a);
    REQUIRE(k.dim() == 5);
    const Eigen::MatrixXd kd = k.dense();
    const Eigen::MatrixXd g = kd.transpose() * dom->gram() * kd;
    CHECK((g - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
    const double smax = operator_norm(a);
    for (Index i = 0; i < kd.cols(); ++i) {
        const Eigen::VectorXd av = m * kd.col(i);
        CHECK(std::sqrt(av.dot(cod->gram() * av)) <= 1e-8 * smax);
    }
}

TEST_CASE("rank examples") {
    auto e5 = LabeledBasis::euclidean("e5", 5);
    CHECK(rank(RealOperator(e5, e5, Eigen::MatrixXd::Identity(5, 5))) == 5);
    CHECK(rank(RealOperator(e5, e5, Eigen::MatrixXd::Zero(5, 5))) == 0);
    Rng rng(3);
    Eigen::MatrixXd m = random_vector<double>(rng, 5) * random_vector<double>(rng, 5).transpose() +
                        random_vector<double>(rng, 5) * random_vector<double>(rng, 5).transpose();
    CHECK(rank(RealOperator(e5, e5, m)) == 2);
}

TEST_CASE("block operators agree with their dense form") {
    auto dom = LabeledBasis::diagonal("dom", {{0}, {1}, {2}, {3}, {4}}, Eigen::VectorXd::LinSpaced(5, 1.0, 3.0));
    auto cod = LabeledBasis::diagonal("cod", {{0}, {1}, {2}}, Eigen::VectorXd::LinSpaced(3, 0.5, 2.0));
    OperatorBlock<double> b1{{0, 3}, {2}, Eigen::MatrixXd(1, 2)};
    b1.entries << 1.0, 2.0;
    OperatorBlock<double> b2{{1}, {}, Eigen::MatrixXd(0, 1)};
    OperatorBlock<double> b3{{2, 4}, {0, 1}, Eigen::MatrixXd(2, 2)};
    b3.entries << 1.0, 1.0, 2.0, 2.0;
    BlockOperator<double> op(dom, cod, {b1, b2, b3});
    const auto dense = op.to_dense();
    CHECK(rank(op) == rank(dense));
    CHECK(kernel_basis(op).dim() == kernel_basis(dense).dim());
    CHECK(kernel_basis(op).dim() == 3);
    CHECK(image_basis(op).dim() == 2);
    CHECK(coimage_basis(op).dim() == 2);
    CHECK(operator_norm(op) == doctest::Approx(operator_norm(dense)).epsilon(1e-12));
    // partition violations are rejected
    OperatorBlock<double> bad{{0}, {0}, Eigen::MatrixXd::Ones(1, 1)};
    CHECK_THROWS_AS(BlockOperator<double>(dom, cod, {bad}), moduli::DimensionError);
}

TEST_CASE("orthogonal complement and span rank") {
    Rng rng(8);
    auto amb = spd_basis(rng, "amb", 6);
    Eigen::MatrixXd all = orthonormalize(*amb, Eigen::MatrixXd(Eigen::MatrixXd::Identity(6, 6)));
    REQUIRE(all.cols() == 6);
    Eigen::Matrix2d mix;
    mix << 1.0, 0.5, -0.3, 2.0;
    Eigen::MatrixXd two = orthonormalize(*amb, Eigen::MatrixXd(all.leftCols(2) * mix));
    const Eigen::MatrixXd comp = orthogonal_complement(*amb, two, all);
    CHECK(comp.cols() == 4);
    CHECK((two.transpose() * amb->gram() * comp).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::MatrixXd both(6, 6);
    both << two, comp;
    CHECK(span_rank(*amb, both) == 6);
}

TEST_CASE("newton_solve examples") {
    const NewtonOptions opts;
    {
        VectorMap f = [](const Eigen::VectorXd& x) { return x; };
        JacobianMap j = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(1, 1); };
        const auto r = newton_solve(f, j, Eigen::VectorXd::Constant(1, 0.3), opts);
        CHECK(r.converged);
        CHECK(std::abs(r.x(0)) <= 1e-10);
    }
    {
        VectorMap f = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0) * x(0) - 1.0); };
        JacobianMap j = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd::Constant(1, 1, 2.0 * x(0)); };
        const auto r = newton_solve(f, j, Eigen::VectorXd::Constant(1, 2.0), opts);
        CHECK(r.converged);
        CHECK(std::abs(r.x(0) - 1.0) <= 1e-10);
    }
    {
        VectorMap f = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0) * x(0)); };
        JacobianMap j = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd::Constant(1, 1, 2.0 * x(0)); };
        CHECK_THROWS_AS(newton_solve(f, j, Eigen::VectorXd::Zero(1), opts), moduli::SingularJacobianError);
    }
    {
        // no real root: reports non-convergence with the final residual
        VectorMap f = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0) * x(0) + 1.0); };
        JacobianMap j = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd::Constant(1, 1, 2.0 * x(0)); };
        const auto r = newton_solve(f, j, Eigen::VectorXd::Constant(1, 1.0), opts);
        CHECK_FALSE(r.converged);
        CHECK(r.residual >= 1.0);
    }
}

TEST_CASE("central difference jacobian") {
    VectorMap f = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd y(2);
        y << std::sin(x(0)) * x(1), x(0) * x(0);
        return y;
    };
    Eigen::VectorXd x(2);
    x << 0.4, 1.5;
    const Eigen::MatrixXd j = central_difference_jacobian(f, x, 1e-5);
    Eigen::MatrixXd exact(2, 2);
    exact << std::cos(0.4) * 1.5, std::sin(0.4), 0.8, 0.0;
    CHECK((j - exact).cwiseAbs().maxCoeff() <= 1e-9);
}
