#include <doctest.h>

#include "moduli/error.hpp"
#include "moduli/numerics/random.hpp"
#include "moduli/torus/complex_torus.hpp"
#include "moduli/torus/metric.hpp"

#include <cmath>
#include <numbers>

using namespace moduli::torus;
using moduli::numerics::Rng;
using moduli::numerics::random_vector;

namespace {

constexpr double kPi = std::numbers::pi;

double fit_slope(const std::vector<double>& t, const std::vector<double>& r) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(t.size());
    for (size_t i = 0; i < t.size(); ++i) {
        const double x = std::log(t[i]);
        const double y = std::log(r[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// dbar and d of a trigonometric polynomial at x by central differences in (x_j, y_j)
Complex fd_complex_derivative(const TrigPoly& f, const Eigen::VectorXd& x, int j, bool dbar) {
    const double h = 1e-5;
    Eigen::VectorXd ex = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd ey = ex;
    ex(2 * j) = h;
    ey(2 * j + 1) = h;
    const Complex fx = (f.evaluate(x + ex) - f.evaluate(x - ex)) / (2.0 * h);
    const Complex fy = (f.evaluate(x + ey) - f.evaluate(x - ey)) / (2.0 * h);
    const Complex i(0.0, 1.0);
    return dbar ? 0.5 * (fx + i * fy) : 0.5 * (fx - i * fy);
}

} // namespace

TEST_CASE("dbar multiplier on exp(i (z + zbar))") {
    // z + zbar = 2x, so the function is exp(2 i x)
    CHECK(std::abs(dbar_multiplier(2.0, 0.0) - Complex(0.0, 1.0)) <= 1e-15);
    TrigPoly f(2);
    f.add_term({1, 0}, 1.0); // exp(2 pi i x)
    Eigen::VectorXd x(2);
    x << 0.13, 0.71;
    const Complex fd = fd_complex_derivative(f, x, 0, true);
    CHECK(std::abs(fd - dbar_symbol({1, 0}, 0) * f.evaluate(x)) <= 1e-8);
    CHECK(std::abs(dbar_symbol({1, 0}, 0) - dbar_multiplier(2.0 * kPi, 0.0)) <= 1e-15);
}

TEST_CASE("dbar on fields: constants are holomorphic, adjoint formula matches") {
    for (int n : {1, 2}) {
        CAPTURE(n);
        const ComplexTorus t = complex_torus(n, 2);
        const auto p = dbar_on_fields(t);
        CHECK(p.blocks.size() == t.modes.size());
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(t.fields->dim());
        const Index m0 = t.mode_index.at(Mode(static_cast<size_t>(2 * n), 0));
        for (int i = 0; i < n; ++i) v(t.field_index(m0, i)) = Complex(1.0 + i, -0.5);
        CHECK(p.apply(v).norm() == 0.0);

        const auto ps = dbar_star(t);
        const auto ga = moduli::numerics::gram_adjoint(p);
        CHECK((ps.to_dense().entries - ga.to_dense().entries).cwiseAbs().maxCoeff() <= 1e-13);
        CHECK(moduli::numerics::adjoint_defect(p, ps, 100, 17) <= 1e-10);
        if (n == 2) {
            const auto q = dbar_on_forms(t);
            CHECK(moduli::numerics::adjoint_defect(q, moduli::numerics::gram_adjoint(q), 100, 18) <= 1e-10);
            // dbar o dbar = 0
            Rng rng(4);
            const Eigen::VectorXcd u = random_vector<Complex>(rng, t.fields->dim());
            CHECK(q.apply(p.apply(u)).norm() <= 1e-12 * p.apply(u).norm());
        }
    }
    CHECK_THROWS_AS(dbar_on_forms(complex_torus(1, 1)), moduli::DomainError);
}

TEST_CASE("mc_residual vanishes on constant and zero structures") {
    const ComplexTorus t = complex_torus(2, 2);
    CHECK(mc_residual(t, Eigen::VectorXcd::Zero(t.forms->dim())).total_norm() == 0.0);
    Rng rng(99);
    const Index m0 = t.mode_index.at({0, 0, 0, 0});
    for (int s = 0; s < 20; ++s) {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(t.forms->dim());
        w.segment(t.form_index(m0, 0, 0), 4) = random_vector<Complex>(rng, 4);
        const auto r = mc_residual(t, w);
        CHECK(r.in_band_norm == 0.0);
        CHECK(r.tail_norm == 0.0);
    }
    const ComplexTorus t1 = complex_torus(1, 2);
    Eigen::VectorXcd w1 = Eigen::VectorXcd::Ones(t1.forms->dim());
    CHECK(mc_residual(t1, w1).total_norm() == 0.0);
}

TEST_CASE("mc_residual on single modes matches pointwise differentiation") {
    const ComplexTorus t = complex_torus(2, 2);
    Rng rng(12);
    for (const Mode& k : {Mode{1, 0, 0, 1}, Mode{0, -1, 1, 0}, Mode{1, 1, 0, 0}}) {
        CAPTURE(k[0]);
        // omega with two modes so that the bracket has in-band and tail parts
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(t.forms->dim());
        const Index mk = t.mode_index.at(k);
        const Index m0 = t.mode_index.at({0, 0, 0, 0});
        w.segment(t.form_index(mk, 0, 0), 4) = random_vector<Complex>(rng, 4) * 0.3;
        w.segment(t.form_index(m0, 0, 0), 4) = random_vector<Complex>(rng, 4) * 0.3;
        const auto r = mc_residual(t, w);
        CHECK(r.tail_norm == 0.0); // |2k| <= 2 stays in band
        const auto poly = form_polys(t, w);
        TrigPoly res(4);
        for (Index m = 0; m < t.mode_count(); ++m) res.add_term(t.modes[static_cast<size_t>(m)], r.in_band(m * 2 + 0));
        for (int trial = 0; trial < 3; ++trial) {
            Eigen::VectorXd x = (random_vector<double>(rng, 4).array() * 0.3).matrix();
            // R^0_{01} = dbar_0 w^0_1 - dbar_1 w^0_0 + sum_a (w^a_0 d_a w^0_1 - w^a_1 d_a w^0_0)
            Complex oracle = fd_complex_derivative(poly[0][1], x, 0, true) - fd_complex_derivative(poly[0][0], x, 1, true);
            for (int a = 0; a < 2; ++a)
                oracle += poly[static_cast<size_t>(a)][0].evaluate(x) * fd_complex_derivative(poly[0][1], x, a, false) -
                          poly[static_cast<size_t>(a)][1].evaluate(x) * fd_complex_derivative(poly[0][0], x, a, false);
            CHECK(std::abs(res.evaluate(x) - oracle) <= 1e-7 * std::max(1.0, std::abs(oracle)));
        }
    }
}

TEST_CASE("mc_residual reports products beyond the cutoff as tail") {
    const ComplexTorus t = complex_torus(2, 1);
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(t.forms->dim());
    const Index mk = t.mode_index.at({1, 0, 0, 0});
    w(t.form_index(mk, 0, 0)) = 0.2;
    w(t.form_index(mk, 1, 1)) = Complex(0.0, 0.1);
    const auto r = mc_residual(t, w);
    CHECK(r.tail_norm > 0.0);
}

TEST_CASE("kuranishi_torus tangent dimensions") {
    for (int c : {2, 4}) {
        CAPTURE(c);
        // only k = 0 survives both dbar and dbar*: n^2 constant components
        CHECK(kuranishi_torus(1, c).K_tangent.dim() == 1);
        CHECK(kuranishi_torus(2, c).K_tangent.dim() == 4);
    }
    const auto m = kuranishi_torus(2, 2);
    const ComplexTorus t = complex_torus(2, 2);
    CHECK(m.F.dim() + m.F_perp.dim() == t.forms->dim());
    CHECK(m.kernel_P.dim() == 2); // constant vector fields
}

TEST_CASE("pullback of the flat structure is integrable to third order") {
    const ComplexTorus t = complex_torus(2, 4);
    std::vector<TrigPoly> v(2, TrigPoly(4));
    v[0].add_term({1, 0, 0, 0}, Complex(0.3, 0.1));
    v[0].add_term({0, 0, 0, -1}, Complex(-0.2, 0.05));
    v[1].add_term({0, 1, 1, 0}, Complex(0.1, -0.25));
    v[1].add_term({-1, 0, 0, 0}, Complex(0.15, 0.0));
    std::vector<double> ts{1e-2, 5e-3, 2.5e-3}, full, linear;
    const auto q = dbar_on_forms(t);
    for (double s : ts) {
        const Eigen::VectorXcd w = pullback_structure(t, v, s);
        full.push_back(mc_residual(t, w).total_norm());
        linear.push_back(q.apply(w).norm());
    }
    CHECK(fit_slope(ts, full) >= 2.7);
    // without the bracket the residual is only second order
    CHECK(fit_slope(ts, linear) < 2.2);
}

TEST_CASE("newton slice on the complex 1-torus") {
    const auto sys = torus_beltrami_action(2);
    CHECK(moduli::slice::action_derivative_defect(sys) <= 1e-6);
    const auto m = moduli::slice::build_slice(sys);
    CHECK(m.F_perp.dim() == 2); // constant Beltrami coefficient, realified
    CHECK(m.kernel_P.dim() == 2);
    CHECK(moduli::slice::round_trip_defect(sys, m, 20, 0.01, 31) <= 1e-8);
}

TEST_CASE("metric slice operator") {
    {
        const RealTorus t = real_torus(1, 2);
        const auto p = metric_slice_operator(t);
        CHECK(p.blocks.size() == t.modes.size());
        // constant chi is Killing
        Eigen::VectorXd chi = Eigen::VectorXd::Zero(t.fields->dim());
        chi(0) = 1.0;
        CHECK(p.apply(chi).norm() == 0.0);
        // chi = cos(2 pi k x) d_x  ->  h_11 = -2 (2 pi k) sin(2 pi k x)
        for (size_t m = 1; m < t.modes.size(); ++m) {
            const int k = t.modes[m][0];
            chi.setZero();
            chi(t.field_offset[m]) = 1.0;
            const Eigen::VectorXd h = p.apply(chi);
            CHECK(h(t.sym_offset[m]) == 0.0);
            CHECK(h(t.sym_offset[m] + 1) == doctest::Approx(-4.0 * kPi * k).epsilon(1e-14));
            // chi = e^{i k x}: cos + i sin gives h = 2 i k (cos + i sin)
            chi.setZero();
            chi(t.field_offset[m] + 1) = 1.0;
            const Eigen::VectorXd hs = p.apply(chi);
            CHECK(hs(t.sym_offset[m]) == doctest::Approx(4.0 * kPi * k).epsilon(1e-14));
        }
    }
    for (int n : {1, 2, 3}) {
        for (int c : {0, 1, 2}) {
            CAPTURE(n);
            CAPTURE(c);
            const RealTorus t = real_torus(n, c);
            const auto p = metric_slice_operator(t);
            CHECK(moduli::numerics::kernel_basis(p).dim() == n);
            const auto ps = moduli::numerics::gram_adjoint(p);
            CHECK(moduli::numerics::adjoint_defect(p, ps, 100, 3) <= 1e-10);
            // P* h = -2 div h, assembled by hand in the cos/sin basis
            Rng rng(static_cast<std::uint64_t>(10 * n + c));
            const Eigen::VectorXd h = random_vector<double>(rng, t.sym->dim());
            Eigen::VectorXd div = Eigen::VectorXd::Zero(t.fields->dim());
            for (size_t m = 1; m < t.modes.size(); ++m) {
                const int s = t.sym_count();
                for (int b = 0; b < n; ++b)
                    for (int a = 0; a < n; ++a) {
                        const double ka = 2.0 * kPi * t.modes[m][static_cast<size_t>(a)];
                        const double hc = h(t.sym_offset[m] + t.sym_index(a, b));
                        const double hs = h(t.sym_offset[m] + s + t.sym_index(a, b));
                        // d_a (hc cos + hs sin) = ka (-hc sin + hs cos)
                        div(t.field_offset[m] + b) += -2.0 * ka * hs;
                        div(t.field_offset[m] + n + b) += -2.0 * -ka * hc;
                    }
            }
            CHECK((ps.apply(h) - div).norm() <= 1e-10 * std::max(1.0, div.norm()));
        }
    }
}

TEST_CASE("metric slice dimensions") {
    for (int n : {1, 2, 3}) CHECK(metric_slice_dim(n, 0) == n * (n + 1) / 2);
    // flat circle: only the constant survives P*, at every cutoff
    for (int c : {1, 2, 3}) CHECK(metric_slice_dim(1, c) == 1);
    for (int n : {2, 3}) {
        Index prev = -1;
        for (int c : {1, 2, 3}) {
            CAPTURE(n);
            CAPTURE(c);
            const Index d = metric_slice_dim(n, c);
            CHECK(d > prev);
            prev = d;
            CHECK(d == metric_slice_dim_formula(n, c));
            const RealTorus t = real_torus(n, c);
            CHECK(d == t.sym->dim() - moduli::numerics::rank(metric_slice_operator(t)));
        }
    }
    const RealTorus t = real_torus(2, 1);
    const moduli::numerics::RealOperator zero(t.fields, t.sym, Eigen::MatrixXd::Zero(t.sym->dim(), t.fields->dim()));
    CHECK(moduli::numerics::kernel_basis(moduli::numerics::gram_adjoint(zero)).dim() == t.sym->dim());
}
