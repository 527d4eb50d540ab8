#include "moduli/sasaki/nonlinear.hpp"

#include "moduli/error.hpp"
#include "moduli/numerics/random.hpp"

#include <cmath>

namespace moduli::sasaki {

namespace {

constexpr Complex kI(0.0, 1.0);

size_t sz(int i) { return static_cast<size_t>(i); }

/// Adapted coordinate k of a Wigner-expanded field.
WignerPoly adapted_coefficient(const DeformationSetup& s, const FieldPolys& x, int k) {
    WignerPoly p;
    for (int a = 0; a < 3; ++a) {
        const Complex c = s.adapted.to_adapted(k, a);
        if (c != 0.0) p += x[sz(a)] * c;
    }
    return p;
}

FieldPolys constant_field(const Eigen::Vector3cd& v) {
    FieldPolys f;
    for (int a = 0; a < 3; ++a)
        if (v(a) != 0.0) f[sz(a)] = WignerPoly::constant(v(a));
    return f;
}

FieldPolys scaled(const FieldPolys& x, Complex c) {
    FieldPolys out;
    for (size_t a = 0; a < 3; ++a) out[a] = x[a] * c;
    return out;
}

WignerPoly mc_impl(const DeformationSetup& s, const WignerPoly& w1, const WignerPoly& w3, bool quadratic) {
    const auto& g = s.adapted.gamma;
    const auto& f = s.adapted.f;
    // X^k = gamma_12^k - w3 gamma_13^k - w1 gamma_32^k; residual X^3 + w1 X^1 + w3 X^2
    auto x = [&](int k, bool with_const) {
        WignerPoly p;
        if (with_const) p += WignerPoly::constant(g[0][1](k));
        p -= w3 * g[0][2](k);
        p -= w1 * g[2][1](k);
        return p;
    };
    WignerPoly res = x(2, true);
    res -= w3.derivative(f[0]);
    res += w1.derivative(f[1]);
    if (quadratic) {
        res += w1 * w3.derivative(f[2]);
        res -= w3 * w1.derivative(f[2]);
        res += w1 * x(0, true);
        res += w3 * x(1, true);
    } else {
        res += w1 * g[0][1](0);
        res += w3 * g[0][1](1);
    }
    return -res;
}

Complex deta_pair(const DeformationSetup& s, const Eigen::Vector3cd& u, const Eigen::Vector3cd& v) {
    return (u.transpose() * s.deta.cast<Complex>() * v)(0, 0);
}

WignerPoly form_pair(const std::array<std::array<WignerPoly, 3>, 3>& d, const Eigen::Vector3cd& u,
                     const Eigen::Vector3cd& v) {
    WignerPoly p;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            if (u(a) * v(b) != 0.0) p += d[sz(a)][sz(b)] * (u(a) * v(b));
    return p;
}

WignerPoly q_impl(const DeformationSetup& s, const DeformationPair& p, bool quadratic) {
    const auto& f = s.adapted.f;
    const auto d = p.alpha.differential(s.base.frame);
    WignerPoly q = form_pair(d, f[0], f[1]);
    if (quadratic) {
        q -= p.omega3 * form_pair(d, f[0], f[2]);
        q -= p.omega1 * form_pair(d, f[2], f[1]);
    }
    q -= p.omega1 * deta_pair(s, f[2], f[1]);
    q -= p.omega3 * deta_pair(s, f[0], f[2]);
    return q;
}

double slope(double r0, double r1, double t0, double t1) { return std::log(r0 / r1) / std::log(t0 / t1); }

} // namespace

// ----------------------------------------------------------------------------
// DeformationPair

DeformationPair DeformationPair::from_coords(const DeformationSetup& s, const Eigen::VectorXd& v) {
    const SectionSpace& st = *s.structure;
    DeformationPair p;
    p.omega1 = st.poly(v, 0) + st.poly(v, 1) * kI;
    p.omega3 = st.poly(v, 2) + st.poly(v, 3) * kI;
    for (int a = 0; a < 3; ++a) p.alpha.comp[sz(a)] = st.poly(v, 4 + a);
    return p;
}

Eigen::VectorXd DeformationPair::coords(const DeformationSetup& s) const {
    const SectionSpace& st = *s.structure;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(st.dim());
    st.set_poly(v, 0, omega1.real_part());
    st.set_poly(v, 1, omega1.imag_part());
    st.set_poly(v, 2, omega3.real_part());
    st.set_poly(v, 3, omega3.imag_part());
    for (int a = 0; a < 3; ++a) st.set_poly(v, 4 + a, alpha.comp[sz(a)]);
    return v;
}

bool DeformationPair::left_invariant() const { return max_tj() <= 0; }

int DeformationPair::max_tj() const {
    int m = std::max(omega1.max_tj(), omega3.max_tj());
    for (const auto& c : alpha.comp) m = std::max(m, c.max_tj());
    return m;
}

Residual make_residual(const DeformationSetup& s, const WignerPoly& p) {
    Residual r;
    r.value = p;
    r.in_band = Eigen::VectorXd::Zero(s.cfun->dim());
    s.cfun->set_poly(r.in_band, 0, p.real_part());
    s.cfun->set_poly(r.in_band, 1, p.imag_part());
    r.in_band_norm = p.truncated(s.two_j_max()).norm();
    r.tail_norm = p.tail_norm(s.two_j_max());
    return r;
}

WignerPoly mc_polynomial(const DeformationSetup& s, const WignerPoly& omega1, const WignerPoly& omega3) {
    return mc_impl(s, omega1, omega3, true);
}

Residual mc_sasaki_residual(const DeformationSetup& s, const DeformationPair& p) {
    return make_residual(s, mc_polynomial(s, p.omega1, p.omega3));
}

WignerPoly q_polynomial(const DeformationSetup& s, const DeformationPair& p) { return q_impl(s, p, true); }

Residual integrability_Q(const DeformationSetup& s, const DeformationPair& p) {
    return make_residual(s, q_polynomial(s, p));
}

ComplexFrameSpan deformed_span(const DeformationSetup& s, const DeformationPair& p) {
    if (!p.left_invariant()) throw RestrictedScopeError("constant deformations only");
    const su2::WignerLabel zero{0, 0, 0};
    const auto& f = s.adapted.f;
    ComplexFrameSpan e(3, 2);
    e.col(0) = f[0] - p.omega1.coeff(zero) * f[2];
    e.col(1) = f[1] - p.omega3.coeff(zero) * f[2];
    return e;
}

OneForm deformed_eta(const DeformationSetup& s, const DeformationPair& p) { return s.base.eta + p.alpha; }

std::vector<DeformationPair> se_filter(const DeformationSetup& s, const std::vector<DeformationPair>& candidates,
                                       std::vector<SeCandidate>* details) {
    for (const auto& c : candidates)
        if (!c.left_invariant()) throw RestrictedScopeError("se_filter accepts left-invariant (j = 0) data only");
    std::vector<DeformationPair> kept;
    for (const auto& c : candidates) {
        SeCandidate d;
        d.pair = c;
        try {
            const SasakiData data = build_structure(s.base.frame, deformed_span(s, c), deformed_eta(s, c), 1);
            d.einstein_residual = su2::einstein_residual(s.base.frame, data.base().metric);
            d.kept = d.einstein_residual <= kEinsteinTol;
            if (!d.kept) d.reason = "Einstein residual above tolerance";
        } catch (const Error& e) {
            d.einstein_residual = std::numeric_limits<double>::infinity();
            d.reason = e.what();
        }
        if (d.kept) kept.push_back(c);
        if (details != nullptr) details->push_back(std::move(d));
    }
    return kept;
}

// ----------------------------------------------------------------------------
// Fields and the Lie-series pull-back

FieldPolys field_from_vf(const DeformationSetup& s, const Eigen::VectorXd& chi) {
    FieldPolys f;
    for (int a = 0; a < 3; ++a) f[sz(a)] = s.vf->poly(chi, a);
    return f;
}

FieldPolys field_bracket(const InvariantFrame& frame, const FieldPolys& x, const FieldPolys& y) {
    FieldPolys out;
    for (int c = 0; c < 3; ++c) {
        WignerPoly p;
        for (int a = 0; a < 3; ++a) {
            if (!x[sz(a)].empty()) p += x[sz(a)] * y[sz(c)].derivative(a);
            if (!y[sz(a)].empty()) p -= y[sz(a)] * x[sz(c)].derivative(a);
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double k = frame.c[sz(c)](a, b);
                if (k != 0.0 && !x[sz(a)].empty() && !y[sz(b)].empty()) p += (x[sz(a)] * y[sz(b)]) * Complex(k);
            }
        out[sz(c)] = std::move(p);
    }
    return out;
}

OneForm lie_derivative(const InvariantFrame& frame, const FieldPolys& x, const OneForm& beta) {
    OneForm out;
    for (int b = 0; b < 3; ++b) {
        WignerPoly p;
        for (int a = 0; a < 3; ++a) {
            if (x[sz(a)].empty()) continue;
            p += x[sz(a)] * beta.comp[sz(b)].derivative(a);
            for (int c = 0; c < 3; ++c) {
                const double k = frame.c[sz(c)](a, b);
                if (k != 0.0) p -= (x[sz(a)] * beta.comp[sz(c)]) * Complex(k);
            }
            p += x[sz(a)].derivative(b) * beta.comp[sz(a)];
        }
        out.comp[sz(b)] = std::move(p);
    }
    return out;
}

DeformationPair PullbackSeries::at(double t) const {
    DeformationPair p;
    p.omega1 = first.omega1 * Complex(t) + second.omega1 * Complex(t * t);
    p.omega3 = first.omega3 * Complex(t) + second.omega3 * Complex(t * t);
    p.alpha = first.alpha * t + second.alpha * (t * t);
    return p;
}

PullbackSeries pullback_series(const DeformationSetup& s, const Eigen::VectorXd& chi) {
    const InvariantFrame& frame = s.base.frame;
    const FieldPolys x = field_from_vf(s, chi);
    // phi_t^* V = V + t [chi, V] + t^2/2 [chi, [chi, V]]
    std::array<FieldPolys, 2> l1;
    std::array<FieldPolys, 2> l2;
    for (int k = 0; k < 2; ++k) {
        l1[sz(k)] = field_bracket(frame, x, constant_field(s.adapted.f[sz(k)]));
        l2[sz(k)] = scaled(field_bracket(frame, x, l1[sz(k)]), 0.5);
    }
    std::array<std::array<WignerPoly, 2>, 2> a1; // a1[l][k]
    std::array<WignerPoly, 2> c1;
    std::array<WignerPoly, 2> c2;
    for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) a1[sz(l)][sz(k)] = adapted_coefficient(s, l1[sz(k)], l);
        c1[sz(k)] = adapted_coefficient(s, l1[sz(k)], 2);
        c2[sz(k)] = adapted_coefficient(s, l2[sz(k)], 2);
    }
    std::array<WignerPoly, 2> o1;
    std::array<WignerPoly, 2> o2;
    for (int k = 0; k < 2; ++k) {
        o1[sz(k)] = -c1[sz(k)];
        WignerPoly q = c2[sz(k)];
        for (int l = 0; l < 2; ++l) q -= c1[sz(l)] * a1[sz(l)][sz(k)];
        o2[sz(k)] = -q;
    }
    PullbackSeries ser;
    ser.first.omega1 = o1[0];
    ser.first.omega3 = o1[1];
    ser.second.omega1 = o2[0];
    ser.second.omega3 = o2[1];
    const OneForm le = lie_derivative(frame, x, s.base.eta);
    ser.first.alpha = le;
    ser.second.alpha = lie_derivative(frame, x, le) * 0.5;
    return ser;
}

PullbackReport pullback_oracle(const DeformationSetup& s, const Eigen::VectorXd& chi, const std::vector<double>& ts) {
    if (ts.size() < 2) throw DomainError("the pull-back oracle needs at least two step sizes");
    const PullbackSeries ser = pullback_series(s, chi);
    PullbackReport r;
    r.t = ts;
    for (double t : ts) {
        const DeformationPair p = ser.at(t);
        r.residual.push_back(mc_impl(s, p.omega1, p.omega3, true).norm() + q_impl(s, p, true).norm());
        r.linear_only.push_back(mc_impl(s, p.omega1, p.omega3, false).norm() + q_impl(s, p, false).norm());
    }
    r.min_slope = std::numeric_limits<double>::infinity();
    r.min_linear_slope = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        r.slopes.push_back(slope(r.residual[i], r.residual[i + 1], ts[i], ts[i + 1]));
        r.linear_slopes.push_back(slope(r.linear_only[i], r.linear_only[i + 1], ts[i], ts[i + 1]));
        r.min_slope = std::min(r.min_slope, r.slopes.back());
        r.min_linear_slope = std::min(r.min_linear_slope, r.linear_slopes.back());
    }
    return r;
}

// ----------------------------------------------------------------------------
// Flows

namespace {

Eigen::Vector4d quat_mul(const Eigen::Vector4d& p, const Eigen::Vector4d& q) {
    return {p(0) * q(0) - p(1) * q(1) - p(2) * q(2) - p(3) * q(3),
            p(0) * q(1) + p(1) * q(0) + p(2) * q(3) - p(3) * q(2),
            p(0) * q(2) - p(1) * q(3) + p(2) * q(0) + p(3) * q(1),
            p(0) * q(3) + p(1) * q(2) - p(2) * q(1) + p(3) * q(0)};
}

Eigen::Vector4d rhs(const FieldPolys& chi, const Eigen::Vector4d& q) {
    const Su2 g = su2::su2_from_quaternion(q.normalized());
    Eigen::Vector4d v(0.0, 0.0, 0.0, 0.0);
    for (int a = 0; a < 3; ++a) v(a + 1) = chi[sz(a)].evaluate(g).real();
    return quat_mul(q, v);
}

} // namespace

Su2 flow(const FieldPolys& chi, const Su2& x, double t, int steps) {
    if (steps < 1) throw DomainError("flow needs at least one step");
    Eigen::Vector4d q = su2::su2_to_quaternion(x);
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Eigen::Vector4d k1 = rhs(chi, q);
        const Eigen::Vector4d k2 = rhs(chi, q + 0.5 * h * k1);
        const Eigen::Vector4d k3 = rhs(chi, q + 0.5 * h * k2);
        const Eigen::Vector4d k4 = rhs(chi, q + h * k3);
        q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return su2::su2_from_quaternion(q.normalized());
}

Eigen::Matrix3d flow_differential(const FieldPolys& chi, const Su2& x, double t, int steps, double fd_step) {
    const Su2 y = flow(chi, x, t, steps);
    const Su2 yinv = y.adjoint();
    Eigen::Matrix3d m;
    for (int a = 0; a < 3; ++a) {
        auto at = [&](double s) {
            Eigen::Vector3d th = Eigen::Vector3d::Zero();
            th(a) = s;
            return flow(chi, x * su2::su2_exp(th), t, steps);
        };
        const Su2 dy = (-at(2.0 * fd_step) + 8.0 * at(fd_step) - 8.0 * at(-fd_step) + at(-2.0 * fd_step)) /
                       (12.0 * fd_step);
        const Eigen::Matrix2cd theta = yinv * dy;
        for (int b = 0; b < 3; ++b) m(b, a) = -0.5 * (theta * su2::generator(b)).trace().real();
    }
    return m;
}

OrbitTangencyReport orbit_tangency(const DeformationSetup& s, const Eigen::VectorXd& chi, const std::vector<double>& ts,
                                   int points, int steps) {
    if (ts.size() < 2) throw DomainError("orbit tangency needs at least two step sizes");
    const FieldPolys x = field_from_vf(s, chi);
    const DeformationPair lin = DeformationPair::from_coords(s, general_P(s, chi));
    const auto pts = su2::sample_points(points);
    const auto& f = s.adapted.f;
    OrbitTangencyReport r;
    r.t = ts;
    for (double t : ts) {
        double worst = 0.0;
        for (const Su2& p : pts) {
            const Eigen::Matrix3d m = flow_differential(x, p, t, steps);
            const Eigen::Matrix3cd minv = m.inverse().cast<Complex>();
            Eigen::Matrix<Complex, 3, 2> e;
            for (int k = 0; k < 2; ++k) e.col(k) = s.adapted.to_adapted * (minv * f[sz(k)]);
            // (Id - omega) normalization: omega = -c N^{-1}
            const Eigen::Matrix2cd n = e.topRows<2>();
            const Eigen::RowVector2cd om = -e.row(2) * n.inverse();
            const Eigen::RowVector3d alpha = s.eta.transpose() * m - s.eta.transpose();
            worst = std::max(worst, std::abs(om(0) - t * lin.omega1.evaluate(p)));
            worst = std::max(worst, std::abs(om(1) - t * lin.omega3.evaluate(p)));
            for (int a = 0; a < 3; ++a)
                worst = std::max(worst, std::abs(alpha(a) - t * lin.alpha.comp[sz(a)].evaluate(p).real()));
        }
        r.error.push_back(worst);
    }
    r.min_slope = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        r.slopes.push_back(slope(r.error[i], r.error[i + 1], ts[i], ts[i + 1]));
        r.min_slope = std::min(r.min_slope, r.slopes.back());
    }
    return r;
}

Eigen::VectorXd random_field(const DeformationSetup& s, numerics::Rng& rng, int two_j_max) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(s.vf->dim());
    for (int tj = 0; tj <= std::min(two_j_max, s.two_j_max()); ++tj)
        v.segment(s.vf->block_offset(tj), s.vf->block_size(tj)) =
            numerics::random_vector<double>(rng, s.vf->block_size(tj));
    const double n = numerics::norm<double>(*s.vf->basis(), v);
    return n > 0.0 ? Eigen::VectorXd(v / n) : v;
}

} // namespace moduli::sasaki
