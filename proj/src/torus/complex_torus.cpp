#include "moduli/torus/complex_torus.hpp"

#include "moduli/error.hpp"

#include <cmath>
#include <numbers>

namespace moduli::torus {

using numerics::LabeledBasis;
using numerics::Matrix;
using numerics::OperatorBlock;

namespace {

BasisPtr make_basis(const std::string& id, const std::vector<Mode>& modes, const std::vector<std::vector<int>>& comps) {
    std::vector<numerics::Label> labels;
    labels.reserve(modes.size() * comps.size());
    for (const auto& k : modes)
        for (const auto& c : comps) {
            numerics::Label l = k;
            l.insert(l.end(), c.begin(), c.end());
            labels.push_back(std::move(l));
        }
    const auto n = static_cast<Index>(labels.size());
    return std::make_shared<const LabeledBasis>(id, std::move(labels), Eigen::VectorXd(Eigen::VectorXd::Ones(n)));
}

std::vector<Index> range(Index start, Index count) {
    std::vector<Index> v(static_cast<size_t>(count));
    for (Index i = 0; i < count; ++i) v[static_cast<size_t>(i)] = start + i;
    return v;
}

} // namespace

int ComplexTorus::pair_index(int j, int l) const {
    // pairs (0,1), (0,2), ..., (1,2), ...
    int idx = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (a == j && b == l) return idx;
            ++idx;
        }
    throw DomainError("pair_index: need j < l");
}

ComplexTorus complex_torus(int n, int cutoff) {
    if (n < 1 || n > 2) throw DomainError("complex torus dimension must be 1 or 2");
    if (cutoff < 0) throw DomainError("negative cutoff");
    ComplexTorus t;
    t.n = n;
    t.cutoff = cutoff;
    t.modes = lattice_modes(2 * n, cutoff);
    for (size_t m = 0; m < t.modes.size(); ++m) t.mode_index.emplace(t.modes[m], static_cast<Index>(m));
    std::vector<std::vector<int>> fc, wc, rc;
    for (int i = 0; i < n; ++i) {
        fc.push_back({i});
        for (int j = 0; j < n; ++j) wc.push_back({i, j});
        for (int j = 0; j < n; ++j)
            for (int l = j + 1; l < n; ++l) rc.push_back({i, j, l});
    }
    const std::string tag = "T" + std::to_string(n) + "c" + std::to_string(cutoff);
    t.fields = make_basis(tag + "-fields", t.modes, fc);
    t.forms = make_basis(tag + "-forms", t.modes, wc);
    if (n >= 2) t.forms2 = make_basis(tag + "-forms2", t.modes, rc);
    return t;
}

BlockOperator<Complex> dbar_on_fields(const ComplexTorus& t) {
    const int n = t.n;
    std::vector<OperatorBlock<Complex>> blocks;
    blocks.reserve(t.modes.size());
    for (Index m = 0; m < t.mode_count(); ++m) {
        const Mode& k = t.modes[static_cast<size_t>(m)];
        Matrix<Complex> e = Matrix<Complex>::Zero(n * n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) e(i * n + j, i) = dbar_symbol(k, j);
        blocks.push_back({range(t.field_index(m, 0), n), range(t.form_index(m, 0, 0), n * n), std::move(e)});
    }
    return BlockOperator<Complex>(t.fields, t.forms, std::move(blocks));
}

BlockOperator<Complex> dbar_star(const ComplexTorus& t) {
    const int n = t.n;
    std::vector<OperatorBlock<Complex>> blocks;
    blocks.reserve(t.modes.size());
    for (Index m = 0; m < t.mode_count(); ++m) {
        const Mode& k = t.modes[static_cast<size_t>(m)];
        Matrix<Complex> e = Matrix<Complex>::Zero(n, n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) e(i, i * n + j) = std::conj(dbar_symbol(k, j));
        blocks.push_back({range(t.form_index(m, 0, 0), n * n), range(t.field_index(m, 0), n), std::move(e)});
    }
    return BlockOperator<Complex>(t.forms, t.fields, std::move(blocks));
}

BlockOperator<Complex> dbar_on_forms(const ComplexTorus& t) {
    if (t.n < 2) throw DomainError("no (0,2)-forms on a complex curve");
    const int n = t.n;
    const int p = t.pair_count();
    std::vector<OperatorBlock<Complex>> blocks;
    blocks.reserve(t.modes.size());
    for (Index m = 0; m < t.mode_count(); ++m) {
        const Mode& k = t.modes[static_cast<size_t>(m)];
        Matrix<Complex> e = Matrix<Complex>::Zero(n * p, n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = j + 1; l < n; ++l) {
                    const int r = i * p + t.pair_index(j, l);
                    e(r, i * n + l) += dbar_symbol(k, j);
                    e(r, i * n + j) -= dbar_symbol(k, l);
                }
        blocks.push_back({range(t.form_index(m, 0, 0), n * n), range((m * n) * p, n * p), std::move(e)});
    }
    return BlockOperator<Complex>(t.forms, t.forms2, std::move(blocks));
}

McResidual mc_residual(const ComplexTorus& t, const Eigen::VectorXcd& omega) {
    if (omega.size() != t.forms->dim()) throw DimensionError("mc_residual: omega length");
    McResidual out;
    const int n = t.n;
    if (n < 2) {
        out.in_band = Eigen::VectorXcd(0);
        return out;
    }
    const int p = t.pair_count();
    const int nc = n * p;
    // support of omega
    std::vector<Index> support;
    for (Index m = 0; m < t.mode_count(); ++m)
        if (omega.segment(t.form_index(m, 0, 0), n * n).cwiseAbs().maxCoeff() > 0.0) support.push_back(m);

    std::map<Mode, Eigen::VectorXcd> res;
    auto slot = [&](const Mode& k) -> Eigen::VectorXcd& {
        auto it = res.find(k);
        if (it == res.end()) it = res.emplace(k, Eigen::VectorXcd::Zero(nc)).first;
        return it->second;
    };
    auto w = [&](Index m, int i, int j) { return omega(t.form_index(m, i, j)); };

    for (Index m : support) {
        const Mode& k = t.modes[static_cast<size_t>(m)];
        Eigen::VectorXcd& r = slot(k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = j + 1; l < n; ++l)
                    r(i * p + t.pair_index(j, l)) += dbar_symbol(k, j) * w(m, i, l) - dbar_symbol(k, l) * w(m, i, j);
    }
    for (Index mp : support) {
        const Mode& kp = t.modes[static_cast<size_t>(mp)];
        for (Index mq : support) {
            const Mode& kq = t.modes[static_cast<size_t>(mq)];
            Eigen::VectorXcd& r = slot(add(kp, kq));
            for (int a = 0; a < n; ++a) {
                const Complex da = d_symbol(kq, a);
                if (da == Complex(0.0)) continue;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        for (int l = j + 1; l < n; ++l)
                            r(i * p + t.pair_index(j, l)) +=
                                w(mp, a, j) * da * w(mq, i, l) - w(mp, a, l) * da * w(mq, i, j);
            }
        }
    }
    out.in_band = Eigen::VectorXcd::Zero(t.forms2->dim());
    double tail = 0.0;
    for (const auto& [k, r] : res) {
        if (sup_norm(k) <= t.cutoff) {
            const Index m = t.mode_index.at(k);
            out.in_band.segment(m * nc, nc) = r;
        } else {
            tail += r.squaredNorm();
        }
    }
    out.in_band_norm = out.in_band.norm();
    out.tail_norm = std::sqrt(tail);
    return out;
}

slice::SliceModel<Complex> kuranishi_torus(int n, int cutoff, double rel_tol) {
    const ComplexTorus t = complex_torus(n, cutoff);
    const auto p = dbar_on_fields(t);
    if (n < 2) return slice::build_linear_slice<Complex>(p, nullptr, rel_tol);
    const auto q = dbar_on_forms(t);
    return slice::build_linear_slice<Complex>(p, &q, rel_tol);
}

std::vector<std::vector<TrigPoly>> form_polys(const ComplexTorus& t, const Eigen::VectorXcd& omega) {
    const int n = t.n;
    std::vector<std::vector<TrigPoly>> out(static_cast<size_t>(n),
                                           std::vector<TrigPoly>(static_cast<size_t>(n), TrigPoly(2 * n)));
    for (Index m = 0; m < t.mode_count(); ++m)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out[static_cast<size_t>(i)][static_cast<size_t>(j)].add_term(t.modes[static_cast<size_t>(m)],
                                                                           omega(t.form_index(m, i, j)));
    return out;
}

Eigen::VectorXcd pullback_structure(const ComplexTorus& t, const std::vector<TrigPoly>& v, double time) {
    const int n = t.n;
    if (static_cast<int>(v.size()) != n) throw DimensionError("pullback_structure: field components");
    const ComplexVectorField x = realify(v);
    // U_j = dbar_j + t [X, dbar_j] + t^2/2 [X, [X, dbar_j]] = A_jb dbar_b + C_ja d_a
    std::vector<ComplexVectorField> u1, u2;
    for (int j = 0; j < n; ++j) {
        u1.push_back(bracket(x, ComplexVectorField::dbar_unit(n, j)));
        u2.push_back(bracket(x, u1.back()) * Complex(0.5));
    }
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(t.forms->dim());
    for (int j = 0; j < n; ++j) {
        const auto jj = static_cast<size_t>(j);
        for (int a = 0; a < n; ++a) {
            const auto aa = static_cast<size_t>(a);
            // omega^a_j = t C1_ja + t^2 (C2_ja - sum_b A1_jb C1_ba)
            TrigPoly second = u2[jj].hol[aa];
            for (int b = 0; b < n; ++b) second = second - u1[jj].anti[static_cast<size_t>(b)] * u1[static_cast<size_t>(b)].hol[aa];
            const TrigPoly w = u1[jj].hol[aa] * Complex(time) + second * Complex(time * time);
            for (const auto& [k, c] : w.terms()) {
                auto it = t.mode_index.find(k);
                if (it == t.mode_index.end()) throw DomainError("pullback_structure: mode beyond cutoff");
                out(t.form_index(it->second, a, j)) = c;
            }
        }
    }
    return out;
}

slice::ActionSystem torus_beltrami_action(int cutoff, double chart_radius) {
    const std::vector<Mode> modes = lattice_modes(2, cutoff);
    const auto nm = static_cast<Index>(modes.size());
    std::vector<std::vector<int>> parts{{0}, {1}};
    const std::string tag = "T1c" + std::to_string(cutoff);
    slice::ActionSystem sys;
    sys.name = "torus-beltrami";
    sys.structure_space = make_basis(tag + "-beltrami", modes, parts);
    sys.group_chart = make_basis(tag + "-diffeo", modes, parts);
    sys.chart_radius = chart_radius;

    std::vector<OperatorBlock<double>> blocks;
    for (Index m = 0; m < nm; ++m) {
        const Complex s = dbar_symbol(modes[static_cast<size_t>(m)], 0);
        Eigen::MatrixXd e(2, 2);
        e << s.real(), -s.imag(), s.imag(), s.real();
        blocks.push_back({range(2 * m, 2), range(2 * m, 2), e});
    }
    sys.P = BlockOperator<double>(sys.group_chart, sys.structure_space, std::move(blocks));

    const int g = 4 * (cutoff + 1);
    sys.act = [modes, nm, g](const Eigen::VectorXd& xi, const Eigen::VectorXd& j) {
        TrigPoly mu(2), f(2);
        for (Index m = 0; m < nm; ++m) {
            const Mode& k = modes[static_cast<size_t>(m)];
            mu.add_term(k, Complex(j(2 * m), j(2 * m + 1)));
            f.add_term(k, Complex(xi(2 * m), xi(2 * m + 1)));
        }
        const TrigPoly fz = f.complex_derivative(0, false);
        const TrigPoly fzb = f.complex_derivative(0, true);
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(nm);
        const double two_pi = 2.0 * std::numbers::pi;
        for (int a = 0; a < g; ++a)
            for (int b = 0; b < g; ++b) {
                Eigen::VectorXd p(2);
                p << static_cast<double>(a) / g, static_cast<double>(b) / g;
                // F(z) = z - xi(z)
                const Complex x = f.evaluate(p);
                const Complex x_z = fz.evaluate(p);
                const Complex x_zb = fzb.evaluate(p);
                const Complex F_z = 1.0 - x_z;
                const Complex F_zb = -x_zb;
                const Complex Fbar_z = -std::conj(x_zb);
                const Complex Fbar_zb = 1.0 - std::conj(x_z);
                Eigen::VectorXd q(2);
                q << p(0) - x.real(), p(1) - x.imag();
                const Complex muF = mu.evaluate(q);
                const Complex num = F_zb - muF * Fbar_zb;
                const Complex den = F_z - muF * Fbar_z;
                const Complex mu_new = -num / den;
                for (Index m = 0; m < nm; ++m) {
                    const Mode& k = modes[static_cast<size_t>(m)];
                    acc(m) += mu_new * std::polar(1.0, -two_pi * (k[0] * p(0) + k[1] * p(1)));
                }
            }
        acc /= static_cast<double>(g * g);
        Eigen::VectorXd out(2 * nm);
        for (Index m = 0; m < nm; ++m) {
            out(2 * m) = acc(m).real();
            out(2 * m + 1) = acc(m).imag();
        }
        return out;
    };
    return sys;
}

} // namespace moduli::torus
