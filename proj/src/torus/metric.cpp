#include "moduli/torus/metric.hpp"

#include "moduli/error.hpp"

#include <numbers>

namespace moduli::torus {

using numerics::LabeledBasis;
using numerics::OperatorBlock;

int RealTorus::sym_index(int a, int b) const {
    if (a > b) std::swap(a, b);
    int idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (i == a && j == b) return idx;
            ++idx;
        }
    throw DomainError("sym_index out of range");
}

int RealTorus::parts(const Mode& k) { return sup_norm(k) == 0 ? 1 : 2; }

RealTorus real_torus(int n, int cutoff) {
    if (n < 1 || n > 3) throw DomainError("real torus dimension must be 1, 2 or 3");
    if (cutoff < 0) throw DomainError("negative cutoff");
    RealTorus t;
    t.n = n;
    t.cutoff = cutoff;
    t.modes = half_lattice_modes(n, cutoff);
    std::vector<numerics::Label> fl, sl;
    std::vector<double> fw, sw;
    for (const auto& k : t.modes) {
        t.field_offset.push_back(static_cast<Index>(fl.size()));
        t.sym_offset.push_back(static_cast<Index>(sl.size()));
        const int np = RealTorus::parts(k);
        const double base = np == 1 ? 1.0 : 0.5;
        for (int part = 0; part < np; ++part) {
            for (int b = 0; b < n; ++b) {
                numerics::Label l = k;
                l.push_back(part);
                l.push_back(b);
                fl.push_back(std::move(l));
                fw.push_back(base);
            }
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    numerics::Label l = k;
                    l.push_back(part);
                    l.push_back(a);
                    l.push_back(b);
                    sl.push_back(std::move(l));
                    sw.push_back(a == b ? base : 2.0 * base);
                }
        }
    }
    const std::string tag = "R" + std::to_string(n) + "c" + std::to_string(cutoff);
    t.fields = std::make_shared<const LabeledBasis>(tag + "-fields", std::move(fl),
                                                    Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(fw.data(), static_cast<Index>(fw.size()))));
    t.sym = std::make_shared<const LabeledBasis>(tag + "-sym", std::move(sl),
                                                 Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(sw.data(), static_cast<Index>(sw.size()))));
    return t;
}

BlockOperator<double> metric_slice_operator(const RealTorus& t) {
    const int n = t.n;
    const int s = t.sym_count();
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<OperatorBlock<double>> blocks;
    for (size_t m = 0; m < t.modes.size(); ++m) {
        const Mode& k = t.modes[m];
        const int np = RealTorus::parts(k);
        OperatorBlock<double> b;
        for (Index i = 0; i < np * n; ++i) b.dom.push_back(t.field_offset[m] + i);
        for (Index i = 0; i < np * s; ++i) b.cod.push_back(t.sym_offset[m] + i);
        b.entries = Eigen::MatrixXd::Zero(np * s, np * n);
        if (np == 2) {
            // chi_b = c_b cos + d_b sin:  h_ab = 2 pi (k_a d_b + k_b d_a) cos - 2 pi (k_a c_b + k_b c_a) sin
            for (int a = 0; a < n; ++a)
                for (int c = a; c < n; ++c) {
                    const int r = t.sym_index(a, c);
                    const double ka = two_pi * k[static_cast<size_t>(a)];
                    const double kc = two_pi * k[static_cast<size_t>(c)];
                    b.entries(r, n + c) += ka;
                    b.entries(r, n + a) += kc;
                    b.entries(s + r, c) -= ka;
                    b.entries(s + r, a) -= kc;
                }
        }
        blocks.push_back(std::move(b));
    }
    return BlockOperator<double>(t.fields, t.sym, std::move(blocks));
}

Index metric_slice_dim(int n, int cutoff, double rel_tol) {
    const RealTorus t = real_torus(n, cutoff);
    return numerics::kernel_basis(numerics::gram_adjoint(metric_slice_operator(t)), rel_tol).dim();
}

Index metric_slice_dim_formula(int n, int cutoff) {
    Index modes = 1;
    for (int i = 0; i < n; ++i) modes *= 2 * cutoff + 1;
    return modes * n * (n - 1) / 2 + n;
}

} // namespace moduli::torus
