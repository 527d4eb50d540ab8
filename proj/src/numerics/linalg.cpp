#include "moduli/numerics/linalg.hpp"

#include "moduli/error.hpp"
#include "moduli/numerics/random.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace moduli::numerics {

namespace {

// Lower Cholesky factor of the Gram restricted to idx.
Eigen::MatrixXd sub_cholesky(const LabeledBasis& b, const std::vector<Index>& idx) {
    const auto n = static_cast<Index>(idx.size());
    if (b.diagonal_gram()) {
        Eigen::VectorXd w(n);
        for (Index i = 0; i < n; ++i) w(i) = std::sqrt(b.weights()(idx[static_cast<size_t>(i)]));
        return w.asDiagonal().toDenseMatrix();
    }
    Eigen::MatrixXd g(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) g(i, j) = b.gram_entry(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw InvalidBasisError(b.id() + ": singular gram block");
    return llt.matrixL();
}

Eigen::MatrixXd sub_gram(const LabeledBasis& b, const std::vector<Index>& idx) {
    const auto n = static_cast<Index>(idx.size());
    Eigen::MatrixXd g(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) g(i, j) = b.gram_entry(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    return g;
}

template <class T>
Matrix<T> lower_solve(const Eigen::MatrixXd& l, const Matrix<T>& rhs) {
    return l.template cast<T>().template triangularView<Eigen::Lower>().solve(rhs);
}

template <class T>
Matrix<T> upper_solve_transpose(const Eigen::MatrixXd& l, const Matrix<T>& rhs) {
    // solves L^T x = rhs
    return l.transpose().template cast<T>().template triangularView<Eigen::Upper>().solve(rhs);
}

// SVD of one block in Gram-whitened coordinates.
template <class T>
struct WhitenedSvd {
    Matrix<T> u; // full, cod x cod
    Matrix<T> v; // full, dom x dom
    Eigen::VectorXd s;
    Eigen::MatrixXd l_dom;
    Eigen::MatrixXd l_cod;
};

template <class T>
WhitenedSvd<T> whitened_svd(const LabeledBasis& dom, const LabeledBasis& cod, const OperatorBlock<T>& b) {
    WhitenedSvd<T> out;
    out.l_dom = sub_cholesky(dom, b.dom);
    out.l_cod = sub_cholesky(cod, b.cod);
    const auto m = static_cast<Index>(b.cod.size());
    const auto n = static_cast<Index>(b.dom.size());
    if (m == 0 || n == 0) {
        out.u = Matrix<T>::Identity(m, m);
        out.v = Matrix<T>::Identity(n, n);
        out.s = Eigen::VectorXd(0);
        return out;
    }
    // X = A L_d^{-T}  via  L_d X^T = A^T
    Matrix<T> xt = lower_solve<T>(out.l_dom, Matrix<T>(b.entries.transpose()));
    Matrix<T> w = out.l_cod.transpose().template cast<T>() * Matrix<T>(xt.transpose());
    if (std::min(m, n) <= 16) {
        Eigen::JacobiSVD<Matrix<T>> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
        out.u = svd.matrixU();
        out.v = svd.matrixV();
        out.s = svd.singularValues();
    } else {
        Eigen::BDCSVD<Matrix<T>> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
        out.u = svd.matrixU();
        out.v = svd.matrixV();
        out.s = svd.singularValues();
    }
    return out;
}

template <class T>
std::vector<WhitenedSvd<T>> all_svds(const BlockOperator<T>& a, double& sigma_max) {
    std::vector<WhitenedSvd<T>> svds;
    svds.reserve(a.blocks.size());
    sigma_max = 0.0;
    for (const auto& b : a.blocks) {
        svds.push_back(whitened_svd<T>(*a.domain, *a.codomain, b));
        if (svds.back().s.size() > 0) sigma_max = std::max(sigma_max, svds.back().s(0));
    }
    return svds;
}

Index count_above(const Eigen::VectorXd& s, double thresh, double sigma_max) {
    if (sigma_max == 0.0) return 0;
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > thresh) ++r;
    return r;
}

template <class T>
void append_columns(std::vector<Eigen::Triplet<T>>& trip, Index& col, const std::vector<Index>& rows,
                    const Matrix<T>& vecs) {
    for (Index c = 0; c < vecs.cols(); ++c) {
        for (Index r = 0; r < vecs.rows(); ++r) {
            const T v = vecs(r, c);
            if (v != T(0)) trip.emplace_back(rows[static_cast<size_t>(r)], col, v);
        }
        ++col;
    }
}

std::vector<Index> iota_indices(Index n) {
    std::vector<Index> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    return idx;
}

} // namespace

template <class T>
BlockOperator<T>::BlockOperator(BasisPtr dom, BasisPtr cod, std::vector<OperatorBlock<T>> b)
    : domain(std::move(dom)), codomain(std::move(cod)), blocks(std::move(b)) {
    validate();
}

template <class T>
BlockOperator<T> BlockOperator<T>::single(const OperatorMatrix<T>& op) {
    OperatorBlock<T> b{iota_indices(op.domain->dim()), iota_indices(op.codomain->dim()), op.entries};
    return BlockOperator<T>(op.domain, op.codomain, {b});
}

template <class T>
void BlockOperator<T>::validate() const {
    std::vector<char> seen_dom(static_cast<size_t>(domain->dim()), 0);
    std::vector<char> seen_cod(static_cast<size_t>(codomain->dim()), 0);
    for (const auto& b : blocks) {
        if (b.entries.rows() != static_cast<Index>(b.cod.size()) || b.entries.cols() != static_cast<Index>(b.dom.size()))
            throw DimensionError("block shape in " + domain->id() + " -> " + codomain->id());
        for (Index i : b.dom) {
            if (i < 0 || i >= domain->dim() || seen_dom[static_cast<size_t>(i)])
                throw DimensionError("domain partition of " + domain->id());
            seen_dom[static_cast<size_t>(i)] = 1;
        }
        for (Index i : b.cod) {
            if (i < 0 || i >= codomain->dim() || seen_cod[static_cast<size_t>(i)])
                throw DimensionError("codomain partition of " + codomain->id());
            seen_cod[static_cast<size_t>(i)] = 1;
        }
    }
    if (std::find(seen_dom.begin(), seen_dom.end(), 0) != seen_dom.end())
        throw DimensionError("domain partition of " + domain->id() + " incomplete");
    if (std::find(seen_cod.begin(), seen_cod.end(), 0) != seen_cod.end())
        throw DimensionError("codomain partition of " + codomain->id() + " incomplete");
    if (blocks.size() > 1) {
        for (const auto* basis : {domain.get(), codomain.get()}) {
            if (basis->diagonal_gram()) continue;
            std::vector<size_t> owner(static_cast<size_t>(basis->dim()));
            for (size_t k = 0; k < blocks.size(); ++k)
                for (Index i : (basis == domain.get() ? blocks[k].dom : blocks[k].cod)) owner[static_cast<size_t>(i)] = k;
            for (Index i = 0; i < basis->dim(); ++i)
                for (Index j = 0; j < basis->dim(); ++j)
                    if (owner[static_cast<size_t>(i)] != owner[static_cast<size_t>(j)] && basis->gram_entry(i, j) != 0.0)
                        throw InvalidBasisError(basis->id() + ": gram couples operator blocks");
        }
    }
}

template <class T>
OperatorMatrix<T> BlockOperator<T>::to_dense() const {
    Matrix<T> m = Matrix<T>::Zero(codomain->dim(), domain->dim());
    for (const auto& b : blocks)
        for (size_t r = 0; r < b.cod.size(); ++r)
            for (size_t c = 0; c < b.dom.size(); ++c)
                m(b.cod[r], b.dom[c]) = b.entries(static_cast<Index>(r), static_cast<Index>(c));
    return OperatorMatrix<T>(domain, codomain, std::move(m));
}

template <class T>
Vector<T> BlockOperator<T>::apply(const Vector<T>& u) const {
    if (u.size() != domain->dim()) throw DimensionError("apply on " + domain->id());
    Vector<T> out = Vector<T>::Zero(codomain->dim());
    for (const auto& b : blocks) {
        if (b.dom.empty() || b.cod.empty()) continue;
        Vector<T> x(static_cast<Index>(b.dom.size()));
        for (size_t c = 0; c < b.dom.size(); ++c) x(static_cast<Index>(c)) = u(b.dom[c]);
        Vector<T> y = b.entries * x;
        for (size_t r = 0; r < b.cod.size(); ++r) out(b.cod[r]) += y(static_cast<Index>(r));
    }
    return out;
}

template <class T>
OperatorMatrix<T> gram_adjoint(const OperatorMatrix<T>& a) {
    const LabeledBasis& d = *a.domain;
    const LabeledBasis& c = *a.codomain;
    Matrix<T> rhs;
    if (c.diagonal_gram()) rhs = a.entries.adjoint() * c.weights().template cast<T>().asDiagonal();
    else rhs = a.entries.adjoint() * c.gram_apply<T>(Matrix<T>::Identity(c.dim(), c.dim()));
    Matrix<T> out;
    if (d.diagonal_gram()) {
        out = d.weights().cwiseInverse().template cast<T>().asDiagonal() * rhs;
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt(d.gram());
        if (llt.info() != Eigen::Success) throw InvalidBasisError(d.id() + ": singular gram");
        const Eigen::MatrixXd l = d.cholesky_factor();
        out = upper_solve_transpose<T>(l, lower_solve<T>(l, rhs));
    }
    return OperatorMatrix<T>(a.codomain, a.domain, std::move(out));
}

template <class T>
BlockOperator<T> gram_adjoint(const BlockOperator<T>& a) {
    std::vector<OperatorBlock<T>> blocks;
    blocks.reserve(a.blocks.size());
    for (const auto& b : a.blocks) {
        OperatorBlock<T> nb{b.cod, b.dom, Matrix<T>()};
        if (b.dom.empty() || b.cod.empty()) {
            nb.entries = Matrix<T>::Zero(static_cast<Index>(b.dom.size()), static_cast<Index>(b.cod.size()));
        } else {
            const Eigen::MatrixXd gc = sub_gram(*a.codomain, b.cod);
            const Eigen::MatrixXd ld = sub_cholesky(*a.domain, b.dom);
            Matrix<T> rhs = b.entries.adjoint() * gc.template cast<T>();
            nb.entries = upper_solve_transpose<T>(ld, lower_solve<T>(ld, rhs));
        }
        blocks.push_back(std::move(nb));
    }
    return BlockOperator<T>(a.codomain, a.domain, std::move(blocks));
}

template <class T>
Subspace<T> kernel_basis(const BlockOperator<T>& a, double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("rel_tol must lie in (0,1)");
    double smax = 0.0;
    auto svds = all_svds(a, smax);
    const double thresh = rel_tol * smax;
    std::vector<Eigen::Triplet<T>> trip;
    Index col = 0;
    for (size_t k = 0; k < a.blocks.size(); ++k) {
        const auto& b = a.blocks[k];
        const auto& sv = svds[k];
        const auto n = static_cast<Index>(b.dom.size());
        if (n == 0) continue;
        const Index r = count_above(sv.s, thresh, smax);
        Matrix<T> vt = sv.v.rightCols(n - r);
        append_columns<T>(trip, col, b.dom, upper_solve_transpose<T>(sv.l_dom, vt));
    }
    Eigen::SparseMatrix<T> m(a.domain->dim(), col);
    m.setFromTriplets(trip.begin(), trip.end());
    return Subspace<T>(a.domain, std::move(m));
}

template <class T>
Subspace<T> kernel_basis(const OperatorMatrix<T>& a, double rel_tol) {
    return kernel_basis(BlockOperator<T>::single(a), rel_tol);
}

template <class T>
Subspace<T> image_basis(const BlockOperator<T>& a, double rel_tol) {
    double smax = 0.0;
    auto svds = all_svds(a, smax);
    const double thresh = rel_tol * smax;
    std::vector<Eigen::Triplet<T>> trip;
    Index col = 0;
    for (size_t k = 0; k < a.blocks.size(); ++k) {
        const auto& b = a.blocks[k];
        const auto& sv = svds[k];
        if (b.cod.empty()) continue;
        const Index r = count_above(sv.s, thresh, smax);
        Matrix<T> ut = sv.u.leftCols(r);
        append_columns<T>(trip, col, b.cod, upper_solve_transpose<T>(sv.l_cod, ut));
    }
    Eigen::SparseMatrix<T> m(a.codomain->dim(), col);
    m.setFromTriplets(trip.begin(), trip.end());
    return Subspace<T>(a.codomain, std::move(m));
}

template <class T>
Subspace<T> coimage_basis(const BlockOperator<T>& a, double rel_tol) {
    double smax = 0.0;
    auto svds = all_svds(a, smax);
    const double thresh = rel_tol * smax;
    std::vector<Eigen::Triplet<T>> trip;
    Index col = 0;
    for (size_t k = 0; k < a.blocks.size(); ++k) {
        const auto& b = a.blocks[k];
        const auto& sv = svds[k];
        if (b.dom.empty()) continue;
        const Index r = count_above(sv.s, thresh, smax);
        Matrix<T> vt = sv.v.leftCols(r);
        append_columns<T>(trip, col, b.dom, upper_solve_transpose<T>(sv.l_dom, vt));
    }
    Eigen::SparseMatrix<T> m(a.domain->dim(), col);
    m.setFromTriplets(trip.begin(), trip.end());
    return Subspace<T>(a.domain, std::move(m));
}

template <class T>
Index rank(const BlockOperator<T>& a, double rel_tol) {
    double smax = 0.0;
    auto svds = all_svds(a, smax);
    Index r = 0;
    for (const auto& sv : svds) r += count_above(sv.s, rel_tol * smax, smax);
    return r;
}

template <class T>
Index rank(const OperatorMatrix<T>& a, double rel_tol) {
    return rank(BlockOperator<T>::single(a), rel_tol);
}

template <class T>
double operator_norm(const BlockOperator<T>& a) {
    double smax = 0.0;
    all_svds(a, smax);
    return smax;
}

template <class T>
double operator_norm(const OperatorMatrix<T>& a) {
    return operator_norm(BlockOperator<T>::single(a));
}

template <class T>
BlockOperator<T> stack(const std::vector<BlockOperator<T>>& ops, const std::string& id) {
    if (ops.empty()) throw DimensionError("stack of no operators");
    std::vector<BasisPtr> cods;
    for (const auto& op : ops) {
        if (op.domain->dim() != ops.front().domain->dim()) throw DimensionError("stack: domains differ");
        if (op.blocks.size() != ops.front().blocks.size()) throw DimensionError("stack: block partitions differ");
        for (size_t k = 0; k < op.blocks.size(); ++k)
            if (op.blocks[k].dom != ops.front().blocks[k].dom) throw DimensionError("stack: block partitions differ");
        cods.push_back(op.codomain);
    }
    BasisPtr cod = direct_sum(id, cods);
    std::vector<OperatorBlock<T>> blocks;
    for (size_t k = 0; k < ops.front().blocks.size(); ++k) {
        OperatorBlock<T> nb;
        nb.dom = ops.front().blocks[k].dom;
        Index rows = 0;
        for (const auto& op : ops) rows += op.blocks[k].entries.rows();
        nb.entries = Matrix<T>::Zero(rows, static_cast<Index>(nb.dom.size()));
        Index off_rows = 0;
        Index off_cod = 0;
        for (const auto& op : ops) {
            const auto& b = op.blocks[k];
            if (b.entries.rows() > 0) nb.entries.middleRows(off_rows, b.entries.rows()) = b.entries;
            for (Index i : b.cod) nb.cod.push_back(i + off_cod);
            off_rows += b.entries.rows();
            off_cod += op.codomain->dim();
        }
        blocks.push_back(std::move(nb));
    }
    return BlockOperator<T>(ops.front().domain, cod, std::move(blocks));
}

template <class T>
Matrix<T> orthonormalize(const LabeledBasis& ambient, const Matrix<T>& m, double rel_tol) {
    if (m.cols() == 0) return Matrix<T>(ambient.dim(), 0);
    Matrix<T> w = ambient.whiten<T>(m);
    Eigen::BDCSVD<Matrix<T>> svd(w, Eigen::ComputeThinU);
    const Eigen::VectorXd s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    const Index r = count_above(s, rel_tol * smax, smax);
    Matrix<T> u = svd.matrixU().leftCols(r);
    return ambient.unwhiten<T>(u);
}

template <class T>
Index span_rank(const LabeledBasis& ambient, const Matrix<T>& m, double rel_tol) {
    if (m.cols() == 0) return 0;
    Matrix<T> w = ambient.whiten<T>(m);
    Eigen::BDCSVD<Matrix<T>> svd(w);
    const Eigen::VectorXd s = svd.singularValues();
    return count_above(s, rel_tol * (s.size() ? s(0) : 0.0), s.size() ? s(0) : 0.0);
}

template <class T>
Matrix<T> orthogonal_complement(const LabeledBasis& ambient, const Matrix<T>& vectors, const Matrix<T>& within,
                                double rel_tol) {
    if (within.cols() == 0) return Matrix<T>(ambient.dim(), 0);
    if (vectors.cols() == 0) return within;
    // coordinates of the vectors in the orthonormal family `within`
    Matrix<T> gv = ambient.gram_apply<T>(vectors);
    Matrix<T> c = within.adjoint() * gv; // dim(within) x dim(vectors)
    Eigen::BDCSVD<Matrix<T>> svd(c, Eigen::ComputeFullU);
    const Eigen::VectorXd s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    const Index r = count_above(s, rel_tol * std::max(smax, 1.0), smax);
    Matrix<T> null = svd.matrixU().rightCols(within.cols() - r);
    return within * null;
}

template <class T>
double adjoint_defect(const BlockOperator<T>& p, const BlockOperator<T>& q, int samples, std::uint64_t seed) {
    if (q.domain->dim() != p.codomain->dim() || q.codomain->dim() != p.domain->dim())
        throw DimensionError("adjoint pair shapes");
    Rng rng(seed);
    const double pn = operator_norm(p);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        Vector<T> u = random_vector<T>(rng, p.domain->dim());
        Vector<T> w = random_vector<T>(rng, p.codomain->dim());
        const T lhs = inner<T>(*p.codomain, p.apply(u), w);
        const T rhs = inner<T>(*p.domain, u, q.apply(w));
        const double scale = pn * norm<T>(*p.domain, u) * norm<T>(*p.codomain, w);
        const double d = std::abs(lhs - rhs);
        worst = std::max(worst, scale > 0.0 ? d / scale : d);
    }
    return worst;
}

template <class T>
double adjoint_defect(const OperatorMatrix<T>& p, const OperatorMatrix<T>& q, int samples, std::uint64_t seed) {
    return adjoint_defect(BlockOperator<T>::single(p), BlockOperator<T>::single(q), samples, seed);
}

#define MODULI_INSTANTIATE(T)                                                                                  \
    template struct BlockOperator<T>;                                                                          \
    template OperatorMatrix<T> gram_adjoint<T>(const OperatorMatrix<T>&);                                      \
    template BlockOperator<T> gram_adjoint<T>(const BlockOperator<T>&);                                        \
    template Subspace<T> kernel_basis<T>(const OperatorMatrix<T>&, double);                                    \
    template Subspace<T> kernel_basis<T>(const BlockOperator<T>&, double);                                     \
    template Subspace<T> image_basis<T>(const BlockOperator<T>&, double);                                      \
    template Subspace<T> coimage_basis<T>(const BlockOperator<T>&, double);                                    \
    template Index rank<T>(const OperatorMatrix<T>&, double);                                                  \
    template Index rank<T>(const BlockOperator<T>&, double);                                                   \
    template double operator_norm<T>(const OperatorMatrix<T>&);                                                \
    template double operator_norm<T>(const BlockOperator<T>&);                                                 \
    template BlockOperator<T> stack<T>(const std::vector<BlockOperator<T>>&, const std::string&);              \
    template Matrix<T> orthogonal_complement<T>(const LabeledBasis&, const Matrix<T>&, const Matrix<T>&, double); \
    template Matrix<T> orthonormalize<T>(const LabeledBasis&, const Matrix<T>&, double);                       \
    template Index span_rank<T>(const LabeledBasis&, const Matrix<T>&, double);                                \
    template double adjoint_defect<T>(const BlockOperator<T>&, const BlockOperator<T>&, int, std::uint64_t);   \
    template double adjoint_defect<T>(const OperatorMatrix<T>&, const OperatorMatrix<T>&, int, std::uint64_t);

MODULI_INSTANTIATE(double)
MODULI_INSTANTIATE(Complex)

#undef MODULI_INSTANTIATE

} // namespace moduli::numerics
