#include "moduli/numerics/basis.hpp"

#include "moduli/error.hpp"

#include <set>

namespace moduli::numerics {

namespace {

void check_labels(const std::string& id, const std::vector<Label>& labels, std::map<Label, Index>& index) {
    if (labels.empty()) throw InvalidBasisError(id + ": empty basis");
    for (size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = index.emplace(labels[i], static_cast<Index>(i));
        if (!fresh) throw InvalidBasisError(id + ": duplicate label");
    }
}

} // namespace

LabeledBasis::LabeledBasis(std::string id, std::vector<Label> labels, Eigen::MatrixXd gram)
    : id_(std::move(id)), labels_(std::move(labels)) {
    check_labels(id_, labels_, index_);
    const Index n = dim();
    if (gram.rows() != n || gram.cols() != n) throw InvalidBasisError(id_ + ": gram size differs from label count");
    const double scale = gram.cwiseAbs().maxCoeff();
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
        throw InvalidBasisError(id_ + ": gram not symmetric");
    Eigen::MatrixXd off = gram;
    off.diagonal().setZero();
    diagonal_ = off.cwiseAbs().maxCoeff() == 0.0;
    weights_ = gram.diagonal();
    if (diagonal_) {
        if ((weights_.array() <= 0.0).any()) throw InvalidBasisError(id_ + ": gram not positive definite");
        return;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw InvalidBasisError(id_ + ": gram not positive definite");
    chol_ = llt.matrixL();
    if ((chol_.diagonal().array() <= 0.0).any()) throw InvalidBasisError(id_ + ": gram not positive definite");
    gram_ = std::move(gram);
}

LabeledBasis::LabeledBasis(std::string id, std::vector<Label> labels, Eigen::VectorXd weights)
    : id_(std::move(id)), labels_(std::move(labels)), weights_(std::move(weights)), diagonal_(true) {
    check_labels(id_, labels_, index_);
    if (weights_.size() != dim()) throw InvalidBasisError(id_ + ": gram size differs from label count");
    if ((weights_.array() <= 0.0).any() || !weights_.allFinite())
        throw InvalidBasisError(id_ + ": gram not positive definite");
}

Eigen::MatrixXd LabeledBasis::gram() const {
    if (diagonal_) return weights_.asDiagonal();
    return gram_;
}

double LabeledBasis::gram_entry(Index i, Index j) const {
    if (diagonal_) return i == j ? weights_(i) : 0.0;
    return gram_(i, j);
}

Eigen::MatrixXd LabeledBasis::cholesky_factor() const {
    if (diagonal_) return weights_.cwiseSqrt().asDiagonal();
    return chol_;
}

std::shared_ptr<const LabeledBasis> LabeledBasis::diagonal(std::string id, std::vector<Label> labels,
                                                           const Eigen::VectorXd& weights) {
    return std::make_shared<const LabeledBasis>(std::move(id), std::move(labels), Eigen::VectorXd(weights));
}

std::shared_ptr<const LabeledBasis> LabeledBasis::orthonormal(std::string id, std::vector<Label> labels) {
    const auto n = static_cast<Index>(labels.size());
    return std::make_shared<const LabeledBasis>(std::move(id), std::move(labels), Eigen::VectorXd(Eigen::VectorXd::Ones(n)));
}

std::shared_ptr<const LabeledBasis> LabeledBasis::euclidean(std::string id, Index dim) {
    std::vector<Label> labels;
    labels.reserve(static_cast<size_t>(dim));
    for (Index i = 0; i < dim; ++i) labels.push_back({static_cast<int>(i)});
    return orthonormal(std::move(id), std::move(labels));
}

std::optional<Index> LabeledBasis::index_of(const Label& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

BasisPtr direct_sum(std::string id, const std::vector<BasisPtr>& parts) {
    Index n = 0;
    bool diag = true;
    for (const auto& p : parts) {
        n += p->dim();
        diag = diag && p->diagonal_gram();
    }
    std::vector<Label> labels;
    labels.reserve(static_cast<size_t>(n));
    Eigen::VectorXd weights(n);
    Eigen::MatrixXd gram;
    if (!diag) gram = Eigen::MatrixXd::Zero(n, n);
    Index off = 0;
    for (size_t s = 0; s < parts.size(); ++s) {
        for (const auto& l : parts[s]->labels()) {
            Label nl;
            nl.reserve(l.size() + 1);
            nl.push_back(static_cast<int>(s));
            nl.insert(nl.end(), l.begin(), l.end());
            labels.push_back(std::move(nl));
        }
        weights.segment(off, parts[s]->dim()) = parts[s]->weights();
        if (!diag) gram.block(off, off, parts[s]->dim(), parts[s]->dim()) = parts[s]->gram();
        off += parts[s]->dim();
    }
    if (diag) return std::make_shared<const LabeledBasis>(std::move(id), std::move(labels), std::move(weights));
    return std::make_shared<const LabeledBasis>(std::move(id), std::move(labels), std::move(gram));
}

template <class T>
Coefficients<T>::Coefficients(BasisPtr b, Vector<T> v) : basis(std::move(b)), values(std::move(v)) {
    if (values.size() != basis->dim()) throw DimensionError("coefficients length differs from basis " + basis->id());
}

template <class T>
T inner(const LabeledBasis& basis, const Vector<T>& u, const Vector<T>& v) {
    if (u.size() != basis.dim() || v.size() != basis.dim()) throw DimensionError("inner product on " + basis.id());
    if (basis.diagonal_gram()) return u.dot(basis.weights().template cast<T>().cwiseProduct(v));
    return u.dot(Vector<T>(basis.gram_apply<T>(v)));
}

template <class T>
double norm(const LabeledBasis& basis, const Vector<T>& u) {
    return std::sqrt(std::max(0.0, std::real(inner<T>(basis, u, u))));
}

template <class T>
T inner(const Coefficients<T>& u, const Coefficients<T>& v) {
    if (u.basis != v.basis) throw DimensionError("inner product across different bases");
    return inner<T>(*u.basis, u.values, v.values);
}

template <class T>
double norm(const Coefficients<T>& u) {
    return norm<T>(*u.basis, u.values);
}

template <class T>
OperatorMatrix<T>::OperatorMatrix(BasisPtr dom, BasisPtr cod, Matrix<T> m)
    : domain(std::move(dom)), codomain(std::move(cod)), entries(std::move(m)) {
    if (entries.rows() != codomain->dim() || entries.cols() != domain->dim())
        throw DimensionError("operator " + domain->id() + " -> " + codomain->id());
}

template <class T>
Coefficients<T> OperatorMatrix<T>::apply(const Coefficients<T>& u) const {
    if (u.basis->dim() != domain->dim()) throw DimensionError("apply on " + domain->id());
    return Coefficients<T>(codomain, entries * u.values);
}

template <class T>
Subspace<T>::Subspace(BasisPtr amb, Eigen::SparseMatrix<T> v) : ambient(std::move(amb)), vectors(std::move(v)) {
    if (vectors.rows() != ambient->dim()) throw DimensionError("subspace of " + ambient->id());
    vectors.makeCompressed();
}

template <class T>
Subspace<T>::Subspace(BasisPtr amb, const Matrix<T>& dense, double drop) : ambient(std::move(amb)) {
    if (dense.rows() != ambient->dim()) throw DimensionError("subspace of " + ambient->id());
    vectors = dense.sparseView(T(1.0), drop);
    vectors.makeCompressed();
}

template <class T>
Subspace<T> Subspace<T>::empty(BasisPtr amb) {
    const Index n = amb->dim();
    return Subspace<T>(std::move(amb), Eigen::SparseMatrix<T>(n, 0));
}

template <class T>
Coefficients<T> Subspace<T>::vector(Index i) const {
    return Coefficients<T>(ambient, Vector<T>(vectors.col(i)));
}

template <class T>
Vector<T> Subspace<T>::coordinates(const Vector<T>& u) const {
    if (dim() == 0) return Vector<T>(0);
    Vector<T> gu;
    if (ambient->diagonal_gram()) gu = ambient->weights().template cast<T>().cwiseProduct(u);
    else gu = ambient->gram_apply<T>(u);
    return vectors.adjoint() * gu;
}

template <class T>
Vector<T> Subspace<T>::project(const Vector<T>& u) const {
    if (dim() == 0) return Vector<T>::Zero(u.size());
    return vectors * coordinates(u);
}

template struct Coefficients<double>;
template struct Coefficients<Complex>;
template struct OperatorMatrix<double>;
template struct OperatorMatrix<Complex>;
template struct Subspace<double>;
template struct Subspace<Complex>;

template double inner<double>(const LabeledBasis&, const Vector<double>&, const Vector<double>&);
template Complex inner<Complex>(const LabeledBasis&, const Vector<Complex>&, const Vector<Complex>&);
template double norm<double>(const LabeledBasis&, const Vector<double>&);
template double norm<Complex>(const LabeledBasis&, const Vector<Complex>&);
template double inner<double>(const Coefficients<double>&, const Coefficients<double>&);
template Complex inner<Complex>(const Coefficients<Complex>&, const Coefficients<Complex>&);
template double norm<double>(const Coefficients<double>&);
template double norm<Complex>(const Coefficients<Complex>&);

} // namespace moduli::numerics
