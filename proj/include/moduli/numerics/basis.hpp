#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace moduli::numerics {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Label = std::vector<int>;

template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

/// Finite truncation of a function or section space: ordered mode labels plus
/// the Gram matrix of inner products between the basis elements.
class LabeledBasis {
public:
    LabeledBasis(std::string id, std::vector<Label> labels, Eigen::MatrixXd gram);
    /// Diagonal Gram stored as weights only (no dense matrix is formed).
    LabeledBasis(std::string id, std::vector<Label> labels, Eigen::VectorXd weights);

    /// Basis with a diagonal Gram given by `weights`.
    static std::shared_ptr<const LabeledBasis> diagonal(std::string id, std::vector<Label> labels,
                                                        const Eigen::VectorXd& weights);
    static std::shared_ptr<const LabeledBasis> orthonormal(std::string id, std::vector<Label> labels);
    /// Labels {0}, {1}, ..., {dim-1} with identity Gram.
    static std::shared_ptr<const LabeledBasis> euclidean(std::string id, Index dim);

    [[nodiscard]] const std::string& id() const { return id_; }
    [[nodiscard]] const std::vector<Label>& labels() const { return labels_; }
    [[nodiscard]] Index dim() const { return static_cast<Index>(labels_.size()); }
    /// Dense copy of the Gram; avoid on large diagonal bases.
    [[nodiscard]] Eigen::MatrixXd gram() const;
    [[nodiscard]] double gram_entry(Index i, Index j) const;
    [[nodiscard]] bool diagonal_gram() const { return diagonal_; }
    /// Diagonal of the Gram (meaningful as weights only when diagonal_gram()).
    [[nodiscard]] const Eigen::VectorXd& weights() const { return weights_; }
    /// Dense lower Cholesky factor L with gram = L L^T.
    [[nodiscard]] Eigen::MatrixXd cholesky_factor() const;

    /// G m
    template <class T>
    [[nodiscard]] Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> gram_apply(
        const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& m) const {
        if (diagonal_) return weights_.template cast<T>().asDiagonal() * m;
        return gram_.template cast<T>() * m;
    }
    /// L^T m, so that |L^T v| is the Gram norm of v.
    template <class T>
    [[nodiscard]] Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> whiten(
        const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& m) const {
        if (diagonal_) return weights_.cwiseSqrt().template cast<T>().asDiagonal() * m;
        return chol_.transpose().template cast<T>() * m;
    }
    /// Solves L^T x = m.
    template <class T>
    [[nodiscard]] Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> unwhiten(
        const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& m) const {
        if (diagonal_) return weights_.cwiseSqrt().cwiseInverse().template cast<T>().asDiagonal() * m;
        return chol_.transpose().template cast<T>().template triangularView<Eigen::Upper>().solve(m);
    }
    [[nodiscard]] std::optional<Index> index_of(const Label& label) const;

private:
    std::string id_;
    std::vector<Label> labels_;
    Eigen::MatrixXd gram_; // empty when diagonal
    Eigen::VectorXd weights_;
    Eigen::MatrixXd chol_; // empty when diagonal
    bool diagonal_ = false;
    std::map<Label, Index> index_;
};

using BasisPtr = std::shared_ptr<const LabeledBasis>;

/// Direct sum of bases; labels are prefixed with the summand position.
BasisPtr direct_sum(std::string id, const std::vector<BasisPtr>& parts);

template <class T>
struct Coefficients {
    BasisPtr basis;
    Vector<T> values;

    Coefficients() = default;
    Coefficients(BasisPtr b, Vector<T> v);
    static Coefficients zero(BasisPtr b) { return Coefficients(b, Vector<T>::Zero(b->dim())); }
};

/// Gram inner product u^H G v.
template <class T>
T inner(const LabeledBasis& basis, const Vector<T>& u, const Vector<T>& v);
template <class T>
double norm(const LabeledBasis& basis, const Vector<T>& u);

template <class T>
T inner(const Coefficients<T>& u, const Coefficients<T>& v);
template <class T>
double norm(const Coefficients<T>& u);

/// Linear map between two labeled bases.
template <class T>
struct OperatorMatrix {
    BasisPtr domain;
    BasisPtr codomain;
    Matrix<T> entries;

    OperatorMatrix() = default;
    OperatorMatrix(BasisPtr dom, BasisPtr cod, Matrix<T> m);
    [[nodiscard]] Coefficients<T> apply(const Coefficients<T>& u) const;
};

using RealOperator = OperatorMatrix<double>;
using ComplexOperator = OperatorMatrix<Complex>;

/// Gram-orthonormal family of vectors spanning a subspace of `ambient`.
/// Stored sparse because block-structured operators produce local vectors.
template <class T>
struct Subspace {
    BasisPtr ambient;
    Eigen::SparseMatrix<T> vectors; // ambient.dim x dim

    Subspace() = default;
    Subspace(BasisPtr amb, Eigen::SparseMatrix<T> v);
    Subspace(BasisPtr amb, const Matrix<T>& dense, double drop = 0.0);
    static Subspace empty(BasisPtr amb);

    [[nodiscard]] Index dim() const { return vectors.cols(); }
    [[nodiscard]] Matrix<T> dense() const { return Matrix<T>(vectors); }
    [[nodiscard]] Coefficients<T> vector(Index i) const;
    /// Gram-orthogonal projection of u onto the span.
    [[nodiscard]] Vector<T> project(const Vector<T>& u) const;
    /// Coordinates c with project(u) = vectors * c.
    [[nodiscard]] Vector<T> coordinates(const Vector<T>& u) const;
};

extern template struct Coefficients<double>;
extern template struct Coefficients<Complex>;
extern template struct OperatorMatrix<double>;
extern template struct OperatorMatrix<Complex>;
extern template struct Subspace<double>;
extern template struct Subspace<Complex>;

} // namespace moduli::numerics
