#pragma once

#include "moduli/numerics/basis.hpp"

#include <cstdint>
#include <vector>

namespace moduli::numerics {

inline constexpr double kDefaultRelTol = 1e-8;

/// One dense block of a block-diagonal operator: entries map the domain
/// coordinates `dom` to the codomain coordinates `cod`.
template <class T>
struct OperatorBlock {
    std::vector<Index> dom;
    std::vector<Index> cod;
    Matrix<T> entries;
};

/// Operator that is block-diagonal with respect to index partitions of its
/// domain and codomain. The Grams must not couple different blocks.
template <class T>
struct BlockOperator {
    BasisPtr domain;
    BasisPtr codomain;
    std::vector<OperatorBlock<T>> blocks;

    BlockOperator() = default;
    BlockOperator(BasisPtr dom, BasisPtr cod, std::vector<OperatorBlock<T>> b);
    static BlockOperator single(const OperatorMatrix<T>& op);

    [[nodiscard]] OperatorMatrix<T> to_dense() const;
    [[nodiscard]] Vector<T> apply(const Vector<T>& u) const;
    /// Throws unless the index sets partition both spaces and the Grams are block-diagonal.
    void validate() const;
};

template <class T>
OperatorMatrix<T> gram_adjoint(const OperatorMatrix<T>& a);
template <class T>
BlockOperator<T> gram_adjoint(const BlockOperator<T>& a);

/// Gram-orthonormal basis of the numerical kernel (singular values <= rel_tol * sigma_max,
/// singular values taken in Gram-whitened coordinates).
template <class T>
Subspace<T> kernel_basis(const OperatorMatrix<T>& a, double rel_tol = kDefaultRelTol);
template <class T>
Subspace<T> kernel_basis(const BlockOperator<T>& a, double rel_tol = kDefaultRelTol);

/// Gram-orthonormal basis of the numerical image (in the codomain).
template <class T>
Subspace<T> image_basis(const BlockOperator<T>& a, double rel_tol = kDefaultRelTol);
/// Gram-orthonormal basis of the orthogonal complement of the kernel (in the domain).
template <class T>
Subspace<T> coimage_basis(const BlockOperator<T>& a, double rel_tol = kDefaultRelTol);

template <class T>
Index rank(const OperatorMatrix<T>& a, double rel_tol = kDefaultRelTol);
template <class T>
Index rank(const BlockOperator<T>& a, double rel_tol = kDefaultRelTol);

/// Largest singular value in Gram-whitened coordinates, i.e. the operator norm
/// induced by the two Gram inner products.
template <class T>
double operator_norm(const OperatorMatrix<T>& a);
template <class T>
double operator_norm(const BlockOperator<T>& a);

/// Vertical stack of operators sharing one domain and one domain partition.
/// The codomain is the direct sum of the codomains.
template <class T>
BlockOperator<T> stack(const std::vector<BlockOperator<T>>& ops, const std::string& id);

/// Gram-orthonormal basis of the orthogonal complement of span(vectors) inside
/// span(within) (both Gram-orthonormal families in the same ambient basis).
template <class T>
Matrix<T> orthogonal_complement(const LabeledBasis& ambient, const Matrix<T>& vectors, const Matrix<T>& within,
                                double rel_tol = kDefaultRelTol);

/// Gram-orthonormalize the columns of m, dropping numerically dependent ones.
template <class T>
Matrix<T> orthonormalize(const LabeledBasis& ambient, const Matrix<T>& m, double rel_tol = kDefaultRelTol);

/// Numerical rank of a family of column vectors measured in the Gram norm.
template <class T>
Index span_rank(const LabeledBasis& ambient, const Matrix<T>& m, double rel_tol = kDefaultRelTol);

/// max over random (u, w) of |<Pu, w> - <u, Q w>| / (||P|| ||u|| ||w||).
template <class T>
double adjoint_defect(const BlockOperator<T>& p, const BlockOperator<T>& q, int samples, std::uint64_t seed);
template <class T>
double adjoint_defect(const OperatorMatrix<T>& p, const OperatorMatrix<T>& q, int samples, std::uint64_t seed);

} // namespace moduli::numerics
