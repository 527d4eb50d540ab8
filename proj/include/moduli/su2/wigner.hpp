#pragma once

#include "moduli/numerics/basis.hpp"

#include <array>
#include <compare>
#include <map>
#include <numbers>
#include <vector>

namespace moduli::su2 {

using numerics::BasisPtr;
using numerics::Complex;
using numerics::Index;

/// Volume of SU(2) = S^3 for the metric making the frame e_a = X_a orthonormal.
inline constexpr double kVolume = 2.0 * std::numbers::pi * std::numbers::pi;

/// SU(2) element as a 2x2 complex matrix.
using Su2 = Eigen::Matrix2cd;

/// X_a = -i sigma_a, so [X_a, X_b] = 2 eps_abc X_c.
Eigen::Matrix2cd generator(int a);
/// w I + x X1 + y X2 + z X3 for the unit quaternion (w, x, y, z).
Su2 su2_from_quaternion(const Eigen::Vector4d& q);
Eigen::Vector4d su2_to_quaternion(const Su2& g);
/// exp(sum theta_a X_a).
Su2 su2_exp(const Eigen::Vector3d& theta);
/// theta with su2_exp(theta) = g and |theta| <= pi.
Eigen::Vector3d su2_log(const Su2& g);

/// Deterministic low-discrepancy sample: Halton points mapped by Shoemake's
/// uniform-quaternion construction.
std::vector<Su2> sample_points(int count);

/// Doubled quantum numbers (2j, 2m, 2n) of the matrix coefficient D^j_{mn}.
struct WignerLabel {
    int tj = 0;
    int tm = 0;
    int tn = 0;
    auto operator<=>(const WignerLabel&) const = default;
};

inline int irrep_dim(int tj) { return tj + 1; }
/// Position of m in the ascending order -j, ..., j.
inline int m_index(int tj, int tm) { return (tm + tj) / 2; }
inline int m_value2(int tj, int idx) { return 2 * idx - tj; }
/// (-1)^(m-n), the conjugation sign conj(D_{mn}) = s D_{-m,-n}.
inline int conj_sign(int tm, int tn) { return (((tm - tn) / 2) % 2 == 0) ? 1 : -1; }

/// Spin matrices J_a (Condon-Shortley phases) in the ascending m basis.
Eigen::MatrixXcd spin_matrix(int tj, int a);
/// Representation of X_a: rho(X_a) = -2i J_a.
Eigen::MatrixXcd rho(int tj, int a);
/// D^j(g).
Eigen::MatrixXcd wigner_matrix(int tj, const Su2& g);

/// <j1 m1 j2 m2 | J M>, all arguments doubled.
double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM);

/// Peter-Weyl truncation j <= j_max, ordered by j then (m, n) ascending.
/// The complex basis has labels (2j, 2m, 2n) and Gram vol/(2j+1).
/// The real basis has labels (2j, 2m, 2n, part): for each conjugate pair
/// {(m, n), (-m, -n)} the representative with m > 0, or m = 0 and n > 0,
/// carries Re D_{mn} (part 0) and Im D_{mn} (part 1), each with Gram vol/(2(2j+1));
/// the self-conjugate D^j_{00} keeps weight vol/(2j+1).
class WignerSpace {
public:
    explicit WignerSpace(int two_j_max);

    [[nodiscard]] int two_j_max() const { return two_j_max_; }
    [[nodiscard]] Index dim() const { return dim_; }
    [[nodiscard]] Index block_offset(int tj) const { return offsets_[static_cast<size_t>(tj)]; }
    [[nodiscard]] static Index block_size(int tj) { return static_cast<Index>(tj + 1) * (tj + 1); }
    [[nodiscard]] const BasisPtr& complex_basis() const { return complex_; }
    [[nodiscard]] const BasisPtr& real_basis() const { return real_; }
    [[nodiscard]] const std::vector<WignerLabel>& labels() const { return labels_; }
    [[nodiscard]] Index index_of(const WignerLabel& l) const;

    /// Complex coefficients (per block) of the real basis functions: c = C r.
    [[nodiscard]] const Eigen::MatrixXcd& real_to_complex(int tj) const { return r2c_[static_cast<size_t>(tj)]; }
    /// Real coordinates of Re(f) for f with block coefficients c.
    [[nodiscard]] Eigen::VectorXd real_part_coords(int tj, const Eigen::VectorXcd& c) const;
    /// Complex action of e_a on the block coefficients (c' = M c).
    [[nodiscard]] const Eigen::MatrixXcd& complex_frame_block(int tj, int a) const {
        return complex_frame_[static_cast<size_t>(tj)][static_cast<size_t>(a)];
    }
    /// Real matrix of e_a on the real block.
    [[nodiscard]] const Eigen::MatrixXd& real_frame_block(int tj, int a) const {
        return real_frame_[static_cast<size_t>(tj)][static_cast<size_t>(a)];
    }

    [[nodiscard]] Eigen::VectorXcd real_to_complex(const Eigen::VectorXd& r) const;
    [[nodiscard]] Eigen::VectorXd real_part_coords(const Eigen::VectorXcd& c) const;

private:
    int two_j_max_;
    Index dim_ = 0;
    std::vector<Index> offsets_;
    std::vector<WignerLabel> labels_;
    std::map<WignerLabel, Index> index_;
    BasisPtr complex_;
    BasisPtr real_;
    std::vector<Eigen::MatrixXcd> r2c_;
    std::vector<std::array<Eigen::MatrixXcd, 3>> complex_frame_;
    std::vector<std::array<Eigen::MatrixXd, 3>> real_frame_;
};

/// Finite Peter-Weyl expansion sum c_l D_l (sparse, unbounded j).
class WignerPoly {
public:
    WignerPoly() = default;

    static WignerPoly constant(Complex c);
    static WignerPoly single(const WignerLabel& l, Complex c = 1.0);
    static WignerPoly from_complex(const WignerSpace& s, const Eigen::VectorXcd& c);
    static WignerPoly from_real(const WignerSpace& s, const Eigen::VectorXd& r);

    [[nodiscard]] const std::map<WignerLabel, Complex>& terms() const { return terms_; }
    void add_term(const WignerLabel& l, Complex c);
    [[nodiscard]] Complex coeff(const WignerLabel& l) const;
    [[nodiscard]] bool empty() const { return terms_.empty(); }
    [[nodiscard]] int max_tj() const;

    /// In-band coefficients on the complex basis of `s` (higher j dropped).
    [[nodiscard]] Eigen::VectorXcd to_complex(const WignerSpace& s) const;
    /// In-band real coordinates of the real part.
    [[nodiscard]] Eigen::VectorXd to_real(const WignerSpace& s) const;
    /// L2 norm (Peter-Weyl Gram).
    [[nodiscard]] double norm() const;
    /// L2 norm of the part with 2j > two_j_max.
    [[nodiscard]] double tail_norm(int two_j_max) const;
    [[nodiscard]] WignerPoly truncated(int two_j_max) const;

    [[nodiscard]] Complex evaluate(const Su2& g) const;
    /// e_a f.
    [[nodiscard]] WignerPoly derivative(int a) const;
    /// sum_a v_a e_a f for a complex frame vector v.
    [[nodiscard]] WignerPoly derivative(const Eigen::Vector3cd& v) const;
    [[nodiscard]] WignerPoly conj() const;
    [[nodiscard]] WignerPoly real_part() const;
    [[nodiscard]] WignerPoly imag_part() const;

    WignerPoly& operator+=(const WignerPoly& o);
    WignerPoly& operator-=(const WignerPoly& o);
    WignerPoly& operator*=(Complex s);
    [[nodiscard]] WignerPoly operator+(const WignerPoly& o) const;
    [[nodiscard]] WignerPoly operator-(const WignerPoly& o) const;
    [[nodiscard]] WignerPoly operator-() const;
    [[nodiscard]] WignerPoly operator*(Complex s) const;
    /// Pointwise product by Clebsch-Gordan expansion.
    [[nodiscard]] WignerPoly operator*(const WignerPoly& o) const;

private:
    std::map<WignerLabel, Complex> terms_;
};

inline WignerPoly operator*(Complex s, const WignerPoly& p) { return p * s; }

} // namespace moduli::su2
