#pragma once

#include "moduli/numerics/linalg.hpp"
#include "moduli/su2/wigner.hpp"

#include <array>

namespace moduli::su2 {

using numerics::BlockOperator;

/// Left-invariant frame of su(2): [e_a, e_b] = c_ab^k e_k, axes numbered 0, 1, 2.
struct InvariantFrame {
    /// c[k](a, b) = c_ab^k
    std::array<Eigen::Matrix3d, 3> c{};

    /// c_ab^k = 2 eps_abk, realized by e_a = X_a = -i sigma_a.
    static InvariantFrame su2();

    /// Bracket of constant-coefficient (complex) frame fields.
    [[nodiscard]] Eigen::Vector3cd bracket(const Eigen::Vector3cd& u, const Eigen::Vector3cd& v) const;
    [[nodiscard]] double antisymmetry_defect() const;
    [[nodiscard]] double jacobi_defect() const;
    /// d beta(e_a, e_b) = -c_ab^k beta_k for a constant 1-form beta.
    [[nodiscard]] Eigen::Matrix3d differential(const Eigen::Vector3d& beta) const;
};

/// Diagonal left-invariant metric in the frame.
struct LeftInvariantMetric {
    double l1 = 1.0;
    double l2 = 1.0;
    double l3 = 1.0;

    static LeftInvariantMetric round() { return {1.0, 1.0, 1.0}; }
    [[nodiscard]] Eigen::Matrix3d matrix() const;
    [[nodiscard]] bool positive() const { return l1 > 0.0 && l2 > 0.0 && l3 > 0.0; }
};

inline constexpr int kDimS = 3;
/// Einstein constant dim S - 1 of a 3-dimensional Sasaki-Einstein metric.
inline constexpr double kEinsteinConstant = kDimS - 1;

/// Ricci tensor in frame components of the left-invariant metric g (SPD in the frame).
Eigen::Matrix3d ricci(const InvariantFrame& frame, const Eigen::Matrix3d& g);
/// max |Ric_g - 2 g| over frame pairs.
double einstein_residual(const InvariantFrame& frame, const Eigen::Matrix3d& g);
double einstein_residual(const LeftInvariantMetric& g);

/// e_a on the complex Peter-Weyl basis (dense, j-block diagonal).
numerics::ComplexOperator frame_derivative(const WignerSpace& s, int a);
/// e_a on the real basis.
numerics::RealOperator frame_derivative_real(const WignerSpace& s, int a);
/// e_a on the real basis as a j-block operator.
BlockOperator<double> frame_derivative_blocks(const WignerSpace& s, int a);

/// Orthonormal basis of the xi-invariant real functions, Ker e_3 in the truncation.
std::vector<numerics::Coefficients<double>> basic_subspace(const WignerSpace& s,
                                                           double rel_tol = numerics::kDefaultRelTol);

/// Real 1-form with Wigner-expanded frame components beta = beta_a e^a.
struct OneForm {
    std::array<WignerPoly, 3> comp;

    /// The coframe element e^a.
    static OneForm coframe(int a);
    [[nodiscard]] OneForm times(const WignerPoly& f) const;
    [[nodiscard]] OneForm operator+(const OneForm& o) const;
    [[nodiscard]] OneForm operator*(double s) const;
    [[nodiscard]] Eigen::Vector3d value(const Su2& g) const;
    /// d beta(e_a, e_b) as Wigner expansions.
    [[nodiscard]] std::array<std::array<WignerPoly, 3>, 3> differential(const InvariantFrame& frame) const;
    [[nodiscard]] Eigen::Matrix3d differential_at(const InvariantFrame& frame, const Su2& g) const;
    /// True when every component is a constant.
    [[nodiscard]] bool left_invariant() const;
};

/// Frame data of a (possibly deformed) structure at one point.
struct PointFrame {
    Su2 x = Su2::Identity();
    Eigen::Vector3d eta = Eigen::Vector3d::Zero();
    Eigen::Matrix3d deta = Eigen::Matrix3d::Zero();
    Eigen::Vector3d xi = Eigen::Vector3d::Zero();
    Eigen::Matrix3d phi = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d metric = Eigen::Matrix3d::Zero();
    /// Spanning vector of D^{0,1} = E cap D_C.
    Eigen::Vector3cd d01 = Eigen::Vector3cd::Zero();
};

/// (E, eta) with the derived xi, Phi, g. E is constant in the invariant frame;
/// point data are recorded at the identity for left-invariant eta and at
/// the fixed sample points otherwise.
struct SasakiData {
    InvariantFrame frame;
    Eigen::Matrix<Complex, 3, Eigen::Dynamic> E;
    OneForm eta;
    bool left_invariant = true;
    std::vector<PointFrame> points;

    [[nodiscard]] const PointFrame& base() const { return points.front(); }
};

/// eta = e^3, xi = e_3, D = span(e_1, e_2), Phi e_1 = sigma e_2, Phi e_2 = -sigma e_1 with
/// the sign making d eta(V, Phi V) > 0 on D, g(V, W) = 1/2 d eta(V, Phi W) + eta(V) eta(W),
/// E = span(e_1 + i sigma e_2, e_3).
SasakiData standard_sasaki(const InvariantFrame& frame = InvariantFrame::su2());

/// The sign sigma chosen by standard_sasaki.
int standard_sigma(const InvariantFrame& frame = InvariantFrame::su2());

} // namespace moduli::su2
