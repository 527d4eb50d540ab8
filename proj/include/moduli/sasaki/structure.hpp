#pragma once

#include "moduli/su2/geometry.hpp"

#include <array>
#include <string>

namespace moduli::sasaki {

using su2::InvariantFrame;
using su2::OneForm;
using su2::PointFrame;
using su2::SasakiData;
using su2::Su2;

using ComplexFrameSpan = Eigen::Matrix<numerics::Complex, 3, Eigen::Dynamic>;

inline constexpr int kDefaultSamples = 64;

/// Pointwise Reeb field of eta on the sample points.
struct ReebField {
    std::vector<Su2> points;
    std::vector<Eigen::Vector3d> xi;
    /// max |i_xi eta - 1| and max |i_xi d eta| over the points.
    double eta_residual = 0.0;
    double deta_residual = 0.0;
};

/// Points where data are evaluated: the identity for left-invariant eta, the
/// deterministic sample otherwise.
std::vector<Su2> evaluation_points(const OneForm& eta, int samples = kDefaultSamples);

/// Solves i_xi eta = 1, i_xi d eta = 0 at each point. Throws NotContactError when
/// eta ^ d eta vanishes (relative to |eta| |d eta|) somewhere.
ReebField reeb_solve(const InvariantFrame& frame, const OneForm& eta, int samples = kDefaultSamples);
Eigen::Vector3d reeb_at(const Eigen::Vector3d& eta, const Eigen::Matrix3d& deta);

/// Residuals of the five characterization conditions of a Sasakian pair (E, eta):
///   (1) E + conj(E) = T_C S             3 - rank(E + conj E)
///   (2) E cap conj(E) = C xi            |dim(E cap conj E) - 1| + max dist(xi, E)
///   (3) [E, E] in E                     max |[u, v] mod E| over basis pairs
///   (4) d eta|_E = 0                    max |d eta(u, v)| over orthonormal pairs of E
///   (5) positivity on E cap D_C         min of d eta(V, i conj V) + d eta(conj V, -i V)
/// For (5), V is the E-component of a real unit vector u of D = Ker eta in the
/// splitting D_C = L + conj(L), L = E cap D_C; the sample is 16 directions per point.
struct EcharReport {
    std::array<double, 5> residual{};
    std::array<bool, 5> pass{};
    /// E cap D_C = 0, so (5) holds vacuously (residual[4] is +inf).
    bool positivity_vacuous = false;
    bool contact = true;
    int points = 0;

    [[nodiscard]] bool passed() const { return pass[0] && pass[1] && pass[2] && pass[3] && pass[4]; }
    /// Indices (1-based) of the failing conditions.
    [[nodiscard]] std::vector<int> failing() const;
};

inline constexpr double kEcharTol = 1e-9;

EcharReport echar_verify(const InvariantFrame& frame, const ComplexFrameSpan& E, const OneForm& eta,
                         int samples = kDefaultSamples);

/// xi, D^{0,1} = E cap D_C, Phi (-i on D^{0,1}, +i on D^{1,0}, Phi xi = 0) and the
/// metric g(V, W) = 1/4 (d eta(V, Phi W) + d eta(W, Phi V)) + eta(V) eta(W).
/// Requires (1), a non-real line E cap D_C and (5); throws DomainError,
/// NotContactError or NotPositiveContactError otherwise.
SasakiData build_structure(const InvariantFrame& frame, const ComplexFrameSpan& E, const OneForm& eta,
                           int samples = kDefaultSamples);

/// 1/2 d eta(V, Phi W) + eta(V) eta(W) at a point (not symmetric off the integrable locus).
Eigen::Matrix3d unsymmetrized_metric(const PointFrame& p);

} // namespace moduli::sasaki
