#pragma once

#include "moduli/numerics/linalg.hpp"
#include "moduli/slice/slice.hpp"
#include "moduli/torus/fourier.hpp"

namespace moduli::torus {

using numerics::BasisPtr;
using numerics::BlockOperator;

/// Truncated spectral spaces on the complex torus C^n / Z^2n (period 1, volume 1).
/// Coefficient layout is mode-major:
///   fields  v^i(k):          index m*n + i
///   forms   omega^i_j(k):    index (m*n + i)*n + j       (omega = omega^i_j dzbar_j (x) d/dz_i)
///   forms2  R^i_{jl}(k):     index (m*n + i)*p + pair(j<l), p = n(n-1)/2
struct ComplexTorus {
    int n = 1;
    int cutoff = 0;
    std::vector<Mode> modes;
    std::map<Mode, Index> mode_index;
    BasisPtr fields;
    BasisPtr forms;
    BasisPtr forms2; // null when n = 1

    [[nodiscard]] Index mode_count() const { return static_cast<Index>(modes.size()); }
    [[nodiscard]] Index field_index(Index m, int i) const { return m * n + i; }
    [[nodiscard]] Index form_index(Index m, int i, int j) const { return (m * n + i) * n + j; }
    [[nodiscard]] int pair_count() const { return n * (n - 1) / 2; }
    [[nodiscard]] int pair_index(int j, int l) const;
};

ComplexTorus complex_torus(int n, int cutoff);

/// dbar from (1,0) vector fields to (0,1)-forms with (1,0)-vector values, one block per mode.
BlockOperator<Complex> dbar_on_fields(const ComplexTorus& t);
/// Closed-form adjoint (dbar* omega)^i = sum_j conj(s_j) omega^i_j.
BlockOperator<Complex> dbar_star(const ComplexTorus& t);
/// dbar on forms: (dbar omega)^i_{jl} = s_j omega^i_l - s_l omega^i_j. Requires n >= 2.
BlockOperator<Complex> dbar_on_forms(const ComplexTorus& t);

struct McResidual {
    /// Residual coefficients on the truncated forms2 basis (empty when n = 1).
    Eigen::VectorXcd in_band;
    double in_band_norm = 0.0;
    /// Norm of the convolution products beyond the cutoff (kept in the doubled basis).
    double tail_norm = 0.0;
    [[nodiscard]] double total_norm() const { return std::hypot(in_band_norm, tail_norm); }
};

/// dbar omega + 1/2 [omega, omega], with
/// 1/2 [omega, omega]^i_{jl} = sum_a (omega^a_j d_a omega^i_l - omega^a_l d_a omega^i_j).
McResidual mc_residual(const ComplexTorus& t, const Eigen::VectorXcd& omega);

/// Slice of complex structures: P = dbar on fields, K_tangent = Ker dbar* cap Ker dbar.
slice::SliceModel<Complex> kuranishi_torus(int n, int cutoff, double rel_tol = numerics::kDefaultRelTol);

/// Structure omega_2(t) reached from the flat structure by the flow of
/// X = v^a d/dz_a + conj, to second order in t (Lie series of the pushed frame).
/// Returned in the coefficient layout of `t`; throws DomainError when the modes do not fit.
Eigen::VectorXcd pullback_structure(const ComplexTorus& t, const std::vector<TrigPoly>& v, double time);

/// Trigonometric polynomials of omega in the layout of `t` (omega[i][j] = omega^i_j).
std::vector<std::vector<TrigPoly>> form_polys(const ComplexTorus& t, const Eigen::VectorXcd& omega);

/// Realified complex-structure chart on the 1-dimensional torus: coordinates
/// (Re, Im) of the Beltrami coefficients mu(k), group chart (Re, Im) of xi(k) with
/// diffeomorphism F(z) = z - xi(z); the pulled-back structure is evaluated on a
/// 4(cutoff+1) grid and projected back to the cutoff.
slice::ActionSystem torus_beltrami_action(int cutoff, double chart_radius = 0.05);

} // namespace moduli::torus
