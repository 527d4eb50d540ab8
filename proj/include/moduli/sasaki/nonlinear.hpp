#pragma once

#include "moduli/sasaki/deform.hpp"

namespace moduli::sasaki {

/// ((Id - omega) E, eta + alpha): omega_k = omega(f_k) in units of f_3 for k = 1 (f_1)
/// and k = 3 (xi), alpha a real 1-form.
struct DeformationPair {
    WignerPoly omega1;
    WignerPoly omega3;
    OneForm alpha;

    static DeformationPair from_coords(const DeformationSetup& s, const Eigen::VectorXd& structure);
    [[nodiscard]] Eigen::VectorXd coords(const DeformationSetup& s) const;
    [[nodiscard]] bool left_invariant() const;
    [[nodiscard]] int max_tj() const;
};

/// Nonlinear residual with its in-band coordinates and the part beyond the truncation.
struct Residual {
    WignerPoly value;
    Eigen::VectorXd in_band; // cfun coordinates (Re, Im)
    double in_band_norm = 0.0;
    double tail_norm = 0.0;
    [[nodiscard]] double total_norm() const { return std::hypot(in_band_norm, tail_norm); }
};

Residual make_residual(const DeformationSetup& s, const WignerPoly& p);

/// Integrability of the distribution (Id - omega) E: the f_3-component of
/// -[f_1 - omega_1 f_3, xi - omega_3 f_3]; the linear part is mc_linear and the
/// quadratic part plays the role of 1/2 [omega, omega].
WignerPoly mc_polynomial(const DeformationSetup& s, const WignerPoly& omega1, const WignerPoly& omega3);
Residual mc_sasaki_residual(const DeformationSetup& s, const DeformationPair& p);

/// (d alpha(Id - omega, Id - omega) - d eta(omega, Id) - d eta(Id, omega)) on (f_1, xi).
WignerPoly q_polynomial(const DeformationSetup& s, const DeformationPair& p);
Residual integrability_Q(const DeformationSetup& s, const DeformationPair& p);

/// The deformed pair as constant data (left-invariant input only).
ComplexFrameSpan deformed_span(const DeformationSetup& s, const DeformationPair& p);
OneForm deformed_eta(const DeformationSetup& s, const DeformationPair& p);

struct SeCandidate {
    DeformationPair pair;
    double einstein_residual = 0.0;
    bool kept = false;
    std::string reason;
};

inline constexpr double kEinsteinTol = 1e-8;

/// Keeps the left-invariant pairs whose induced metric is Einstein with constant 2.
/// Throws RestrictedScopeError on non-constant input.
std::vector<DeformationPair> se_filter(const DeformationSetup& s, const std::vector<DeformationPair>& candidates,
                                       std::vector<SeCandidate>* details = nullptr);

/// Complex vector field in frame components.
using FieldPolys = std::array<WignerPoly, 3>;

FieldPolys field_from_vf(const DeformationSetup& s, const Eigen::VectorXd& chi);
/// [X, Y] for Wigner-expanded fields.
FieldPolys field_bracket(const InvariantFrame& frame, const FieldPolys& x, const FieldPolys& y);
/// L_X beta for a Wigner-expanded field and 1-form.
OneForm lie_derivative(const InvariantFrame& frame, const FieldPolys& x, const OneForm& beta);

/// Second-order Lie series of the pull-back of the standard structure by the time-t flow of chi:
/// omega(t) = t omega_1 + t^2 omega_2, alpha(t) = t alpha_1 + t^2 alpha_2.
struct PullbackSeries {
    DeformationPair first;
    DeformationPair second;
    [[nodiscard]] DeformationPair at(double t) const;
};
PullbackSeries pullback_series(const DeformationSetup& s, const Eigen::VectorXd& chi);

struct PullbackReport {
    std::vector<double> t;
    /// ||MC|| + ||Q|| of the pulled-back structure (products untruncated).
    std::vector<double> residual;
    /// The same with only the linear parts (no bracket terms).
    std::vector<double> linear_only;
    std::vector<double> slopes;
    std::vector<double> linear_slopes;
    double min_slope = 0.0;
    double min_linear_slope = 0.0;
};
PullbackReport pullback_oracle(const DeformationSetup& s, const Eigen::VectorXd& chi, const std::vector<double>& ts);

/// Time-t flow of a left-trivialized field from x (RK4 on unit quaternions).
Su2 flow(const FieldPolys& chi, const Su2& x, double t, int steps);
/// Frame matrix of d(flow_t) at x (column a = image of e_a, in the frame at flow_t(x)).
Eigen::Matrix3d flow_differential(const FieldPolys& chi, const Su2& x, double t, int steps, double fd_step = 1e-3);

struct OrbitTangencyReport {
    std::vector<double> t;
    /// max over points of |coords(flow_t^* J) - t P(chi)(x)|.
    std::vector<double> error;
    std::vector<double> slopes;
    double min_slope = 0.0;
};

/// Pointwise deformation coordinates of the pulled-back structure compared with t general_P(chi).
OrbitTangencyReport orbit_tangency(const DeformationSetup& s, const Eigen::VectorXd& chi,
                                   const std::vector<double>& ts, int points = 12, int steps = 16);

/// Random real vector field supported in 2j <= two_j_max, unit Gram norm.
Eigen::VectorXd random_field(const DeformationSetup& s, numerics::Rng& rng, int two_j_max);

} // namespace moduli::sasaki
