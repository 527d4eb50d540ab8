#pragma once

#include "moduli/numerics/linalg.hpp"
#include "moduli/numerics/random.hpp"

#include <functional>
#include <string>
#include <vector>

namespace moduli::slice {

using numerics::BasisPtr;
using numerics::BlockOperator;
using numerics::Index;
using numerics::Subspace;

using Evaluator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// (xi, J) -> J . phi(xi), both in centered chart coordinates.
using ActionEvaluator = std::function<Eigen::VectorXd(const Eigen::VectorXd& xi, const Eigen::VectorXd& j)>;

/// Finite-dimensional action of a group chart on a structure chart centered at J0.
struct ActionSystem {
    std::string name;
    BasisPtr structure_space;
    BasisPtr group_chart;
    ActionEvaluator act;
    /// Derivative of act in xi at (0, 0).
    BlockOperator<double> P;
    /// Q-hat; empty when every structure in the chart is integrable.
    Evaluator integrability;
    /// Radius (Gram norm) of the chart in both xi and J.
    double chart_radius = 1.0;
};

struct SliceOptions {
    double rel_tol = numerics::kDefaultRelTol;
    double newton_tol = 1e-10;
    int max_iter = 50;
    /// Central-difference step for the linearization of Q-hat.
    double q_step = 1e-5;
    /// Central-difference step for the Newton Jacobian of the chart map.
    double jacobian_step = 1e-6;
};

template <class T>
struct SliceModel {
    Subspace<T> kernel_P; // E
    Subspace<T> E_perp;
    Subspace<T> F;
    Subspace<T> F_perp;
    Subspace<T> K_tangent;
    double rel_tol = numerics::kDefaultRelTol;
};

/// Slice data of a linear deformation problem: P from the group chart to the
/// structure tangent, optional linearized integrability q_lin on the structure tangent.
template <class T>
SliceModel<T> build_linear_slice(const BlockOperator<T>& p, const BlockOperator<T>* q_lin, double rel_tol);

/// Central-difference Jacobian of Q-hat at the origin (0 rows when absent).
Eigen::MatrixXd integrability_linearization(const ActionSystem& sys, double step);

SliceModel<double> build_slice(const ActionSystem& sys, const SliceOptions& opts = {});

/// max over coordinate directions of |d act(0,0)[xi, w] - (w + P xi)| relative to the
/// direction size; finite differences with the given step.
double action_derivative_defect(const ActionSystem& sys, double step = 1e-6);

/// act(xi, kappa) for xi in span(E_perp), kappa in span(F_perp) inside the chart.
Eigen::VectorXd slice_chart(const ActionSystem& sys, const SliceModel<double>& model, const Eigen::VectorXd& xi,
                            const Eigen::VectorXd& kappa);

struct SliceCoordinates {
    Eigen::VectorXd xi;
    Eigen::VectorXd kappa; // Xi(J)
    double residual = 0.0;
    int iterations = 0;
};

/// Inverse of slice_chart by Newton iteration. Throws OutsideChartError.
SliceCoordinates slice_invert(const ActionSystem& sys, const SliceModel<double>& model, const Eigen::VectorXd& j,
                              const SliceOptions& opts = {});

/// Uniform sample from the Gram-norm ball of `basis`.
Eigen::VectorXd sample_ball(const numerics::LabeledBasis& basis, numerics::Rng& rng, double radius);

/// Uniform sample from the ball of span(sub) (Gram norm) embedded in the ambient space.
Eigen::VectorXd sample_subspace_ball(const Subspace<double>& sub, numerics::Rng& rng, double radius);

/// max over samples of ||Xi(Xi(J)) - Xi(J)|| for J in the radius-ball around J0.
double retraction_idempotence(const ActionSystem& sys, const SliceModel<double>& model, int samples, double radius,
                              std::uint64_t seed, const SliceOptions& opts = {});

/// max over samples of ||slice_invert(slice_chart(xi, kappa)) - (xi, kappa)||.
double round_trip_defect(const ActionSystem& sys, const SliceModel<double>& model, int samples, double radius,
                         std::uint64_t seed, const SliceOptions& opts = {});

/// max over samples of ||Xi(act(g, J)) - Xi(J)|| with J and g small.
double fiber_defect(const ActionSystem& sys, const SliceModel<double>& model, int samples, double radius,
                    std::uint64_t seed, const SliceOptions& opts = {});

struct Mc2Report {
    int samples = 0;
    /// Orbit points J0.g found on the slice within tol.
    int on_slice = 0;
    int violations = 0;
    std::vector<Eigen::VectorXd> counterexamples;
    /// max ||Xi(J0.g)|| over orbit points inside the chart (0 when the orbit retracts to J0).
    double max_retraction = 0.0;
    int outside_chart = 0;
    double tol = 0.0;
};

/// Samples g = phi(xi), ||xi|| <= radius, and checks J0.g in K implies J0.g = J0.
Mc2Report mc2_probe(const ActionSystem& sys, const SliceModel<double>& model, int samples, double radius,
                    std::uint64_t seed, double tol = 1e-8, const SliceOptions& opts = {});

template <class T>
bool rigidity_check(const SliceModel<T>& model) {
    return model.K_tangent.dim() == 0;
}

} // namespace moduli::slice
