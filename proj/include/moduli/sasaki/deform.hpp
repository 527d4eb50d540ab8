#pragma once

#include "moduli/sasaki/structure.hpp"
#include "moduli/slice/slice.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace moduli::sasaki {

using numerics::BlockOperator;
using numerics::Complex;
using numerics::Index;
using su2::WignerPoly;
using su2::WignerSpace;

/// Real coordinates of tuples of real functions on the Wigner truncation.
/// Layout: j block, then component, then the real basis of the block.
/// Gram: component weight times the Peter-Weyl Gram.
class SectionSpace {
public:
    SectionSpace(std::shared_ptr<const WignerSpace> w, std::string id, std::vector<std::string> components,
                 std::vector<double> weights);

    [[nodiscard]] const WignerSpace& wigner() const { return *w_; }
    [[nodiscard]] const std::shared_ptr<const WignerSpace>& wigner_ptr() const { return w_; }
    [[nodiscard]] const numerics::BasisPtr& basis() const { return basis_; }
    [[nodiscard]] Index dim() const { return basis_->dim(); }
    [[nodiscard]] int components() const { return static_cast<int>(names_.size()); }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] const Eigen::VectorXd& weights() const { return weights_; }
    [[nodiscard]] int two_j_max() const { return w_->two_j_max(); }

    [[nodiscard]] Index block_offset(int tj) const;
    [[nodiscard]] Index block_size(int tj) const;
    [[nodiscard]] std::vector<Index> block_indices(int tj) const;
    [[nodiscard]] Index index(int tj, int comp, Index local) const;

    /// WignerSpace real coordinates of one component.
    [[nodiscard]] Eigen::VectorXd component(const Eigen::VectorXd& v, int comp) const;
    void set_component(Eigen::VectorXd& v, int comp, const Eigen::VectorXd& coords) const;
    [[nodiscard]] WignerPoly poly(const Eigen::VectorXd& v, int comp) const;
    /// Coordinates of the real part of p in-band.
    void set_poly(Eigen::VectorXd& v, int comp, const WignerPoly& p) const;
    /// Gram-diagonal entries of block tj.
    [[nodiscard]] Eigen::VectorXd block_weights(int tj) const;

private:
    std::shared_ptr<const WignerSpace> w_;
    std::vector<std::string> names_;
    Eigen::VectorXd weights_;
    numerics::BasisPtr basis_;
};

/// Linear combination sum factor * (real component).
using ComponentExpr = std::vector<std::pair<int, Complex>>;

/// Output slot: real and imaginary component indices (im < 0 for a real output,
/// which keeps the real part).
struct Slot {
    int re = 0;
    int im = -1;
};

/// First-order operator with constant coefficients in the invariant frame:
/// sum_a A_a e_a + B acting on tuples of real functions.
struct FrameOperator {
    int out = 0;
    int in = 0;
    std::array<Eigen::MatrixXd, 3> A;
    Eigen::MatrixXd B;

    FrameOperator() = default;
    FrameOperator(int out_components, int in_components);

    /// out += coef * (dir . e) expr
    void add_derivative(Slot out, const ComponentExpr& expr, const Eigen::Vector3cd& dir, Complex coef = 1.0);
    /// out += coef * expr
    void add_zero_order(Slot out, const ComponentExpr& expr, Complex coef);

    /// Adjoint for diagonal component weights (the frame fields are skew-adjoint).
    [[nodiscard]] FrameOperator formal_adjoint(const Eigen::VectorXd& w_in, const Eigen::VectorXd& w_out) const;
    /// sum_a v_a A_a (real principal symbol up to the factor i).
    [[nodiscard]] Eigen::MatrixXd symbol(const Eigen::Vector3d& v) const;
    [[nodiscard]] FrameOperator operator+(const FrameOperator& o) const;
    /// Embeds this operator at the given component offsets of a larger one.
    [[nodiscard]] FrameOperator placed(int out_total, int out_offset, int in_total, int in_offset) const;

    [[nodiscard]] Eigen::MatrixXd block(const WignerSpace& w, int tj) const;
    [[nodiscard]] BlockOperator<double> assemble(const SectionSpace& dom, const SectionSpace& cod) const;
};

/// Adapted complex frame (f_1, f_2, f_3) = (D^{0,1} generator, xi, D^{1,0} generator)
/// of the standard structure with its structure constants.
struct AdaptedFrame {
    std::array<Eigen::Vector3cd, 3> f;
    /// adapted coordinates of a frame vector: v = sum_k (to_adapted v)_k f_k
    Eigen::Matrix3cd to_adapted;
    /// gamma[i][j] = adapted coordinates of [f_i, f_j]
    std::array<std::array<Eigen::Vector3cd, 3>, 3> gamma;
};

/// Standard structure, truncation and coordinate spaces of the deformation problem.
/// Components:
///   fun       h
///   cfun      Re, Im of a complex function
///   vf        chi_1, chi_2, chi_3 (chi = chi_a e_a; h = chi_3 is the xi-part)
///   form      alpha_1, alpha_2, alpha_3 (alpha = alpha_a e^a)
///   omega     Re, Im of omega_1 = omega(f_1) and omega_3 = omega(xi) in units of f_3
///   structure omega then form
///   equations Re, Im of the linearized Maurer-Cartan and Q residuals
struct DeformationSetup {
    std::shared_ptr<const WignerSpace> w;
    SasakiData base;
    AdaptedFrame adapted;
    Eigen::Vector3d eta;
    Eigen::Matrix3d deta;
    Eigen::Matrix3d metric;
    Eigen::Matrix3d metric_inv;
    std::shared_ptr<const SectionSpace> fun;
    std::shared_ptr<const SectionSpace> cfun;
    std::shared_ptr<const SectionSpace> vf;
    std::shared_ptr<const SectionSpace> form;
    std::shared_ptr<const SectionSpace> omega;
    std::shared_ptr<const SectionSpace> structure;
    std::shared_ptr<const SectionSpace> equations;

    [[nodiscard]] int two_j_max() const { return w->two_j_max(); }
};

/// Throws ConfigurationError unless the standard structure has eta = e^3 and a
/// diagonal metric (the layout above assumes both).
DeformationSetup make_setup(int two_j_max, const InvariantFrame& frame = InvariantFrame::su2());

// Frame operators of the standard structure.
FrameOperator exterior_d(const DeformationSetup& s);            // fun -> form
FrameOperator interior_deta(const DeformationSetup& s);         // vf -> form, chi -> i_chi d eta
FrameOperator lie_eta(const DeformationSetup& s);               // vf -> form, chi -> L_chi eta
FrameOperator dbar_t(const DeformationSetup& s);                // vf -> omega
FrameOperator general_P_operator(const DeformationSetup& s);    // vf -> structure
FrameOperator mc_linear(const DeformationSetup& s);             // omega -> cfun
FrameOperator q_linear(const DeformationSetup& s);              // structure -> cfun
FrameOperator d_alpha_on_E(const DeformationSetup& s);          // form -> cfun, alpha -> d alpha(f_1, f_2)
FrameOperator reeb_contraction(const DeformationSetup& s);      // form -> fun, alpha -> i_xi alpha
FrameOperator lie_xi_form(const DeformationSetup& s);           // form -> form, alpha -> L_xi alpha
FrameOperator integrability_linear(const DeformationSetup& s);  // structure -> equations
/// d* alpha = -div(alpha^sharp) (the frame is unimodular).
FrameOperator codifferential(const DeformationSetup& s);        // form -> fun
/// -(i_{alpha^sharp} d eta)^sharp
FrameOperator sharp_deta(const DeformationSetup& s);            // form -> vf
/// (-(i_{alpha^sharp} d eta)^sharp + d*alpha xi): the contact P* before projection.
FrameOperator contact_P_star_operator(const DeformationSetup& s);  // form -> vf
/// (dbar + d_t)^* omega - (i_{alpha^sharp} d eta)^sharp + d*alpha xi.
FrameOperator general_P_star_operator(const DeformationSetup& s);  // structure -> vf

/// A subspace of vf given per j block by Gram-orthonormal columns; coordinates are
/// Euclidean.
struct ReducedDomain {
    std::string id;
    numerics::BasisPtr basis;
    std::vector<Eigen::MatrixXd> embed; // per 2j: vf block coords x reduced block dim
    std::vector<Index> offsets;

    [[nodiscard]] Index dim() const { return basis->dim(); }
    [[nodiscard]] Eigen::VectorXd lift(const SectionSpace& vf, const Eigen::VectorXd& r) const;
    /// Gram-orthogonal projection coordinates of a vf vector.
    [[nodiscard]] Eigen::VectorXd project(const SectionSpace& vf, const Eigen::VectorXd& v) const;
};

/// Decomposition of the transverse fields of each j block:
///   xn        Ker of the transverse (dbar + d_t): holomorphic transverse fields
///   s         chi in xn with i_chi d eta exact
///   xn_prime  complement of s in xn
///   gamma0    complement of s in all transverse fields
struct TransverseSpaces {
    std::vector<Eigen::MatrixXd> xn, s, xn_prime, gamma0, transverse;
    Index dim_xn = 0;
    Index dim_s = 0;
    Index dim_xn_prime = 0;
};

TransverseSpaces transverse_spaces(const DeformationSetup& s, double rel_tol = numerics::kDefaultRelTol);

/// Domain (h, chi_N): all h, chi_N in the given per-block transverse subspace.
/// With basic_h only xi-invariant h are kept.
ReducedDomain reduced_domain(const DeformationSetup& s, const std::vector<Eigen::MatrixXd>& transverse,
                             bool basic_h, const std::string& id, double rel_tol = numerics::kDefaultRelTol);

/// op restricted to the reduced domain (blocks per j, codomain cod).
BlockOperator<double> restrict_operator(const DeformationSetup& s, const FrameOperator& op, const SectionSpace& cod,
                                        const ReducedDomain& dom);

/// Contact deformation problem: P(h, chi_N) = dh + i_{chi_N} d eta with chi_N in xn_prime.
struct ContactProblem {
    TransverseSpaces spaces;
    ReducedDomain domain;
    BlockOperator<double> P;     // domain -> form
    BlockOperator<double> P_star; // form -> domain (projected formula)
};

ContactProblem contact_problem(const DeformationSetup& s, bool basic_h = false,
                               double rel_tol = numerics::kDefaultRelTol);

/// General deformation problem: P(chi) = ((dbar + d_t) chi^{1,0}, L_chi eta) with chi in h xi + gamma0.
struct GeneralProblem {
    TransverseSpaces spaces;
    ReducedDomain domain;
    BlockOperator<double> P;      // domain -> structure
    BlockOperator<double> P_star; // structure -> domain
};

GeneralProblem general_problem(const DeformationSetup& s, double rel_tol = numerics::kDefaultRelTol);

/// contact_P on a point of the reduced domain, and the literal P* formula projected to it.
Eigen::VectorXd contact_P(const DeformationSetup& s, const ContactProblem& c, const Eigen::VectorXd& u);
Eigen::VectorXd contact_P_star(const DeformationSetup& s, const ContactProblem& c, const Eigen::VectorXd& alpha);
Eigen::VectorXd general_P(const DeformationSetup& s, const Eigen::VectorXd& chi);
Eigen::VectorXd general_P_star(const DeformationSetup& s, const GeneralProblem& g, const Eigen::VectorXd& structure);

/// chi^{1,0} (coefficient of f_3), chi^{0,1} and the real xi-coefficient of a real field.
struct VectorFieldSplit {
    WignerPoly chi10;
    WignerPoly chi01;
    WignerPoly chi_xi;
};
VectorFieldSplit split_vector_field(const DeformationSetup& s, const Eigen::VectorXd& chi);

/// Dimension of the numerical kernel of a dense matrix (singular values <= rel_tol sigma_max).
Index dense_kernel_dim(const Eigen::MatrixXd& m, double rel_tol = numerics::kDefaultRelTol);

struct KetaResult {
    int two_j_max = 0;
    slice::SliceModel<double> model;
    Index dim = 0;
    /// Same dimension from one dense SVD of [P*; constraints] in whitened coordinates.
    Index dense_dim = -1;
};

/// {alpha : P* alpha = 0, d alpha|_E = 0}.
KetaResult keta_tangent(const DeformationSetup& s, bool dense_oracle = false,
                        double rel_tol = numerics::kDefaultRelTol);
/// {alpha : P'* alpha = 0, i_xi alpha = 0, d alpha|_E = 0} with P' restricted to basic h.
KetaResult keta_prime_tangent(const DeformationSetup& s, bool dense_oracle = false,
                              double rel_tol = numerics::kDefaultRelTol);
/// {(omega, alpha) : P* = 0, linearized Maurer-Cartan = 0, linearized Q = 0}.
KetaResult kuranishi_general(const DeformationSetup& s, bool dense_oracle = false,
                             double rel_tol = numerics::kDefaultRelTol);

/// Rank of the stacked bases minus the larger dimension, i.e. 0 iff span(a) in span(b).
Index containment_defect(const SectionSpace& space, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         double rel_tol = numerics::kDefaultRelTol);

struct XnReport {
    int two_j_max = 0;
    Index dim_xn = 0;
    Index dim_s = 0;
    Index dim_xn_prime = 0;
    /// dim xn = 0: the local-moduli hypothesis regime.
    bool local_moduli_regime = false;
};
XnReport xn_report(const DeformationSetup& s, double rel_tol = numerics::kDefaultRelTol);

/// Basic 1-forms with d alpha|_E = 0 (i_xi alpha = 0, L_xi alpha = 0) and how many lie in Ker P*.
struct BasicFormReport {
    int two_j_max = 0;
    Index dim_basic_11 = 0;
    Index dim_in_kernel = 0;
};
BasicFormReport basic_11_forms(const DeformationSetup& s, double rel_tol = numerics::kDefaultRelTol);

struct SymbolReport {
    int samples = 0;
    double min_sigma = 0.0;
    double max_sigma = 0.0;
    Eigen::Vector3d worst_covector = Eigen::Vector3d::Zero();
    /// max difference between the assembled principal part and (v^E chi^{1,0}, (i_chi eta) v).
    double formula_defect = 0.0;
};

/// Weighted pointwise symbol of general_P at random unit covectors (the coefficients
/// are constant in the invariant frame, so the base point does not enter).
SymbolReport symbol_check(const DeformationSetup& s, int samples, std::uint64_t seed);
/// (v^E chi^{1,0}, (i_chi eta) v) in the structure components (Re/Im omega_1, omega_3, alpha).
Eigen::Matrix<double, 7, 3> symbol_formula(const DeformationSetup& s, const Eigen::Vector3d& v);
/// Smallest weighted singular value of the symbol at v.
double symbol_sigma_min(const DeformationSetup& s, const Eigen::Vector3d& v);

} // namespace moduli::sasaki
