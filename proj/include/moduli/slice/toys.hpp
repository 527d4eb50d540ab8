#pragma once

#include "moduli/slice/slice.hpp"

namespace moduli::slice {

/// SO(2) rotating R^2 around J0 = (1, 0). With `cut_radial` the integrability map
/// is the radial coordinate, which removes the slice direction.
ActionSystem so2_plane(bool cut_radial = false);

/// SO(3) acting on symmetric 3x3 matrices by S -> g^T S g at J0 = diag(d).
/// Structure coordinates are the entries S_ij, i <= j, with Frobenius Gram.
ActionSystem so3_symmetric(const Eigen::Vector3d& d = Eigen::Vector3d(1.0, 2.0, 3.0));

/// Skew matrix of xi with hat(xi) v = xi x v.
Eigen::Matrix3d hat(const Eigen::Vector3d& xi);
/// Sym(3) chart coordinates <-> matrices.
Eigen::Matrix3d sym_from_coords(const Eigen::VectorXd& s);
Eigen::VectorXd sym_to_coords(const Eigen::Matrix3d& m);

/// R^n acting on itself by translation.
ActionSystem translation(Index dim);

/// Group acting trivially: act(xi, J) = J, P = 0.
ActionSystem trivial_action(Index structure_dim, Index group_dim);

} // namespace moduli::slice
