#pragma once

#include "moduli/numerics/linalg.hpp"
#include "moduli/torus/fourier.hpp"

namespace moduli::torus {

using numerics::BasisPtr;
using numerics::BlockOperator;

/// Real cosine/sine truncation on the flat torus R^n / Z^n (period 1, volume 1).
/// Per half-lattice mode k the coefficients are [const] for k = 0 and [cos, sin]
/// otherwise, each followed by the tensor components. Gram: 1 for constants,
/// 1/2 for cos/sin; symmetric-tensor off-diagonal components carry an extra 2
/// (h:h counts h_ab and h_ba).
struct RealTorus {
    int n = 1;
    int cutoff = 0;
    std::vector<Mode> modes; // half lattice
    std::vector<Index> field_offset;
    std::vector<Index> sym_offset;
    BasisPtr fields;
    BasisPtr sym;

    [[nodiscard]] int sym_count() const { return n * (n + 1) / 2; }
    /// Position of (a, b), a <= b, in the symmetric component list.
    [[nodiscard]] int sym_index(int a, int b) const;
    [[nodiscard]] static int parts(const Mode& k);
};

RealTorus real_torus(int n, int cutoff);

/// chi -> L_chi g0 = d_a chi_b + d_b chi_a, one block per half-lattice mode.
BlockOperator<double> metric_slice_operator(const RealTorus& t);

/// dim Ker P* at the cutoff.
Index metric_slice_dim(int n, int cutoff, double rel_tol = numerics::kDefaultRelTol);

/// (2c+1)^n n(n-1)/2 + n: the count of modes annihilated by P* on the flat torus.
Index metric_slice_dim_formula(int n, int cutoff);

} // namespace moduli::torus
