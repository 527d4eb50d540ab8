#pragma once

#include "moduli/numerics/basis.hpp"

#include <map>
#include <vector>

namespace moduli::torus {

using numerics::Complex;
using numerics::Index;

using Mode = std::vector<int>;

/// All k in Z^d with |k|_inf <= cutoff, lexicographic.
std::vector<Mode> lattice_modes(int d, int cutoff);

/// Modes of the half lattice: k = 0 first, then every k whose first nonzero entry is positive.
std::vector<Mode> half_lattice_modes(int d, int cutoff);

int sup_norm(const Mode& k);
Mode negate(const Mode& k);
Mode add(const Mode& a, const Mode& b);

/// Multipliers of d/dzbar and d/dz on exp(i (fx x + fy y)), z = x + i y.
Complex dbar_multiplier(double fx, double fy);
Complex d_multiplier(double fx, double fy);

/// Symbols on the period-1 mode exp(2 pi i k.x) of C^n / Z^2n, coordinates
/// ordered (x_1, y_1, ..., x_n, y_n).
Complex dbar_symbol(const Mode& k, int j);
Complex d_symbol(const Mode& k, int j);

/// Trigonometric polynomial sum_k c_k exp(2 pi i k.x) with sparse support.
class TrigPoly {
public:
    TrigPoly() = default;
    explicit TrigPoly(int dim) : dim_(dim) {}
    static TrigPoly constant(int dim, Complex c);

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] const std::map<Mode, Complex>& terms() const { return terms_; }
    [[nodiscard]] Complex coeff(const Mode& k) const;
    void add_term(const Mode& k, Complex c);
    [[nodiscard]] int max_mode() const;

    TrigPoly& operator+=(const TrigPoly& o);
    TrigPoly& operator*=(Complex s);
    [[nodiscard]] TrigPoly operator+(const TrigPoly& o) const;
    [[nodiscard]] TrigPoly operator-(const TrigPoly& o) const;
    [[nodiscard]] TrigPoly operator*(const TrigPoly& o) const;
    [[nodiscard]] TrigPoly operator*(Complex s) const;
    /// Pointwise complex conjugate.
    [[nodiscard]] TrigPoly conj() const;
    /// d/dzbar_j (dbar = true) or d/dz_j.
    [[nodiscard]] TrigPoly complex_derivative(int j, bool dbar) const;
    [[nodiscard]] Complex evaluate(const Eigen::VectorXd& x) const;
    [[nodiscard]] double norm() const;

private:
    int dim_ = 0;
    std::map<Mode, Complex> terms_;
};

/// Real vector field on C^n written in the complex frame:
/// V = sum_a hol[a] d/dz_a + anti[a] d/dzbar_a.
struct ComplexVectorField {
    std::vector<TrigPoly> hol;
    std::vector<TrigPoly> anti;

    static ComplexVectorField zero(int n);
    /// The field with a single antiholomorphic unit component d/dzbar_j.
    static ComplexVectorField dbar_unit(int n, int j);
    [[nodiscard]] int n() const { return static_cast<int>(hol.size()); }
    /// V(f)
    [[nodiscard]] TrigPoly apply(const TrigPoly& f) const;
    [[nodiscard]] ComplexVectorField operator+(const ComplexVectorField& o) const;
    [[nodiscard]] ComplexVectorField operator*(Complex s) const;
};

/// Lie bracket [V, W].
ComplexVectorField bracket(const ComplexVectorField& v, const ComplexVectorField& w);

/// Real field X = v^a d/dz_a + conj(v^a) d/dzbar_a.
ComplexVectorField realify(const std::vector<TrigPoly>& v);

} // namespace moduli::torus
