#include "moduli/torus/fourier.hpp"

#include "moduli/error.hpp"

#include <cmath>
#include <numbers>

namespace moduli::torus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void enumerate(int d, int cutoff, Mode& cur, std::vector<Mode>& out) {
    if (static_cast<int>(cur.size()) == d) {
        out.push_back(cur);
        return;
    }
    for (int v = -cutoff; v <= cutoff; ++v) {
        cur.push_back(v);
        enumerate(d, cutoff, cur, out);
        cur.pop_back();
    }
}

} // namespace

std::vector<Mode> lattice_modes(int d, int cutoff) {
    if (d < 1 || cutoff < 0) throw DomainError("lattice_modes: bad dimension or cutoff");
    std::vector<Mode> out;
    Mode cur;
    enumerate(d, cutoff, cur, out);
    return out;
}

std::vector<Mode> half_lattice_modes(int d, int cutoff) {
    std::vector<Mode> out{Mode(static_cast<size_t>(d), 0)};
    for (const auto& k : lattice_modes(d, cutoff)) {
        for (int v : k) {
            if (v == 0) continue;
            if (v > 0) out.push_back(k);
            break;
        }
    }
    return out;
}

int sup_norm(const Mode& k) {
    int m = 0;
    for (int v : k) m = std::max(m, std::abs(v));
    return m;
}

Mode negate(const Mode& k) {
    Mode out = k;
    for (int& v : out) v = -v;
    return out;
}

Mode add(const Mode& a, const Mode& b) {
    Mode out = a;
    for (size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Complex dbar_multiplier(double fx, double fy) { return 0.5 * Complex(-fy, fx); }

Complex d_multiplier(double fx, double fy) { return 0.5 * Complex(fy, fx); }

Complex dbar_symbol(const Mode& k, int j) {
    return dbar_multiplier(kTwoPi * k[static_cast<size_t>(2 * j)], kTwoPi * k[static_cast<size_t>(2 * j + 1)]);
}

Complex d_symbol(const Mode& k, int j) {
    return d_multiplier(kTwoPi * k[static_cast<size_t>(2 * j)], kTwoPi * k[static_cast<size_t>(2 * j + 1)]);
}

TrigPoly TrigPoly::constant(int dim, Complex c) {
    TrigPoly p(dim);
    p.add_term(Mode(static_cast<size_t>(dim), 0), c);
    return p;
}

Complex TrigPoly::coeff(const Mode& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? Complex(0.0) : it->second;
}

void TrigPoly::add_term(const Mode& k, Complex c) {
    if (static_cast<int>(k.size()) != dim_) throw DimensionError("trigonometric mode length");
    if (c == Complex(0.0)) return;
    auto [it, fresh] = terms_.emplace(k, c);
    if (!fresh) {
        it->second += c;
        if (it->second == Complex(0.0)) terms_.erase(it);
    }
}

int TrigPoly::max_mode() const {
    int m = 0;
    for (const auto& [k, c] : terms_) m = std::max(m, sup_norm(k));
    return m;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& o) {
    if (dim_ == 0) dim_ = o.dim_;
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
}

TrigPoly& TrigPoly::operator*=(Complex s) {
    if (s == Complex(0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
}

TrigPoly TrigPoly::operator+(const TrigPoly& o) const {
    TrigPoly out = *this;
    out += o;
    return out;
}

TrigPoly TrigPoly::operator-(const TrigPoly& o) const { return *this + o * Complex(-1.0); }

TrigPoly TrigPoly::operator*(const TrigPoly& o) const {
    TrigPoly out(std::max(dim_, o.dim_));
    for (const auto& [a, ca] : terms_)
        for (const auto& [b, cb] : o.terms_) out.add_term(add(a, b), ca * cb);
    return out;
}

TrigPoly TrigPoly::operator*(Complex s) const {
    TrigPoly out = *this;
    out *= s;
    return out;
}

TrigPoly TrigPoly::conj() const {
    TrigPoly out(dim_);
    for (const auto& [k, c] : terms_) out.add_term(negate(k), std::conj(c));
    return out;
}

TrigPoly TrigPoly::complex_derivative(int j, bool dbar) const {
    TrigPoly out(dim_);
    for (const auto& [k, c] : terms_) out.add_term(k, c * (dbar ? dbar_symbol(k, j) : d_symbol(k, j)));
    return out;
}

Complex TrigPoly::evaluate(const Eigen::VectorXd& x) const {
    Complex s(0.0);
    for (const auto& [k, c] : terms_) {
        double phase = 0.0;
        for (size_t i = 0; i < k.size(); ++i) phase += k[i] * x(static_cast<Index>(i));
        s += c * std::polar(1.0, kTwoPi * phase);
    }
    return s;
}

double TrigPoly::norm() const {
    double s = 0.0;
    for (const auto& [k, c] : terms_) s += std::norm(c);
    return std::sqrt(s);
}

ComplexVectorField ComplexVectorField::zero(int n) {
    ComplexVectorField v;
    v.hol.assign(static_cast<size_t>(n), TrigPoly(2 * n));
    v.anti.assign(static_cast<size_t>(n), TrigPoly(2 * n));
    return v;
}

ComplexVectorField ComplexVectorField::dbar_unit(int n, int j) {
    ComplexVectorField v = zero(n);
    v.anti[static_cast<size_t>(j)] = TrigPoly::constant(2 * n, 1.0);
    return v;
}

TrigPoly ComplexVectorField::apply(const TrigPoly& f) const {
    TrigPoly out(f.dim());
    for (int a = 0; a < n(); ++a) {
        out += hol[static_cast<size_t>(a)] * f.complex_derivative(a, false);
        out += anti[static_cast<size_t>(a)] * f.complex_derivative(a, true);
    }
    return out;
}

ComplexVectorField ComplexVectorField::operator+(const ComplexVectorField& o) const {
    ComplexVectorField out = *this;
    for (size_t a = 0; a < hol.size(); ++a) {
        out.hol[a] += o.hol[a];
        out.anti[a] += o.anti[a];
    }
    return out;
}

ComplexVectorField ComplexVectorField::operator*(Complex s) const {
    ComplexVectorField out = *this;
    for (size_t a = 0; a < hol.size(); ++a) {
        out.hol[a] *= s;
        out.anti[a] *= s;
    }
    return out;
}

ComplexVectorField bracket(const ComplexVectorField& v, const ComplexVectorField& w) {
    const int n = v.n();
    ComplexVectorField out = ComplexVectorField::zero(n);
    for (int b = 0; b < n; ++b) {
        const auto bb = static_cast<size_t>(b);
        out.hol[bb] = v.apply(w.hol[bb]) - w.apply(v.hol[bb]);
        out.anti[bb] = v.apply(w.anti[bb]) - w.apply(v.anti[bb]);
    }
    return out;
}

ComplexVectorField realify(const std::vector<TrigPoly>& v) {
    ComplexVectorField x;
    x.hol = v;
    for (const auto& f : v) x.anti.push_back(f.conj());
    return x;
}

} // namespace moduli::torus
