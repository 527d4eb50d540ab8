#include "moduli/su2/wigner.hpp"

#include "moduli/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <unordered_map>

namespace moduli::su2 {

namespace {

constexpr Complex kI(0.0, 1.0);

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double radical_inverse(int index, int base) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * (index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

std::uint64_t cg_key(int a, int b, int c, int d, int e, int f) {
    auto u = [](int v) { return static_cast<std::uint64_t>(v + 512) & 0x3ffu; };
    return u(a) | (u(b) << 10) | (u(c) << 20) | (u(d) << 30) | (u(e) << 40) | (u(f) << 50);
}

} // namespace

Eigen::Matrix2cd generator(int a) {
    Eigen::Matrix2cd x = Eigen::Matrix2cd::Zero();
    switch (a) {
    case 0: // -i sigma_1
        x(0, 1) = -kI;
        x(1, 0) = -kI;
        break;
    case 1: // -i sigma_2
        x(0, 1) = -1.0;
        x(1, 0) = 1.0;
        break;
    case 2: // -i sigma_3
        x(0, 0) = -kI;
        x(1, 1) = kI;
        break;
    default:
        throw DomainError("frame axis must be 0, 1 or 2");
    }
    return x;
}

Su2 su2_from_quaternion(const Eigen::Vector4d& q) {
    Su2 g = q(0) * Eigen::Matrix2cd::Identity();
    for (int a = 0; a < 3; ++a) g += q(a + 1) * generator(a);
    return g;
}

Eigen::Vector4d su2_to_quaternion(const Su2& g) {
    return {g(0, 0).real(), -g(0, 1).imag(), -g(0, 1).real(), -g(0, 0).imag()};
}

Su2 su2_exp(const Eigen::Vector3d& theta) {
    const double t = theta.norm();
    Eigen::Vector4d q;
    q(0) = std::cos(t);
    const double s = t > 0.0 ? std::sin(t) / t : 1.0;
    q.tail<3>() = s * theta;
    return su2_from_quaternion(q);
}

Eigen::Vector3d su2_log(const Su2& g) {
    const Eigen::Vector4d q = su2_to_quaternion(g);
    const Eigen::Vector3d v = q.tail<3>();
    const double s = v.norm();
    const double t = std::atan2(s, q(0));
    if (s == 0.0) return q(0) >= 0.0 ? Eigen::Vector3d::Zero() : Eigen::Vector3d(0.0, 0.0, std::numbers::pi);
    return v * (t / s);
}

std::vector<Su2> sample_points(int count) {
    std::vector<Su2> out;
    out.reserve(static_cast<size_t>(count));
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int i = 1; i <= count; ++i) {
        const double u1 = radical_inverse(i, 2);
        const double u2 = radical_inverse(i, 3);
        const double u3 = radical_inverse(i, 5);
        const double a = std::sqrt(1.0 - u1);
        const double b = std::sqrt(u1);
        Eigen::Vector4d q(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2), a * std::cos(two_pi * u2),
                          b * std::sin(two_pi * u3));
        out.push_back(su2_from_quaternion(q));
    }
    return out;
}

Eigen::MatrixXcd spin_matrix(int tj, int a) {
    const int d = irrep_dim(tj);
    Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(d, d);
    Eigen::MatrixXcd j3 = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const int tm = m_value2(tj, i);
        j3(i, i) = 0.5 * tm;
        if (i + 1 < d) jp(i + 1, i) = 0.5 * std::sqrt(static_cast<double>((tj - tm) * (tj + tm + 2)));
    }
    const Eigen::MatrixXcd jm = jp.adjoint();
    switch (a) {
    case 0:
        return 0.5 * (jp + jm);
    case 1:
        return (jp - jm) / (2.0 * kI);
    case 2:
        return j3;
    default:
        throw DomainError("frame axis must be 0, 1 or 2");
    }
}

Eigen::MatrixXcd rho(int tj, int a) { return -2.0 * kI * spin_matrix(tj, a); }

Eigen::MatrixXcd wigner_matrix(int tj, const Su2& g) {
    const Eigen::Vector3d th = su2_log(g);
    const int d = irrep_dim(tj);
    if (tj == 0) return Eigen::MatrixXcd::Ones(1, 1);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
    for (int a = 0; a < 3; ++a) h += th(a) * spin_matrix(tj, a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd ph(d);
    for (int i = 0; i < d; ++i) ph(i) = std::exp(-2.0 * kI * es.eigenvalues()(i));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
    if (tm1 + tm2 != tM) return 0.0;
    if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ) return 0.0;
    if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tJ + tM) % 2 != 0) return 0.0;
    if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2 || (tj1 + tj2 + tJ) % 2 != 0) return 0.0;

    thread_local std::unordered_map<std::uint64_t, double> cache;
    const std::uint64_t key = cg_key(tj1, tm1, tj2, tm2, tJ, tM);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    // Racah's formula with integer arguments.
    const int a = (tj1 + tj2 - tJ) / 2;
    const int b = (tj1 - tm1) / 2;
    const int c = (tj2 + tm2) / 2;
    const int d = (tJ - tj2 + tm1) / 2;
    const int e = (tJ - tj1 - tm2) / 2;
    const double pre = 0.5 * (std::log(tJ + 1.0) + log_factorial((tJ + tj1 - tj2) / 2) +
                              log_factorial((tJ - tj1 + tj2) / 2) + log_factorial(a) -
                              log_factorial((tj1 + tj2 + tJ) / 2 + 1) + log_factorial((tJ + tM) / 2) +
                              log_factorial((tJ - tM) / 2) + log_factorial(b) + log_factorial((tj1 + tm1) / 2) +
                              log_factorial((tj2 - tm2) / 2) + log_factorial(c));
    const int kmin = std::max({0, -d, -e});
    const int kmax = std::min({a, b, c});
    long double sum = 0.0L;
    for (int k = kmin; k <= kmax; ++k) {
        const double lt = pre - (log_factorial(k) + log_factorial(a - k) + log_factorial(b - k) +
                                 log_factorial(c - k) + log_factorial(d + k) + log_factorial(e + k));
        const long double term = std::exp(static_cast<long double>(lt));
        sum += (k % 2 == 0) ? term : -term;
    }
    const double v = static_cast<double>(sum);
    cache.emplace(key, v);
    return v;
}

// ----------------------------------------------------------------------------
// WignerSpace

WignerSpace::WignerSpace(int two_j_max) : two_j_max_(two_j_max) {
    if (two_j_max < 0) throw DomainError("negative j_max");
    std::vector<numerics::Label> clabels;
    std::vector<numerics::Label> rlabels;
    std::vector<double> cw;
    std::vector<double> rw;
    for (int tj = 0; tj <= two_j_max; ++tj) {
        offsets_.push_back(static_cast<Index>(labels_.size()));
        const int d = irrep_dim(tj);
        const double w = kVolume / d;
        const Index nb = block_size(tj);
        Eigen::MatrixXcd r2c = Eigen::MatrixXcd::Zero(nb, nb);
        Index r = 0;
        for (int im = 0; im < d; ++im)
            for (int in = 0; in < d; ++in) {
                const int tm = m_value2(tj, im);
                const int tn = m_value2(tj, in);
                const WignerLabel l{tj, tm, tn};
                index_.emplace(l, static_cast<Index>(labels_.size()));
                labels_.push_back(l);
                clabels.push_back({tj, tm, tn});
                cw.push_back(w);
                const Index p = static_cast<Index>(im) * d + in;
                if (tm == 0 && tn == 0) {
                    rlabels.push_back({tj, 0, 0, 0});
                    rw.push_back(w);
                    r2c(p, r++) = 1.0;
                    continue;
                }
                if (!(tm > 0 || (tm == 0 && tn > 0))) continue;
                const Index q = static_cast<Index>(m_index(tj, -tm)) * d + m_index(tj, -tn);
                const double s = conj_sign(tm, tn);
                rlabels.push_back({tj, tm, tn, 0});
                rw.push_back(0.5 * w);
                r2c(p, r) = 0.5;
                r2c(q, r) = 0.5 * s;
                ++r;
                rlabels.push_back({tj, tm, tn, 1});
                rw.push_back(0.5 * w);
                r2c(p, r) = -0.5 * kI;
                r2c(q, r) = 0.5 * s * kI;
                ++r;
            }
        r2c_.push_back(std::move(r2c));

        std::array<Eigen::MatrixXcd, 3> cf;
        std::array<Eigen::MatrixXd, 3> rf;
        for (int a = 0; a < 3; ++a) {
            const Eigen::MatrixXcd rh = rho(tj, a);
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nb, nb);
            // e_a D_{mn} = sum_p D_{mp} rho_{pn}
            for (int im = 0; im < d; ++im)
                for (int in = 0; in < d; ++in)
                    for (int ip = 0; ip < d; ++ip) m(im * d + ip, im * d + in) = rh(ip, in);
            cf[static_cast<size_t>(a)] = m;
            const Eigen::MatrixXcd img = m * r2c_.back();
            Eigen::MatrixXd real(nb, nb);
            for (Index col = 0; col < nb; ++col) real.col(col) = real_part_coords(tj, img.col(col));
            rf[static_cast<size_t>(a)] = std::move(real);
        }
        complex_frame_.push_back(std::move(cf));
        real_frame_.push_back(std::move(rf));
    }
    dim_ = static_cast<Index>(labels_.size());
    offsets_.push_back(dim_);
    const std::string tag = "SU2-j" + std::to_string(two_j_max) + "/2";
    auto to_vec = [](const std::vector<double>& v) {
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())));
    };
    complex_ = std::make_shared<const numerics::LabeledBasis>(tag + "-complex", std::move(clabels), to_vec(cw));
    real_ = std::make_shared<const numerics::LabeledBasis>(tag + "-real", std::move(rlabels), to_vec(rw));
}

Index WignerSpace::index_of(const WignerLabel& l) const {
    auto it = index_.find(l);
    if (it == index_.end()) throw DomainError("Wigner label outside the truncation");
    return it->second;
}

Eigen::VectorXd WignerSpace::real_part_coords(int tj, const Eigen::VectorXcd& c) const {
    const int d = irrep_dim(tj);
    Eigen::VectorXd out(block_size(tj));
    Index r = 0;
    for (int im = 0; im < d; ++im)
        for (int in = 0; in < d; ++in) {
            const int tm = m_value2(tj, im);
            const int tn = m_value2(tj, in);
            const Index p = static_cast<Index>(im) * d + in;
            if (tm == 0 && tn == 0) {
                out(r++) = c(p).real();
                continue;
            }
            if (!(tm > 0 || (tm == 0 && tn > 0))) continue;
            const Index q = static_cast<Index>(m_index(tj, -tm)) * d + m_index(tj, -tn);
            // coefficient of D_p in Re f is (c_p + s conj(c_q)) / 2
            const Complex h = c(p) + static_cast<double>(conj_sign(tm, tn)) * std::conj(c(q));
            out(r++) = h.real();
            out(r++) = -h.imag();
        }
    return out;
}

Eigen::VectorXcd WignerSpace::real_to_complex(const Eigen::VectorXd& r) const {
    if (r.size() != dim_) throw DimensionError("real Wigner coordinates");
    Eigen::VectorXcd c(dim_);
    for (int tj = 0; tj <= two_j_max_; ++tj) {
        const Index o = block_offset(tj);
        const Index n = block_size(tj);
        c.segment(o, n) = real_to_complex(tj) * r.segment(o, n).cast<Complex>();
    }
    return c;
}

Eigen::VectorXd WignerSpace::real_part_coords(const Eigen::VectorXcd& c) const {
    if (c.size() != dim_) throw DimensionError("complex Wigner coefficients");
    Eigen::VectorXd r(dim_);
    for (int tj = 0; tj <= two_j_max_; ++tj) {
        const Index o = block_offset(tj);
        const Index n = block_size(tj);
        r.segment(o, n) = real_part_coords(tj, c.segment(o, n));
    }
    return r;
}

// ----------------------------------------------------------------------------
// WignerPoly

WignerPoly WignerPoly::constant(Complex c) { return single({0, 0, 0}, c); }

WignerPoly WignerPoly::single(const WignerLabel& l, Complex c) {
    if (l.tj < 0 || std::abs(l.tm) > l.tj || std::abs(l.tn) > l.tj || (l.tj + l.tm) % 2 != 0 ||
        (l.tj + l.tn) % 2 != 0)
        throw DomainError("invalid Wigner label");
    WignerPoly p;
    p.add_term(l, c);
    return p;
}

WignerPoly WignerPoly::from_complex(const WignerSpace& s, const Eigen::VectorXcd& c) {
    if (c.size() != s.dim()) throw DimensionError("complex Wigner coefficients");
    WignerPoly p;
    for (Index i = 0; i < c.size(); ++i) p.add_term(s.labels()[static_cast<size_t>(i)], c(i));
    return p;
}

WignerPoly WignerPoly::from_real(const WignerSpace& s, const Eigen::VectorXd& r) {
    return from_complex(s, s.real_to_complex(r));
}

void WignerPoly::add_term(const WignerLabel& l, Complex c) {
    if (c == Complex(0.0)) return;
    auto [it, fresh] = terms_.emplace(l, c);
    if (!fresh) {
        it->second += c;
        if (it->second == Complex(0.0)) terms_.erase(it);
    }
}

Complex WignerPoly::coeff(const WignerLabel& l) const {
    auto it = terms_.find(l);
    return it == terms_.end() ? Complex(0.0) : it->second;
}

int WignerPoly::max_tj() const {
    int m = 0;
    for (const auto& [l, c] : terms_) m = std::max(m, l.tj);
    return m;
}

Eigen::VectorXcd WignerPoly::to_complex(const WignerSpace& s) const {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(s.dim());
    for (const auto& [l, v] : terms_)
        if (l.tj <= s.two_j_max()) c(s.index_of(l)) = v;
    return c;
}

Eigen::VectorXd WignerPoly::to_real(const WignerSpace& s) const { return s.real_part_coords(to_complex(s)); }

double WignerPoly::norm() const {
    double acc = 0.0;
    for (const auto& [l, c] : terms_) acc += std::norm(c) * kVolume / irrep_dim(l.tj);
    return std::sqrt(acc);
}

double WignerPoly::tail_norm(int two_j_max) const {
    double acc = 0.0;
    for (const auto& [l, c] : terms_)
        if (l.tj > two_j_max) acc += std::norm(c) * kVolume / irrep_dim(l.tj);
    return std::sqrt(acc);
}

WignerPoly WignerPoly::truncated(int two_j_max) const {
    WignerPoly p;
    for (const auto& [l, c] : terms_)
        if (l.tj <= two_j_max) p.terms_.emplace(l, c);
    return p;
}

Complex WignerPoly::evaluate(const Su2& g) const {
    Complex acc(0.0);
    int cur = -1;
    Eigen::MatrixXcd d;
    for (const auto& [l, c] : terms_) {
        if (l.tj != cur) {
            cur = l.tj;
            d = wigner_matrix(cur, g);
        }
        acc += c * d(m_index(l.tj, l.tm), m_index(l.tj, l.tn));
    }
    return acc;
}

WignerPoly WignerPoly::derivative(int a) const {
    Eigen::Vector3cd v = Eigen::Vector3cd::Zero();
    v(a) = 1.0;
    return derivative(v);
}

WignerPoly WignerPoly::derivative(const Eigen::Vector3cd& v) const {
    WignerPoly out;
    int cur = -1;
    Eigen::MatrixXcd r;
    for (const auto& [l, c] : terms_) {
        if (l.tj != cur) {
            cur = l.tj;
            r = Eigen::MatrixXcd::Zero(irrep_dim(cur), irrep_dim(cur));
            for (int a = 0; a < 3; ++a)
                if (v(a) != Complex(0.0)) r += v(a) * rho(cur, a);
        }
        const int in = m_index(l.tj, l.tn);
        for (int ip = 0; ip < irrep_dim(l.tj); ++ip)
            if (r(ip, in) != Complex(0.0)) out.add_term({l.tj, l.tm, m_value2(l.tj, ip)}, c * r(ip, in));
    }
    return out;
}

WignerPoly WignerPoly::conj() const {
    WignerPoly out;
    for (const auto& [l, c] : terms_)
        out.add_term({l.tj, -l.tm, -l.tn}, static_cast<double>(conj_sign(l.tm, l.tn)) * std::conj(c));
    return out;
}

WignerPoly WignerPoly::real_part() const { return (*this + conj()) * 0.5; }

WignerPoly WignerPoly::imag_part() const { return (*this - conj()) * Complex(0.0, -0.5); }

WignerPoly& WignerPoly::operator+=(const WignerPoly& o) {
    for (const auto& [l, c] : o.terms_) add_term(l, c);
    return *this;
}

WignerPoly& WignerPoly::operator-=(const WignerPoly& o) {
    for (const auto& [l, c] : o.terms_) add_term(l, -c);
    return *this;
}

WignerPoly& WignerPoly::operator*=(Complex s) {
    if (s == Complex(0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& [l, c] : terms_) c *= s;
    return *this;
}

WignerPoly WignerPoly::operator+(const WignerPoly& o) const {
    WignerPoly out = *this;
    out += o;
    return out;
}

WignerPoly WignerPoly::operator-(const WignerPoly& o) const {
    WignerPoly out = *this;
    out -= o;
    return out;
}

WignerPoly WignerPoly::operator-() const { return *this * Complex(-1.0); }

WignerPoly WignerPoly::operator*(Complex s) const {
    WignerPoly out = *this;
    out *= s;
    return out;
}

WignerPoly WignerPoly::operator*(const WignerPoly& o) const {
    WignerPoly out;
    for (const auto& [a, ca] : terms_)
        for (const auto& [b, cb] : o.terms_) {
            const int tm = a.tm + b.tm;
            const int tn = a.tn + b.tn;
            const Complex c = ca * cb;
            for (int tJ = std::abs(a.tj - b.tj); tJ <= a.tj + b.tj; tJ += 2) {
                if (std::abs(tm) > tJ || std::abs(tn) > tJ) continue;
                const double w = clebsch_gordan(a.tj, a.tm, b.tj, b.tm, tJ, tm) *
                                 clebsch_gordan(a.tj, a.tn, b.tj, b.tn, tJ, tn);
                if (w != 0.0) out.add_term({tJ, tm, tn}, c * w);
            }
        }
    return out;
}

} // namespace moduli::su2
