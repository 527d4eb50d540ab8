#pragma once

#include "moduli/numerics/basis.hpp"

#include <random>

namespace moduli::numerics {

using Rng = std::mt19937_64;

template <class T>
Vector<T> random_vector(Rng& rng, Index n);

template <>
inline Vector<double> random_vector<double>(Rng& rng, Index n) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Vector<double> v(n);
    for (Index i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
}

template <>
inline Vector<Complex> random_vector<Complex>(Rng& rng, Index n) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Vector<Complex> v(n);
    for (Index i = 0; i < n; ++i) {
        const double re = dist(rng);
        const double im = dist(rng);
        v(i) = Complex(re, im);
    }
    return v;
}

/// Uniform sample from the Euclidean ball of the given radius.
inline Eigen::VectorXd random_in_ball(Rng& rng, Index n, double radius) {
    Eigen::VectorXd v = random_vector<double>(rng, n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = radius * std::pow(u(rng), 1.0 / static_cast<double>(n));
    const double len = v.norm();
    return len > 0.0 ? Eigen::VectorXd(v * (r / len)) : Eigen::VectorXd::Zero(n);
}

} // namespace moduli::numerics
