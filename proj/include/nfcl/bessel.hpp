#pragma once

// Bessel functions J_m and K_m of small integer order, plus their first
// derivatives. Values come from the C++17 mathematical special functions;
// this header adds the argument checks and the derivative recurrences.

#include <cmath>
#include <string>

#include "nfcl/errors.hpp"

namespace nfcl::bessel {

inline constexpr int max_order = 3;

/// Upper end of the argument range with certified accuracy.
inline constexpr double max_certified_argument = 50.0;

namespace detail {

inline void check_order(int m, int max) {
    if (m < 0 || m > max) {
        throw DomainError("bessel order " + std::to_string(m) + " outside [0, " +
                          std::to_string(max) + "]");
    }
}

} // namespace detail

/// J_m(x) for x >= 0.
inline double j(int m, double x) {
    detail::check_order(m, max_order);
    if (!std::isfinite(x) || x < 0.0) {
        throw DomainError("bessel_j: argument must be finite and non-negative");
    }
    return std::cyl_bessel_j(static_cast<double>(m), x);
}

/// K_m(x) for x > 0. Strictly positive; underflows to zero for x beyond ~700.
inline double k(int m, double x) {
    detail::check_order(m, max_order);
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError("bessel_k: argument must be finite and strictly positive");
    }
    return std::cyl_bessel_k(static_cast<double>(m), x);
}

/// J'_m(x) = (J_{m-1}(x) - J_{m+1}(x)) / 2, with J_{-1} = -J_1.
inline double j_prime(int m, double x) {
    detail::check_order(m, max_order - 1);
    if (m == 0) {
        return -j(1, x);
    }
    return 0.5 * (j(m - 1, x) - j(m + 1, x));
}

/// K'_m(x) = -(K_{m-1}(x) + K_{m+1}(x)) / 2, with K_{-1} = K_1.
inline double k_prime(int m, double x) {
    detail::check_order(m, max_order - 1);
    if (m == 0) {
        return -k(1, x);
    }
    return -0.5 * (k(m - 1, x) + k(m + 1, x));
}

} // namespace nfcl::bessel
