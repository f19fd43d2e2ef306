#pragma once

// Closed-form pieces of the optimal-parameter system, generic over the scalar.
//
// Notation: omegas has P entries, kappas holds the P-1 interior extrema of
// Gamma. Where a formula needs P extrema the fixed upper end kappa_P = 2 is
// appended. All routines throw PoleError on a vanishing denominator.

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "srj/errors.hpp"

namespace srj {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

template <class T>
T nonzero(const T& x, const char* where) {
    if (x == T(0)) throw PoleError(where);
    return x;
}

template <class T>
std::vector<T> with_upper(std::span<const T> kappas, const T& kappa_max) {
    std::vector<T> k(kappas.begin(), kappas.end());
    k.push_back(kappa_max);
    return k;
}

}  // namespace detail

/// beta_i = prod_k (1 - kappa_k omega_i) * prod_{l != i} omega_l / (omega_l - omega_i).
/// Solves the stationarity conditions at every kappa_k together with sum beta = 1.
template <class T>
std::vector<T> beta_from(std::span<const T> omegas, std::span<const T> kappas) {
    const std::size_t p = omegas.size();
    std::vector<T> beta(p);
    for (std::size_t i = 0; i < p; ++i) {
        T v(1);
        for (const T& k : kappas) v *= T(1) - k * omegas[i];
        for (std::size_t l = 0; l < p; ++l) {
            if (l == i) continue;
            v *= omegas[l] / detail::nonzero(T(omegas[l] - omegas[i]), "beta_from: coincident weights");
        }
        beta[i] = v;
    }
    return beta;
}

/// Matrix A of the sensitivity system, a_ij = kappa_i beta_j / (1 - kappa_i omega_j),
/// i, j = 1..P with kappa_P = kappa_max.
template <class T>
Matrix<T> sensitivity_matrix(std::span<const T> omegas, std::span<const T> kappas,
                             std::span<const T> betas, const T& kappa_max = T(2)) {
    const auto k = detail::with_upper(kappas, kappa_max);
    const Eigen::Index p = static_cast<Eigen::Index>(omegas.size());
    Matrix<T> a(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            a(i, j) = k[i] * betas[j] /
                      detail::nonzero(T(T(1) - k[i] * omegas[j]), "sensitivity_matrix: pole");
    return a;
}

/// Explicit inverse of sensitivity_matrix.
template <class T>
Matrix<T> sensitivity_matrix_inverse(std::span<const T> omegas, std::span<const T> kappas,
                                     std::span<const T> betas, const T& kappa_max = T(2)) {
    const auto k = detail::with_upper(kappas, kappa_max);
    const std::size_t p = omegas.size();
    Matrix<T> inv(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            T v = (T(1) - k[j] * omegas[i]) /
                  detail::nonzero(T(betas[i] * k[j]), "sensitivity_matrix_inverse: zero beta");
            for (std::size_t m = 0; m < p; ++m) {
                if (m == j) continue;
                v *= (T(1) - k[m] * omegas[i]) /
                     detail::nonzero(T(k[m] - k[j]), "sensitivity_matrix_inverse: coincident kappas");
            }
            for (std::size_t l = 0; l < p; ++l) {
                if (l == i) continue;
                v *= (T(1) - k[j] * omegas[l]) /
                     detail::nonzero(T(omegas[l] - omegas[i]), "sensitivity_matrix_inverse: coincident weights");
            }
            inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return inv;
}

/// Matrix B of the beta system, b_ij = (1 - omega_j/omega_P) / (1 - kappa_i omega_j),
/// i, j = 1..P-1.
template <class T>
Matrix<T> beta_matrix(std::span<const T> omegas, std::span<const T> kappas) {
    const std::size_t n = kappas.size();
    const T& wp = omegas.back();
    Matrix<T> b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (T(1) - omegas[j] / wp) /
                detail::nonzero(T(T(1) - kappas[i] * omegas[j]), "beta_matrix: pole");
    return b;
}

/// Explicit inverse of beta_matrix.
template <class T>
Matrix<T> beta_matrix_inverse(std::span<const T> omegas, std::span<const T> kappas) {
    const std::size_t n = kappas.size();
    const std::size_t p = omegas.size();
    const T& wp = omegas.back();
    Matrix<T> inv(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T v = wp * (T(1) - kappas[j] * omegas[i]) /
                  detail::nonzero(T(T(1) - kappas[j] * wp), "beta_matrix_inverse: pole");
            for (std::size_t m = 0; m < n; ++m) {
                if (m == j) continue;
                v *= (T(1) - kappas[m] * omegas[i]) /
                     detail::nonzero(T(kappas[m] - kappas[j]), "beta_matrix_inverse: coincident kappas");
            }
            for (std::size_t l = 0; l < p; ++l) {
                if (l == i) continue;
                v *= (T(1) - kappas[j] * omegas[l]) /
                     detail::nonzero(T(omegas[l] - omegas[i]), "beta_matrix_inverse: coincident weights");
            }
            inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return inv;
}

/// d omega_i / d beta_q for i = 1..P, q = 1..P-1 (a P x (P-1) matrix), from the
/// explicit inverse of the sensitivity system applied to
/// f_j = log|(1 - kappa_j omega_q) / (1 - kappa_j omega_P)|, j = 1..P.
template <class T>
Matrix<T> domega_dbeta(std::span<const T> omegas, std::span<const T> kappas,
                       std::span<const T> betas, const T& kappa_max = T(2)) {
    using std::abs;
    using std::log;
    const std::size_t p = omegas.size();
    const auto k = detail::with_upper(kappas, kappa_max);
    const Matrix<T> inv = sensitivity_matrix_inverse(omegas, kappas, betas, kappa_max);
    Matrix<T> d(p, p - 1);
    Matrix<T> logs(p, p);  // logs(j, i) = log|1 - kappa_j omega_i|
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < p; ++i)
            logs(j, i) = log(abs(detail::nonzero(T(T(1) - k[j] * omegas[i]), "domega_dbeta: pole")));
    for (std::size_t q = 0; q + 1 < p; ++q) {
        for (std::size_t i = 0; i < p; ++i) {
            T acc(0);
            for (std::size_t j = 0; j < p; ++j) acc += inv(i, j) * (logs(j, q) - logs(j, p - 1));
            d(i, q) = acc;
        }
    }
    return d;
}

/// Residual of the reduced optimality system in the unknowns (omega, kappa):
///   r_i       = log Gamma(kappa_0) - log Gamma(kappa_i),  i = 1..P (kappa_P = kappa_max)
///   r_{P+j}   = d log Gamma(kappa_0) / d beta_j,            j = 1..P-1
/// with beta and d omega / d beta from the closed forms. Vanishes at the optimum.
template <class T>
std::vector<T> residual(std::span<const T> omegas, std::span<const T> kappas, const T& kappa0,
                        const T& kappa_max = T(2)) {
    using std::abs;
    using std::log;
    const std::size_t p = omegas.size();
    const auto beta = beta_from<T>(omegas, kappas);
    const auto k = detail::with_upper(kappas, kappa_max);

    auto log_gamma_at = [&](const T& x) {
        T acc(0);
        for (std::size_t i = 0; i < p; ++i)
            acc += beta[i] * log(abs(detail::nonzero(T(T(1) - omegas[i] * x), "residual: pole")));
        return acc;
    };

    std::vector<T> r;
    r.reserve(2 * p - 1);
    const T g0 = log_gamma_at(kappa0);
    for (std::size_t i = 0; i < p; ++i) r.push_back(g0 - log_gamma_at(k[i]));

    if (p > 1) {
        const Matrix<T> d = domega_dbeta<T>(omegas, kappas, beta, kappa_max);
        const T lp = log(abs(T(T(1) - omegas[p - 1] * kappa0)));
        for (std::size_t j = 0; j + 1 < p; ++j) {
            T s(0);
            for (std::size_t i = 0; i < p; ++i) s += beta[i] * d(i, j) / (T(1) - omegas[i] * kappa0);
            r.push_back(log(abs(T(T(1) - omegas[j] * kappa0))) - lp - kappa0 * s);
        }
    }
    return r;
}

}  // namespace srj
