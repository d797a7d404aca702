#pragma once

#include <cstddef>
#include <memory>
#include <span>

namespace binstream {

/// Central binomial coefficient scaled by 4^-k, computed with the
/// multiplicative recurrence g(k) = g(k-1) * (2k-1) / (2k). Stable for any k.
double gamma(std::size_t k) noexcept;

/// First difference gamma(k) - gamma(k-1), evaluated as -gamma(k)/(2k-1);
/// gamma_prime(0) = 1.
double gamma_prime(std::size_t k) noexcept;

/**
 * Parameters of the weighted counting matrix A_{alpha,beta} (weight decay
 * alpha, momentum beta) of dimension n, together with lazily computed
 * subdiagonal coefficients of A, of its lower-triangular square root B and
 * of B^{-1}.
 *
 * Valid range is 0 <= beta < alpha <= 1 and n >= 1; construction throws
 * ParameterError otherwise. Copies share one coefficient cache, which is
 * filled at most once per kind and is safe to touch from several threads.
 */
class ToeplitzSpec {
public:
    ToeplitzSpec(double alpha, double beta, std::size_t n);

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    std::size_t n() const noexcept { return n_; }

    /// a_0 .. a_{n-1}
    std::span<const double> counting_coeffs() const;
    /// b_0 .. b_{n-1}; O(n^2) on first call (O(n) when beta == 0).
    std::span<const double> sqrt_coeffs() const;
    /// s_0 .. s_{n-1}; O(n^2) on first call.
    std::span<const double> inv_sqrt_coeffs() const;

private:
    struct Cache;

    double alpha_;
    double beta_;
    std::size_t n_;
    std::shared_ptr<Cache> cache_;
};

/// a_k = (alpha^{k+1} - beta^{k+1}) / (alpha - beta). Requires k < n.
double counting_coeff(std::size_t k, const ToeplitzSpec& spec);

/// b_j = sum_{i=0}^{j} alpha^{j-i} gamma(j-i) gamma(i) beta^i. Requires j < n.
double sqrt_coeff(std::size_t j, const ToeplitzSpec& spec);

/// s_k = alpha^k sum_{i=0}^{k} (beta/alpha)^i gamma'(i) gamma'(k-i), the
/// k-th subdiagonal of B^{-1}. Requires k < n.
double inv_sqrt_coeff(std::size_t k, const ToeplitzSpec& spec);

} // namespace binstream
