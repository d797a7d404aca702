#include "binstream/toeplitz.hpp"

#include "binstream/errors.hpp"

#include <cmath>
#include <mutex>
#include <string>
#include <vector>

namespace binstream {

double gamma(std::size_t k) noexcept {
    double g = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        g *= static_cast<double>(2 * i - 1) / static_cast<double>(2 * i);
    }
    return g;
}

double gamma_prime(std::size_t k) noexcept {
    if (k == 0) return 1.0;
    return -gamma(k) / static_cast<double>(2 * k - 1);
}

namespace {

std::vector<double> gamma_table(std::size_t n) {
    std::vector<double> g(n);
    if (n == 0) return g;
    g[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
        g[k] = g[k - 1] * static_cast<double>(2 * k - 1) / static_cast<double>(2 * k);
    }
    return g;
}

std::vector<double> powers(double base, std::size_t n) {
    std::vector<double> p(n);
    double v = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        p[k] = v;
        v *= base;
    }
    return p;
}

// out[k] = sum_{i=0}^{k} alpha^{k-i} beta^i f[k-i] f[i]
std::vector<double> weighted_self_convolution(const std::vector<double>& f, double alpha, double beta) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    const auto pa = powers(alpha, n);
    if (beta == 0.0) {
        for (std::size_t k = 0; k < n; ++k) out[k] = pa[k] * f[k];
        return out;
    }
    const auto pb = powers(beta, n);
    std::vector<double> left(n);  // alpha^m f[m]
    std::vector<double> right(n); // beta^m f[m]
    for (std::size_t m = 0; m < n; ++m) {
        left[m] = pa[m] * f[m];
        right[m] = pb[m] * f[m];
    }
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= k; ++i) acc += left[k - i] * right[i];
        out[k] = acc;
    }
    return out;
}

void check_index(std::size_t k, const ToeplitzSpec& spec, const char* what) {
    if (k >= spec.n()) {
        throw ParameterError(std::string(what) + ": index " + std::to_string(k) +
                             " out of range for n = " + std::to_string(spec.n()));
    }
}

} // namespace

struct ToeplitzSpec::Cache {
    std::once_flag counting_once;
    std::once_flag sqrt_once;
    std::once_flag inv_once;
    std::vector<double> counting;
    std::vector<double> sqrt;
    std::vector<double> inv;
};

ToeplitzSpec::ToeplitzSpec(double alpha, double beta, std::size_t n)
    : alpha_(alpha), beta_(beta), n_(n), cache_(std::make_shared<Cache>()) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ParameterError("alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
    if (!(beta >= 0.0 && beta < 1.0)) {
        throw ParameterError("beta must lie in [0, 1), got " + std::to_string(beta));
    }
    if (!(beta < alpha)) {
        throw ParameterError("alpha must be strictly greater than beta (0 <= beta < alpha <= 1), got alpha = " +
                             std::to_string(alpha) + ", beta = " + std::to_string(beta));
    }
    if (n == 0) throw ParameterError("n must be at least 1");
}

std::span<const double> ToeplitzSpec::counting_coeffs() const {
    std::call_once(cache_->counting_once, [this] {
        // a_k = alpha a_{k-1} + beta^k; all terms positive, no cancellation.
        auto& a = cache_->counting;
        a.resize(n_);
        double beta_pow = 1.0;
        a[0] = 1.0;
        for (std::size_t k = 1; k < n_; ++k) {
            beta_pow *= beta_;
            a[k] = alpha_ * a[k - 1] + beta_pow;
        }
    });
    return cache_->counting;
}

std::span<const double> ToeplitzSpec::sqrt_coeffs() const {
    std::call_once(cache_->sqrt_once,
                   [this] { cache_->sqrt = weighted_self_convolution(gamma_table(n_), alpha_, beta_); });
    return cache_->sqrt;
}

std::span<const double> ToeplitzSpec::inv_sqrt_coeffs() const {
    std::call_once(cache_->inv_once, [this] {
        auto gp = gamma_table(n_);
        for (std::size_t k = 1; k < n_; ++k) gp[k] = -gp[k] / static_cast<double>(2 * k - 1);
        cache_->inv = weighted_self_convolution(gp, alpha_, beta_);
    });
    return cache_->inv;
}

double counting_coeff(std::size_t k, const ToeplitzSpec& spec) {
    check_index(k, spec, "counting_coeff");
    const double a = spec.alpha();
    const double b = spec.beta();
    return (std::pow(a, static_cast<double>(k + 1)) - std::pow(b, static_cast<double>(k + 1))) / (a - b);
}

double sqrt_coeff(std::size_t j, const ToeplitzSpec& spec) {
    check_index(j, spec, "sqrt_coeff");
    const auto g = gamma_table(j + 1);
    const double a = spec.alpha();
    const double b = spec.beta();
    double acc = 0.0;
    double alpha_pow = 1.0; // alpha^{j-i}, walked from i = j downwards
    for (std::size_t i = j + 1; i-- > 0;) {
        acc += alpha_pow * g[j - i] * g[i] * std::pow(b, static_cast<double>(i));
        alpha_pow *= a;
    }
    return acc;
}

double inv_sqrt_coeff(std::size_t k, const ToeplitzSpec& spec) {
    check_index(k, spec, "inv_sqrt_coeff");
    auto gp = gamma_table(k + 1);
    for (std::size_t m = 1; m <= k; ++m) gp[m] = -gp[m] / static_cast<double>(2 * m - 1);
    const double ratio = spec.beta() / spec.alpha();
    double acc = 0.0;
    double ratio_i = 1.0;
    for (std::size_t i = 0; i <= k; ++i) {
        acc += ratio_i * gp[i] * gp[k - i];
        ratio_i *= ratio;
    }
    return std::pow(spec.alpha(), static_cast<double>(k)) * acc;
}

} // namespace binstream
