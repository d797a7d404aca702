#include "binstream/matrix.hpp"

#include "binstream/errors.hpp"
#include "binstream/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace binstream {

LowerTriangularMatrix::LowerTriangularMatrix(std::size_t n) : n_(n), data_(n * (n + 1) / 2, 0.0) {}

LowerTriangularMatrix LowerTriangularMatrix::identity(std::size_t n) {
    LowerTriangularMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.row(i)[i] = 1.0;
    return m;
}

double& LowerTriangularMatrix::at(std::size_t i, std::size_t j) {
    if (i >= n_ || j > i) {
        throw DimensionError("entry (" + std::to_string(i) + ", " + std::to_string(j) +
                             ") is outside the lower triangle of a " + std::to_string(n_) + "x" +
                             std::to_string(n_) + " matrix");
    }
    return data_[offset(i) + j];
}

LowerTriangularMatrix build_toeplitz(std::size_t n, const std::function<double(std::size_t)>& coeff) {
    std::vector<double> c(n);
    for (std::size_t k = 0; k < n; ++k) c[k] = coeff(k);
    return build_toeplitz(n, c);
}

LowerTriangularMatrix build_toeplitz(std::size_t n, std::span<const double> coeffs) {
    if (coeffs.size() < n) throw DimensionError("build_toeplitz: fewer coefficients than rows");
    LowerTriangularMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j <= i; ++j) r[j] = coeffs[i - j];
    }
    return m;
}

DenseMatrix to_dense(const LowerTriangularMatrix& m) {
    DenseMatrix d(m.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j <= i; ++j) d(i, j) = r[j];
    }
    return d;
}

namespace {

void require_size(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) + ", got " +
                             std::to_string(got));
    }
}

void require_invertible(const LowerTriangularMatrix& l) {
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (l(i, i) == 0.0) {
            throw NumericError("triangular solve: zero diagonal entry at row " + std::to_string(i + 1));
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

// Largest eigenvalue of a symmetric positive semidefinite operator given by
// apply_gram, via power iteration with Rayleigh quotients.
template <typename Apply>
double power_iteration_max_eigenvalue(std::size_t n, Apply&& apply_gram, double tol) {
    if (!(tol > 0.0)) throw ParameterError("power iteration tolerance must be positive");
    if (n == 0) return 0.0;

    std::mt19937_64 rng(0x5eed'b1a5ULL);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    std::vector<double> v(n);
    for (auto& x : v) x = unif(rng);

    double nv = norm2(v);
    for (auto& x : v) x /= nv;

    double lambda = 0.0;
    for (std::size_t it = 0; it < kPowerIterationCap; ++it) {
        std::vector<double> w = apply_gram(v);
        const double next = dot(v, w);
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        for (std::size_t k = 0; k < n; ++k) v[k] = w[k] / nw;
        if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
        lambda = next;
    }
    throw NumericError("power iteration did not converge within " + std::to_string(kPowerIterationCap) +
                       " iterations");
}

} // namespace

std::vector<double> matvec(const LowerTriangularMatrix& m, std::span<const double> z) {
    require_size(m.size(), z.size(), "matvec");
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = dot(m.row(i), z.first(i + 1));
    return out;
}

std::vector<double> matvec(const DenseMatrix& m, std::span<const double> z) {
    require_size(m.cols(), z.size(), "matvec");
    std::vector<double> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), z);
    return out;
}

std::vector<double> matvec_transpose(const LowerTriangularMatrix& m, std::span<const double> z) {
    require_size(m.size(), z.size(), "matvec_transpose");
    std::vector<double> out(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto r = m.row(i);
        const double zi = z[i];
        for (std::size_t j = 0; j <= i; ++j) out[j] += r[j] * zi;
    }
    return out;
}

namespace {

std::vector<double> matvec_transpose(const DenseMatrix& m, std::span<const double> z) {
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += r[j] * z[i];
    }
    return out;
}

} // namespace

LowerTriangularMatrix multiply(const LowerTriangularMatrix& lhs, const LowerTriangularMatrix& rhs) {
    require_size(lhs.size(), rhs.size(), "multiply");
    const std::size_t n = lhs.size();
    LowerTriangularMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto o = out.row(i);
        auto l = lhs.row(i);
        for (std::size_t j = 0; j <= i; ++j) {
            const double lij = l[j];
            if (lij == 0.0) continue;
            auto r = rhs.row(j);
            for (std::size_t c = 0; c <= j; ++c) o[c] += lij * r[c];
        }
    }
    return out;
}

DenseMatrix multiply(const DenseMatrix& lhs, const DenseMatrix& rhs) {
    require_size(lhs.cols(), rhs.rows(), "multiply");
    DenseMatrix out(lhs.rows(), rhs.cols());
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        for (std::size_t k = 0; k < lhs.cols(); ++k) {
            const double v = lhs(i, k);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += v * rhs(k, j);
        }
    }
    return out;
}

LowerTriangularMatrix forward_substitute(const LowerTriangularMatrix& l, const LowerTriangularMatrix& y) {
    require_size(l.size(), y.size(), "forward_substitute");
    require_invertible(l);
    const std::size_t n = l.size();
    LowerTriangularMatrix x(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        auto yi = y.row(i);
        std::copy(yi.begin(), yi.end(), xi.begin());
        auto li = l.row(i);
        for (std::size_t j = 0; j < i; ++j) {
            const double lij = li[j];
            if (lij == 0.0) continue;
            auto xj = x.row(j);
            for (std::size_t c = 0; c <= j; ++c) xi[c] -= lij * xj[c];
        }
        const double inv = 1.0 / li[i];
        for (auto& v : xi) v *= inv;
    }
    return x;
}

std::vector<double> forward_substitute(const LowerTriangularMatrix& l, std::span<const double> y) {
    require_size(l.size(), y.size(), "forward_substitute");
    require_invertible(l);
    std::vector<double> x(y.begin(), y.end());
    for (std::size_t i = 0; i < l.size(); ++i) {
        auto li = l.row(i);
        double acc = x[i];
        for (std::size_t j = 0; j < i; ++j) acc -= li[j] * x[j];
        x[i] = acc / li[i];
    }
    return x;
}

std::vector<double> back_substitute_transpose(const LowerTriangularMatrix& l, std::span<const double> y) {
    require_size(l.size(), y.size(), "back_substitute_transpose");
    require_invertible(l);
    // Column-oriented sweep over the rows of L, which are the columns of L^T.
    std::vector<double> x(y.begin(), y.end());
    for (std::size_t i = l.size(); i-- > 0;) {
        auto li = l.row(i);
        x[i] /= li[i];
        const double xi = x[i];
        for (std::size_t j = 0; j < i; ++j) x[j] -= li[j] * xi;
    }
    return x;
}

double frobenius_norm(const LowerTriangularMatrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += dot(m.row(i), m.row(i));
    return std::sqrt(acc);
}

double row_max_norm(const LowerTriangularMatrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) best = std::max(best, dot(m.row(i), m.row(i)));
    return std::sqrt(best);
}

double col_max_norm(const LowerTriangularMatrix& m) {
    std::vector<double> sq(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j <= i; ++j) sq[j] += r[j] * r[j];
    }
    return std::sqrt(sq.empty() ? 0.0 : *std::max_element(sq.begin(), sq.end()));
}

double frobenius_norm(const DenseMatrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) acc += dot(m.row(i), m.row(i));
    return std::sqrt(acc);
}

double row_max_norm(const DenseMatrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) best = std::max(best, dot(m.row(i), m.row(i)));
    return std::sqrt(best);
}

double col_max_norm(const DenseMatrix& m) {
    std::vector<double> sq(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) sq[j] += r[j] * r[j];
    }
    return std::sqrt(sq.empty() ? 0.0 : *std::max_element(sq.begin(), sq.end()));
}

double max_abs_diff(const LowerTriangularMatrix& a, const LowerTriangularMatrix& b) {
    require_size(a.size(), b.size(), "max_abs_diff");
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto ra = a.row(i);
        auto rb = b.row(i);
        for (std::size_t j = 0; j <= i; ++j) best = std::max(best, std::abs(ra[j] - rb[j]));
    }
    return best;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    require_size(a.rows(), b.rows(), "max_abs_diff");
    require_size(a.cols(), b.cols(), "max_abs_diff");
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) best = std::max(best, std::abs(a(i, j) - b(i, j)));
    }
    return best;
}

double max_abs(const LowerTriangularMatrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (double v : m.row(i)) best = std::max(best, std::abs(v));
    }
    return best;
}

double operator_norm(const LowerTriangularMatrix& m, double tol) {
    const double lambda = power_iteration_max_eigenvalue(
        m.size(), [&](const std::vector<double>& v) { return matvec_transpose(m, matvec(m, v)); }, tol);
    return std::sqrt(lambda);
}

double operator_norm(const DenseMatrix& m, double tol) {
    const double lambda = power_iteration_max_eigenvalue(
        m.cols(), [&](const std::vector<double>& v) { return matvec_transpose(m, matvec(m, v)); }, tol);
    return std::sqrt(lambda);
}

double inverse_operator_norm(const LowerTriangularMatrix& m, double tol) {
    require_invertible(m);
    // (M^T M)^{-1} v = M^{-1} (M^{-T} v)
    const double lambda = power_iteration_max_eigenvalue(
        m.size(),
        [&](const std::vector<double>& v) { return forward_substitute(m, back_substitute_transpose(m, v)); }, tol);
    return std::sqrt(lambda);
}

double toeplitz_opnorm_bound(std::span<const double> coeffs) noexcept {
    double acc = 0.0;
    for (double q : coeffs) acc += std::abs(q);
    return acc;
}

double sqrt_opnorm_bound(const ToeplitzSpec& spec) {
    const double coeff_sum = toeplitz_opnorm_bound(spec.sqrt_coeffs());
    const double n = static_cast<double>(spec.n());
    const double closed_form = spec.alpha() == 1.0
                                   ? (2.0 * std::sqrt(n) - 1.0) / (1.0 - spec.beta())
                                   : 1.0 / ((1.0 - spec.beta() / spec.alpha()) * (1.0 - spec.alpha()));
    return std::min(coeff_sum, closed_form);
}

double inv_sqrt_opnorm_bound(const ToeplitzSpec& spec) { return toeplitz_opnorm_bound(spec.inv_sqrt_coeffs()); }

double condition_upper_bound(const ToeplitzSpec& spec) {
    if (spec.n() < 2) throw ParameterError("condition_upper_bound requires n > 1");
    return sqrt_opnorm_bound(spec) * inv_sqrt_opnorm_bound(spec);
}

} // namespace binstream
