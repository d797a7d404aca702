#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace binstream {

class ToeplitzSpec;

/**
 * Dense lower-triangular n x n matrix. Rows are stored back to back in
 * row-major order and only the entries on or below the diagonal are kept,
 * so row i (0-based) is a contiguous span of length i + 1.
 */
class LowerTriangularMatrix {
public:
    LowerTriangularMatrix() = default;
    explicit LowerTriangularMatrix(std::size_t n);

    static LowerTriangularMatrix identity(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    /// Entry (i, j), 0-based; zero above the diagonal.
    double operator()(std::size_t i, std::size_t j) const noexcept {
        return j > i ? 0.0 : data_[offset(i) + j];
    }
    /// Mutable entry (i, j); throws DimensionError when j > i or i >= n.
    double& at(std::size_t i, std::size_t j);

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + offset(i), i + 1}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + offset(i), i + 1}; }

    friend bool operator==(const LowerTriangularMatrix&, const LowerTriangularMatrix&) = default;

private:
    static std::size_t offset(std::size_t i) noexcept { return i * (i + 1) / 2; }

    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// General dense rows x cols matrix, row-major. Used for factorizations whose
/// factors are not square (the binary-tree mechanism).
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Construction ---------------------------------------------------------------

/// Lower-triangular Toeplitz matrix with entries(i, j) = coeff(i - j) for i >= j.
LowerTriangularMatrix build_toeplitz(std::size_t n, const std::function<double(std::size_t)>& coeff);
/// Same, from an explicit coefficient prefix; coeffs.size() must be >= n.
LowerTriangularMatrix build_toeplitz(std::size_t n, std::span<const double> coeffs);

DenseMatrix to_dense(const LowerTriangularMatrix& m);

// Products and solves ---------------------------------------------------------

std::vector<double> matvec(const LowerTriangularMatrix& m, std::span<const double> z);
std::vector<double> matvec(const DenseMatrix& m, std::span<const double> z);
std::vector<double> matvec_transpose(const LowerTriangularMatrix& m, std::span<const double> z);

LowerTriangularMatrix multiply(const LowerTriangularMatrix& lhs, const LowerTriangularMatrix& rhs);
DenseMatrix multiply(const DenseMatrix& lhs, const DenseMatrix& rhs);

/// Solves L X = Y for X by row-oriented forward substitution. Throws
/// NumericError if L has a zero on its diagonal.
LowerTriangularMatrix forward_substitute(const LowerTriangularMatrix& l, const LowerTriangularMatrix& y);

/// Solves L x = y for a single right-hand side.
std::vector<double> forward_substitute(const LowerTriangularMatrix& l, std::span<const double> y);

/// Solves L^T x = y.
std::vector<double> back_substitute_transpose(const LowerTriangularMatrix& l, std::span<const double> y);

// Norms -------------------------------------------------------------------------

double frobenius_norm(const LowerTriangularMatrix& m);
/// ||M||_{2->inf}: largest row 2-norm.
double row_max_norm(const LowerTriangularMatrix& m);
/// ||M||_{1->2}: largest column 2-norm. This is the sensitivity of a right factor.
double col_max_norm(const LowerTriangularMatrix& m);

double frobenius_norm(const DenseMatrix& m);
double row_max_norm(const DenseMatrix& m);
double col_max_norm(const DenseMatrix& m);

/// Largest absolute entrywise difference; both matrices must have equal size.
double max_abs_diff(const LowerTriangularMatrix& a, const LowerTriangularMatrix& b);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double max_abs(const LowerTriangularMatrix& m);

inline constexpr double kDefaultPowerTol = 1e-8;
inline constexpr std::size_t kPowerIterationCap = 100000;

/// Spectral norm via power iteration on M^T M with a fixed-seed start vector.
/// Throws NumericError if the relative change does not fall below tol within
/// kPowerIterationCap iterations.
double operator_norm(const LowerTriangularMatrix& m, double tol = kDefaultPowerTol);
double operator_norm(const DenseMatrix& m, double tol = kDefaultPowerTol);

/// ||M^{-1}||_2 via power iteration on (M^T M)^{-1}, applied with two
/// triangular solves instead of forming the inverse.
double inverse_operator_norm(const LowerTriangularMatrix& m, double tol = kDefaultPowerTol);

// Toeplitz bounds ---------------------------------------------------------------

/// Sum of absolute subdiagonal values; an upper bound on the spectral norm of
/// the lower-triangular Toeplitz matrix they define.
double toeplitz_opnorm_bound(std::span<const double> coeffs) noexcept;

/// Upper bound on ||B_{alpha,beta}||_2: the smaller of the coefficient-sum
/// bound and the closed forms (2 sqrt(n) - 1)/(1 - beta) for alpha = 1 and
/// 1/((1 - beta/alpha)(1 - alpha)) otherwise.
double sqrt_opnorm_bound(const ToeplitzSpec& spec);

/// Upper bound on ||B_{alpha,beta}^{-1}||_2 as the coefficient sum of |s_k|.
double inv_sqrt_opnorm_bound(const ToeplitzSpec& spec);

/// kappa_bar = sqrt_opnorm_bound * inv_sqrt_opnorm_bound >= kappa(B_{alpha,beta}).
/// Requires n > 1.
double condition_upper_bound(const ToeplitzSpec& spec);

} // namespace binstream
