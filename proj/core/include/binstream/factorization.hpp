#pragma once

#include "binstream/binned_matrix.hpp"
#include "binstream/binning.hpp"
#include "binstream/matrix.hpp"
#include "binstream/toeplitz.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>

namespace binstream {

/// Which factorization a report describes.
enum class Method { binned, sqrt, binary, identity };

std::string to_string(Method m);

/**
 * Exact error figures of a factorization A_{alpha,beta} = L R with the
 * privacy constant normalized to 1. Ratios are against the unbinned
 * square-root factorization L = R = B_{alpha,beta} of the same size.
 */
struct FactorizationReport {
    Method method = Method::binned;
    std::size_t n = 0;
    double alpha = 1.0;
    double beta = 0.0;
    std::optional<double> c;
    std::optional<double> tau;
    std::size_t bin_size = 0;
    double frobenius_L = 0.0;
    double row_max_L = 0.0;
    double sensitivity = 0.0;
    double mean_se = 0.0;
    double max_se = 0.0;
    double mean_se_ratio = 1.0;
    double max_se_ratio = 1.0;
};

/// R_hat = L_hat^{-1} (L R) by dense forward substitution.
LowerTriangularMatrix right_factor(const LowerTriangularMatrix& lhat, const LowerTriangularMatrix& product);
/// Same, exploiting the binned structure of L_hat (see solve_binned).
LowerTriangularMatrix right_factor(const BinnedMatrixView& lhat, const LowerTriangularMatrix& product);

/// ||L||_F^2 ||R||_{1->2}^2 / rows(L)
double mean_se(double frobenius_l, double sensitivity, std::size_t n) noexcept;
/// ||L||_{2->inf}^2 ||R||_{1->2}^2
double max_se(double row_max_l, double sensitivity) noexcept;

double mean_se(const LowerTriangularMatrix& l, const LowerTriangularMatrix& r);
double max_se(const LowerTriangularMatrix& l, const LowerTriangularMatrix& r);
double mean_se(const DenseMatrix& l, const DenseMatrix& r);
double max_se(const DenseMatrix& l, const DenseMatrix& r);

struct ErrorRatios {
    double mean = 1.0;
    double max = 1.0;
};

/// MeanSE and MaxSE of the candidate divided by those of the baseline.
/// Throws NumericError if the baseline error is zero.
ErrorRatios error_ratios(const LowerTriangularMatrix& cand_l, const LowerTriangularMatrix& cand_r,
                         const LowerTriangularMatrix& base_l, const LowerTriangularMatrix& base_r);

/// True iff |Lhat(i,j) - L(i,j)| <= eta |L(i,j)| + mu for every entry.
bool verify_perturbation(const LowerTriangularMatrix& l, const LowerTriangularMatrix& lhat, double eta, double mu);

/**
 * Binning parameters that guarantee a (1 + xi) error blow-up for an MRM
 * left factor: c = exp(-xi / (576 kappa)), tau = xi ||L||_2 / (144 n kappa).
 * Any kappa_bound >= kappa(L) keeps the guarantee as long as
 * opnorm_bound / kappa_bound does not exceed 1 / ||L^{-1}||_2.
 * Throws ParameterError unless 0 < xi <= 24 and kappa_bound >= 1.
 */
BinningParams theorem_params(double xi, double kappa_bound, double opnorm_bound, std::size_t n);

enum class KappaMode { bound, exact };

/// theorem_params for L = B_{alpha,beta}. KappaMode::bound uses
/// condition_upper_bound; KappaMode::exact uses power iteration on B and B^{-1}.
BinningParams theorem_params(double xi, const ToeplitzSpec& spec, KappaMode mode = KappaMode::bound);

/**
 * Binary-tree factorization of the all-ones lower-triangular n x n matrix.
 * R (m x n) has one indicator row per complete dyadic block of [1, n];
 * L (n x m) row t selects the blocks of the binary decomposition of [1, t].
 */
std::pair<DenseMatrix, DenseMatrix> binary_mechanism_factorization(std::size_t n);

/// Number of dyadic levels, floor(log2 n) + 1: streaming memory of the
/// binary mechanism.
std::size_t binary_mechanism_space(std::size_t n) noexcept;

/// Binned approximation of B_{alpha,beta} together with its right factor.
struct SqrtFactorization {
    BinnedMatrixView left;
    LowerTriangularMatrix right;
};

/// Builds L_hat from the greedy binning of B_{alpha,beta} and the dense
/// R_hat = L_hat^{-1} A_{alpha,beta}.
SqrtFactorization factorize_sqrt(const ToeplitzSpec& spec, const BinningParams& params);

/// Report for the binned square-root factorization. Computes R_hat row by
/// row without storing it; memory O(n |B|) beyond the coefficient caches.
FactorizationReport sqrt_binned_report(const ToeplitzSpec& spec, const BinningParams& params);

/// Report for L = R = B_{alpha,beta}; ratios are 1 by definition.
FactorizationReport sqrt_baseline_report(const ToeplitzSpec& spec);

/// Report for L = I, R = A_{alpha,beta}.
FactorizationReport identity_baseline_report(const ToeplitzSpec& spec);

/// Report for the binary-tree mechanism; only defined for alpha = 1, beta = 0.
FactorizationReport binary_baseline_report(const ToeplitzSpec& spec);

} // namespace binstream
