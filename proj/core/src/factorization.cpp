#include "binstream/factorization.hpp"

#include "binstream/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace binstream {

std::string to_string(Method m) {
    switch (m) {
    case Method::binned: return "binned";
    case Method::sqrt: return "sqrt";
    case Method::binary: return "binary";
    case Method::identity: return "identity";
    }
    return "unknown";
}

LowerTriangularMatrix right_factor(const LowerTriangularMatrix& lhat, const LowerTriangularMatrix& product) {
    return forward_substitute(lhat, product);
}

LowerTriangularMatrix right_factor(const BinnedMatrixView& lhat, const LowerTriangularMatrix& product) {
    return solve_binned(lhat, product);
}

double mean_se(double frobenius_l, double sensitivity, std::size_t n) noexcept {
    return frobenius_l * frobenius_l * sensitivity * sensitivity / static_cast<double>(n);
}

double max_se(double row_max_l, double sensitivity) noexcept {
    return row_max_l * row_max_l * sensitivity * sensitivity;
}

double mean_se(const LowerTriangularMatrix& l, const LowerTriangularMatrix& r) {
    if (l.size() != r.size()) throw DimensionError("mean_se: factor dimensions differ");
    return mean_se(frobenius_norm(l), col_max_norm(r), l.size());
}

double max_se(const LowerTriangularMatrix& l, const LowerTriangularMatrix& r) {
    if (l.size() != r.size()) throw DimensionError("max_se: factor dimensions differ");
    return max_se(row_max_norm(l), col_max_norm(r));
}

double mean_se(const DenseMatrix& l, const DenseMatrix& r) {
    if (l.cols() != r.rows()) throw DimensionError("mean_se: factor dimensions differ");
    return mean_se(frobenius_norm(l), col_max_norm(r), l.rows());
}

double max_se(const DenseMatrix& l, const DenseMatrix& r) {
    if (l.cols() != r.rows()) throw DimensionError("max_se: factor dimensions differ");
    return max_se(row_max_norm(l), col_max_norm(r));
}

ErrorRatios error_ratios(const LowerTriangularMatrix& cand_l, const LowerTriangularMatrix& cand_r,
                         const LowerTriangularMatrix& base_l, const LowerTriangularMatrix& base_r) {
    if (cand_l.size() != base_l.size()) throw DimensionError("error_ratios: candidate and baseline sizes differ");
    const double base_mean = mean_se(base_l, base_r);
    const double base_max = max_se(base_l, base_r);
    if (base_mean == 0.0 || base_max == 0.0) throw NumericError("error_ratios: baseline error is zero");
    return {mean_se(cand_l, cand_r) / base_mean, max_se(cand_l, cand_r) / base_max};
}

bool verify_perturbation(const LowerTriangularMatrix& l, const LowerTriangularMatrix& lhat, double eta, double mu) {
    if (l.size() != lhat.size()) throw DimensionError("verify_perturbation: dimensions differ");
    for (std::size_t i = 0; i < l.size(); ++i) {
        auto a = l.row(i);
        auto b = lhat.row(i);
        for (std::size_t j = 0; j <= i; ++j) {
            if (std::abs(b[j] - a[j]) > eta * std::abs(a[j]) + mu) return false;
        }
    }
    return true;
}

BinningParams theorem_params(double xi, double kappa_bound, double opnorm_bound, std::size_t n) {
    if (!(xi > 0.0 && xi <= 24.0)) throw ParameterError("xi must lie in (0, 24], got " + std::to_string(xi));
    if (!(kappa_bound >= 1.0)) throw ParameterError("kappa bound must be at least 1");
    if (!(opnorm_bound > 0.0)) throw ParameterError("operator norm bound must be positive");
    if (n == 0) throw ParameterError("n must be at least 1");
    BinningParams p;
    p.c = std::exp(-xi / (576.0 * kappa_bound));
    p.tau = xi * opnorm_bound / (144.0 * static_cast<double>(n) * kappa_bound);
    p.validate();
    return p;
}

BinningParams theorem_params(double xi, const ToeplitzSpec& spec, KappaMode mode) {
    if (spec.n() == 1) return theorem_params(xi, 1.0, 1.0, 1);
    if (mode == KappaMode::exact) {
        const auto b = build_toeplitz(spec.n(), spec.sqrt_coeffs());
        const double norm = operator_norm(b);
        const double inv_norm = inverse_operator_norm(b);
        return theorem_params(xi, std::max(1.0, norm * inv_norm), norm, spec.n());
    }
    return theorem_params(xi, condition_upper_bound(spec), sqrt_opnorm_bound(spec), spec.n());
}

std::size_t binary_mechanism_space(std::size_t n) noexcept {
    return n == 0 ? 0 : static_cast<std::size_t>(std::bit_width(n));
}

std::pair<DenseMatrix, DenseMatrix> binary_mechanism_factorization(std::size_t n) {
    if (n == 0) throw ParameterError("binary mechanism requires n >= 1");
    const std::size_t levels = binary_mechanism_space(n);

    // Block (h, k) covers [k 2^h + 1, (k + 1) 2^h]; rows of R ordered by level.
    std::vector<std::size_t> level_start(levels + 1, 0);
    for (std::size_t h = 0; h < levels; ++h) level_start[h + 1] = level_start[h] + (n >> h);
    const std::size_t m = level_start[levels];

    DenseMatrix r(m, n);
    for (std::size_t h = 0; h < levels; ++h) {
        const std::size_t width = std::size_t{1} << h;
        for (std::size_t k = 0; k < (n >> h); ++k) {
            for (std::size_t j = k * width; j < (k + 1) * width; ++j) r(level_start[h] + k, j) = 1.0;
        }
    }

    DenseMatrix l(n, m);
    for (std::size_t t = 1; t <= n; ++t) {
        std::size_t start = 0;
        for (std::size_t h = levels; h-- > 0;) {
            if ((t >> h) & 1U) {
                l(t - 1, level_start[h] + (start >> h)) = 1.0;
                start += std::size_t{1} << h;
            }
        }
    }
    return {std::move(l), std::move(r)};
}

namespace {

struct SqrtBaseline {
    double frobenius = 0.0;
    double row_max = 0.0;
    double sensitivity = 0.0;
    double mean_se = 0.0;
    double max_se = 0.0;
};

// Norms of the Toeplitz square root from its coefficients: row i holds
// b_0..b_{i-1}, column j holds b_0..b_{n-j}.
SqrtBaseline sqrt_baseline(const ToeplitzSpec& spec) {
    const auto b = spec.sqrt_coeffs();
    const std::size_t n = spec.n();
    double frob_sq = 0.0;
    double full_sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        frob_sq += static_cast<double>(n - k) * b[k] * b[k];
        full_sq += b[k] * b[k];
    }
    SqrtBaseline out;
    out.frobenius = std::sqrt(frob_sq);
    out.row_max = std::sqrt(full_sq);
    out.sensitivity = std::sqrt(full_sq);
    out.mean_se = mean_se(out.frobenius, out.sensitivity, n);
    out.max_se = max_se(out.row_max, out.sensitivity);
    return out;
}

void fill_ratios(FactorizationReport& rep, const SqrtBaseline& base) {
    rep.mean_se = mean_se(rep.frobenius_L, rep.sensitivity, rep.n);
    rep.max_se = max_se(rep.row_max_L, rep.sensitivity);
    rep.mean_se_ratio = rep.mean_se / base.mean_se;
    rep.max_se_ratio = rep.max_se / base.max_se;
}

FactorizationReport report_header(Method m, const ToeplitzSpec& spec) {
    FactorizationReport rep;
    rep.method = m;
    rep.n = spec.n();
    rep.alpha = spec.alpha();
    rep.beta = spec.beta();
    return rep;
}

} // namespace

SqrtFactorization factorize_sqrt(const ToeplitzSpec& spec, const BinningParams& params) {
    auto source = toeplitz_source(spec.sqrt_coeffs());
    BinnedMatrixView view(source, build_binning(source, spec.n(), params));
    auto right = right_factor(view, build_toeplitz(spec.n(), spec.counting_coeffs()));
    return {std::move(view), std::move(right)};
}

FactorizationReport sqrt_binned_report(const ToeplitzSpec& spec, const BinningParams& params) {
    const std::size_t n = spec.n();
    auto source = toeplitz_source(spec.sqrt_coeffs());
    const BinnedMatrixView view(source, build_binning(source, n, params));
    const auto a = spec.counting_coeffs();

    std::vector<double> col_sq(n, 0.0);
    solve_binned(
        view,
        [&](std::size_t i, std::span<double> row) {
            for (std::size_t c = 1; c <= i; ++c) row[c - 1] = a[i - c];
        },
        [&](std::size_t, std::span<const double> row) {
            for (std::size_t c = 0; c < row.size(); ++c) col_sq[c] += row[c] * row[c];
        });

    auto rep = report_header(Method::binned, spec);
    rep.c = params.c;
    rep.tau = params.tau;
    rep.bin_size = space_complexity(view);
    rep.frobenius_L = frobenius_norm(view);
    rep.row_max_L = row_max_norm(view);
    rep.sensitivity = std::sqrt(*std::max_element(col_sq.begin(), col_sq.end()));
    fill_ratios(rep, sqrt_baseline(spec));
    return rep;
}

FactorizationReport sqrt_baseline_report(const ToeplitzSpec& spec) {
    const auto base = sqrt_baseline(spec);
    auto rep = report_header(Method::sqrt, spec);
    rep.bin_size = spec.n();
    rep.frobenius_L = base.frobenius;
    rep.row_max_L = base.row_max;
    rep.sensitivity = base.sensitivity;
    fill_ratios(rep, base);
    return rep;
}

FactorizationReport identity_baseline_report(const ToeplitzSpec& spec) {
    const auto a = spec.counting_coeffs();
    double col_sq = 0.0;
    for (double v : a) col_sq += v * v;
    auto rep = report_header(Method::identity, spec);
    rep.bin_size = 1;
    rep.frobenius_L = std::sqrt(static_cast<double>(spec.n()));
    rep.row_max_L = 1.0;
    rep.sensitivity = std::sqrt(col_sq);
    fill_ratios(rep, sqrt_baseline(spec));
    return rep;
}

FactorizationReport binary_baseline_report(const ToeplitzSpec& spec) {
    if (spec.alpha() != 1.0 || spec.beta() != 0.0) {
        throw ParameterError("the binary mechanism baseline is only defined for alpha = 1, beta = 0");
    }
    // Counted directly: row t of L has popcount(t) ones, leaf j sits in one
    // complete dyadic block per level whose block ends at or before n.
    const std::size_t n = spec.n();
    const std::size_t levels = binary_mechanism_space(n);
    double frob_sq = 0.0;
    double row_sq = 0.0;
    double col_sq = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
        const auto ones = static_cast<double>(std::popcount(t));
        frob_sq += ones;
        row_sq = std::max(row_sq, ones);
        std::size_t blocks = 0;
        for (std::size_t h = 0; h < levels; ++h) {
            if ((((t - 1) >> h) + 1) << h <= n) ++blocks;
        }
        col_sq = std::max(col_sq, static_cast<double>(blocks));
    }
    auto rep = report_header(Method::binary, spec);
    rep.bin_size = levels;
    rep.frobenius_L = std::sqrt(frob_sq);
    rep.row_max_L = std::sqrt(row_sq);
    rep.sensitivity = std::sqrt(col_sq);
    fill_ratios(rep, sqrt_baseline(spec));
    return rep;
}

} // namespace binstream
