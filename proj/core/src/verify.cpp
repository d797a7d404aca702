#include "binstream/verify.hpp"

#include "binstream/binned_matrix.hpp"
#include "binstream/binning.hpp"
#include "binstream/errors.hpp"
#include "binstream/factorization.hpp"
#include "binstream/matrix.hpp"
#include "binstream/mechanism.hpp"
#include "binstream/toeplitz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

namespace binstream {

namespace {

struct AlphaBeta {
    double alpha;
    double beta;
};

constexpr std::array<AlphaBeta, 4> kGrid{{{1.0, 0.0}, {1.0, 0.9}, {0.99, 0.0}, {0.99, 0.95}}};

std::string grid_label(const AlphaBeta& ab) {
    std::ostringstream os;
    os << "alpha=" << ab.alpha << " beta=" << ab.beta;
    return os.str();
}

CheckResult make(std::string suite, std::string name, double slack, std::string detail = {}) {
    return {std::move(suite), std::move(name), slack >= 0.0, slack, std::move(detail)};
}

// ---------------------------------------------------------------- kernels

void kernels_suite(std::vector<CheckResult>& out) {
    constexpr std::size_t kMax = 10000;
    const double pi = std::acos(-1.0);

    double slack = std::numeric_limits<double>::infinity();
    double slack_prime = slack;
    for (std::size_t k = 1; k <= kMax; ++k) {
        const double kd = static_cast<double>(k);
        const double g = gamma(k);
        slack = std::min({slack, (g - 1.0 / (2.0 * std::sqrt(kd))) / g, (1.0 / std::sqrt(pi * kd) - g) / g});
        const double gp = gamma_prime(k);
        const double lo = -1.0 / (std::sqrt(pi * kd) * (2.0 * kd - 1.0));
        const double hi = -1.0 / (2.0 * std::sqrt(kd) * (2.0 * kd - 1.0));
        slack_prime = std::min({slack_prime, (gp - lo) / std::abs(gp), (hi - gp) / std::abs(gp)});
    }
    out.push_back(make("kernels", "gamma bounds for k <= 10^4", slack, "relative margin"));
    out.push_back(make("kernels", "gamma' bounds for k <= 10^4", slack_prime, "relative margin"));

    for (const auto& ab : kGrid) {
        const ToeplitzSpec spec(ab.alpha, ab.beta, kMax);
        const auto b = spec.sqrt_coeffs();
        double bound_slack = std::numeric_limits<double>::infinity();
        double mono_slack = bound_slack;
        for (std::size_t j = 0; j < kMax; ++j) {
            const double aj = std::pow(ab.alpha, static_cast<double>(j));
            const double root = std::sqrt(static_cast<double>(j + 1));
            const double lo = aj / (2.0 * root);
            const double hi = aj / ((1.0 - ab.beta / ab.alpha) * root);
            bound_slack = std::min({bound_slack, (b[j] - lo) / b[j], (hi - b[j]) / b[j]});
            if (j > 0) mono_slack = std::min(mono_slack, b[j - 1] - b[j]);
        }
        out.push_back(make("kernels", "b_j bounds, " + grid_label(ab), bound_slack, "relative margin"));
        out.push_back(make("kernels", "b_j nonincreasing, " + grid_label(ab), mono_slack, "min b_{j-1} - b_j"));

        const ToeplitzSpec small(ab.alpha, ab.beta, 256);
        const auto bs = small.sqrt_coeffs();
        const auto s = small.inv_sqrt_coeffs();
        double worst = 0.0;
        for (std::size_t k = 0; k < 256; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i <= k; ++i) acc += s[i] * bs[k - i];
            worst = std::max(worst, std::abs(acc - (k == 0 ? 1.0 : 0.0)));
        }
        out.push_back(make("kernels", "s * b = impulse, " + grid_label(ab), 1e-10 - worst, "abs error vs 1e-10"));

        const ToeplitzSpec mid(ab.alpha, ab.beta, 128);
        const auto bm = build_toeplitz(128, mid.sqrt_coeffs());
        const auto am = build_toeplitz(128, mid.counting_coeffs());
        out.push_back(make("kernels", "B^2 = A (n=128), " + grid_label(ab), 1e-9 - max_abs_diff(multiply(bm, bm), am),
                           "max-entry error vs 1e-9"));
    }
}

// ---------------------------------------------------------------- binning

void binning_suite(std::vector<CheckResult>& out) {
    {
        const ToeplitzSpec spec(1.0, 0.0, 5);
        const auto bin = build_binning(toeplitz_source(spec.sqrt_coeffs()), 5, {0.75, 0.01});
        const Partition expected{{1, 2}, {3, 3}, {4, 4}, {5, 5}};
        const bool ok = bin[5] == expected && bin[4] == Partition{{1, 1}, {2, 2}, {3, 3}, {4, 4}};
        out.push_back(make("binning", "hand trace n=5 c=0.75 tau=0.01", ok ? 0.0 : -1.0, format_partition(bin[5])));
    }
    {
        const ToeplitzSpec spec(1.0, 0.0, 3);
        const auto bin = build_binning(toeplitz_source(spec.sqrt_coeffs()), 3, {0.5, 0.01});
        const bool ok = bin.size() == 3 && bin[3] == Partition{{1, 1}, {2, 2}, {3, 3}};
        out.push_back(make("binning", "ties at c do not merge (n=3 c=0.5)", ok ? 0.0 : -1.0, format_partition(bin[3])));
    }
    {
        const ToeplitzSpec spec(1.0, 0.0, 50);
        const auto bin = build_binning(toeplitz_source(spec.sqrt_coeffs()), 50, {0.75, 0.02});
        out.push_back(make("binning", "|B| = 8 for n=50 c=0.75 tau=0.02", bin.size() == 8 ? 0.0 : -1.0,
                           "|B| = " + std::to_string(bin.size())));
    }

    const std::array<double, 4> cs{0.5, 0.75, 0.9, 0.95};
    const std::array<double, 4> taus{0.1, 0.01, 1e-3, 1e-6};
    bool all_valid = true;
    double ratio_slack = std::numeric_limits<double>::infinity();
    double space_slack = ratio_slack;
    for (const std::size_t n : {64UL, 256UL}) {
        for (const auto& ab : kGrid) {
            const ToeplitzSpec spec(ab.alpha, ab.beta, n);
            const auto coeffs = spec.sqrt_coeffs();
            const auto src = toeplitz_source(coeffs);
            const double min_entry = coeffs[n - 1];
            for (double c : cs) {
                for (double tau : taus) {
                    const auto bin = build_binning(src, n, {c, tau});
                    all_valid = all_valid && verify_binning(bin);
                    for (std::size_t i = 1; i <= n; ++i) {
                        for (const auto& iv : bin[i]) {
                            if (iv.b < i && coeffs[i - iv.b] > tau) {
                                ratio_slack = std::min(ratio_slack, coeffs[i - iv.a] / coeffs[i - iv.b] - c * c);
                            }
                        }
                    }
                    const double drops = std::min(std::log(1.0 / tau), std::log(1.0 / min_entry)) / std::log(1.0 / c);
                    space_slack = std::min(space_slack, 2.0 * drops + 2.0 - static_cast<double>(bin.size()));
                }
            }
        }
    }
    out.push_back(make("binning", "greedy output is a valid binning (MRM grid)", all_valid ? 0.0 : -1.0));
    out.push_back(make("binning", "interval endpoint ratio >= c^2 above tau", ratio_slack, "min ratio - c^2"));
    out.push_back(make("binning", "|B| <= 2 log(1/tau)/log(1/c) + 2", space_slack, "intervals to spare"));

    // Arbitrary positive (non-MRM) matrices still yield valid binnings.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.001, 1.0);
    bool random_valid = true;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 40 + static_cast<std::size_t>(trial) * 3;
        LowerTriangularMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : m.row(i)) v = unif(rng);
        }
        const auto bin = build_binning(matrix_source(m), n, {0.3 + 0.03 * trial, 0.05});
        random_valid = random_valid && verify_binning(bin);
    }
    out.push_back(make("binning", "greedy output valid on random positive matrices", random_valid ? 0.0 : -1.0));

    bool mrm = true;
    for (const auto& ab : kGrid) {
        const ToeplitzSpec spec(ab.alpha, ab.beta, 64);
        mrm = mrm && is_mrm(build_toeplitz(64, spec.sqrt_coeffs()));
    }
    out.push_back(make("binning", "B_{alpha,beta} is a monotone ratio matrix (n=64)", mrm ? 0.0 : -1.0));
}

// ----------------------------------------------------------- perturbation

void perturbation_suite(std::vector<CheckResult>& out) {
    double entry_slack = std::numeric_limits<double>::infinity();
    double frob_slack = entry_slack;
    double row_slack = entry_slack;
    double reconstruction_slack = entry_slack;
    for (const std::size_t n : {64UL, 256UL}) {
        for (const auto& ab : kGrid) {
            const ToeplitzSpec spec(ab.alpha, ab.beta, n);
            const auto b = build_toeplitz(n, spec.sqrt_coeffs());
            const auto a = build_toeplitz(n, spec.counting_coeffs());
            for (double c : {0.5, 0.75, 0.9, 0.99}) {
                for (double tau : {1e-3, 1.0 / static_cast<double>(n), 0.05}) {
                    const double eta = 1.0 / (c * c) - 1.0;
                    const auto fac = factorize_sqrt(spec, {c, tau});
                    const auto lhat = materialize(fac.left);
                    for (std::size_t i = 0; i < n; ++i) {
                        for (std::size_t j = 0; j <= i; ++j) {
                            entry_slack = std::min(entry_slack, eta * b(i, j) + tau - std::abs(lhat(i, j) - b(i, j)));
                        }
                    }
                    const double nd = static_cast<double>(n);
                    frob_slack = std::min(frob_slack, (1 + eta) * frobenius_norm(b) + tau * nd - frobenius_norm(lhat));
                    row_slack =
                        std::min(row_slack, (1 + eta) * row_max_norm(b) + tau * std::sqrt(nd) - row_max_norm(lhat));
                    const auto resid = max_abs_diff(multiply(lhat, fac.right), a);
                    reconstruction_slack = std::min(reconstruction_slack, 1e-8 * nd - resid);
                }
            }
        }
    }
    out.push_back(make("perturbation", "(1/c^2 - 1, tau)-perturbation entrywise", entry_slack, "min margin"));
    out.push_back(make("perturbation", "Frobenius norm of perturbation", frob_slack, "min margin"));
    out.push_back(make("perturbation", "max row norm of perturbation", row_slack, "min margin"));
    out.push_back(make("perturbation", "L_hat R_hat = A within 1e-8 n", reconstruction_slack, "min margin"));

    // Operator-norm and sensitivity lemmas at n = 64 with power iteration.
    double op_slack = std::numeric_limits<double>::infinity();
    double sens_slack = op_slack;
    std::size_t sens_cases = 0;
    for (const auto& ab : kGrid) {
        constexpr std::size_t n = 64;
        const ToeplitzSpec spec(ab.alpha, ab.beta, n);
        const auto b = build_toeplitz(n, spec.sqrt_coeffs());
        const double b_norm = operator_norm(b);
        const double b_inv_norm = inverse_operator_norm(b);
        const double sens_b = col_max_norm(b);
        for (double c : {0.75, 0.9, 0.99}) {
            const double tau = 1.0 / static_cast<double>(n);
            const double eta = 1.0 / (c * c) - 1.0;
            const auto fac = factorize_sqrt(spec, {c, tau});
            const auto lhat = materialize(fac.left);
            LowerTriangularMatrix p(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j <= i; ++j) p.at(i, j) = lhat(i, j) - b(i, j);
            }
            const double p_norm = operator_norm(p);
            op_slack = std::min(op_slack, eta * b_norm + tau * static_cast<double>(n) - p_norm);
            if (p_norm * b_inv_norm <= 0.5) {
                ++sens_cases;
                // 1e-12 relative floor: with P = 0 both sides agree only to rounding.
                sens_slack = std::min(sens_slack, (1.0 + 2.0 * p_norm * b_inv_norm + 1e-12) * sens_b -
                                                      col_max_norm(fac.right));
            }
        }
    }
    out.push_back(make("perturbation", "||P||_2 <= eta ||L||_2 + mu n", op_slack, "min margin"));
    out.push_back(make("perturbation", "sensitivity blow-up bound", sens_cases == 0 ? 0.0 : sens_slack,
                       std::to_string(sens_cases) + " cases met the ||L^-1|| ||P|| <= 1/2 hypothesis"));

    double thm_slack = std::numeric_limits<double>::infinity();
    for (const auto& ab : kGrid) {
        const ToeplitzSpec spec(ab.alpha, ab.beta, 128);
        const auto rep = sqrt_binned_report(spec, theorem_params(0.5, spec));
        thm_slack = std::min({thm_slack, 1.5 - rep.mean_se_ratio, 1.5 - rep.max_se_ratio});
    }
    out.push_back(make("perturbation", "theorem parameters, xi=0.5, n=128: ratios <= 1.5", thm_slack, "min margin"));
}

// -------------------------------------------------------------- streaming

void streaming_suite(std::vector<CheckResult>& out) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    double rel_slack = std::numeric_limits<double>::infinity();
    bool peak_ok = true;
    bool online_ok = true;
    for (const auto& ab : kGrid) {
        constexpr std::size_t n = 256;
        const ToeplitzSpec spec(ab.alpha, ab.beta, n);
        const auto src = toeplitz_source(spec.sqrt_coeffs());
        for (double c : {0.5, 0.9}) {
            const BinningParams params{c, 1.0 / static_cast<double>(n)};
            const BinnedMatrixView view(src, build_binning(src, n, params));
            const auto dense = materialize(view);
            for (int rep = 0; rep < 5; ++rep) {
                std::vector<double> z(n);
                for (auto& v : z) v = normal(rng);
                const auto expected = matvec(dense, z);
                BinnedStreamEvaluator replay(view);
                BinnedStreamEvaluator online(src, n, params);
                double err = 0.0;
                double scale = 0.0;
                for (std::size_t t = 0; t < n; ++t) {
                    const double got = replay.push(z[t]);
                    online_ok = online_ok && online.push(z[t]) == got;
                    err = std::max(err, std::abs(got - expected[t]));
                    scale = std::max(scale, std::abs(expected[t]));
                }
                rel_slack = std::min(rel_slack, 1e-10 - err / scale);
                peak_ok = peak_ok && replay.peak_buffer() == space_complexity(view) &&
                          online.peak_buffer() == space_complexity(view);
            }
        }
    }
    out.push_back(make("streaming", "streamed L_hat z equals dense product", rel_slack, "relative error vs 1e-10"));
    out.push_back(make("streaming", "peak buffer equals |B|", peak_ok ? 0.0 : -1.0));
    out.push_back(make("streaming", "online binning matches replayed binning", online_ok ? 0.0 : -1.0));

    const ToeplitzSpec spec(1.0, 0.0, 64);
    const auto src = toeplitz_source(spec.sqrt_coeffs());
    PrivateCounter counter(src, 64, {0.75, 1.0 / 64}, 0.0, {0.5, 1e-6, 1});
    bool exact = true;
    double prefix = 0.0;
    for (std::size_t t = 0; t < 64; ++t) {
        const double x = (t % 3 == 0) ? 1.0 : 0.0;
        prefix += x;
        exact = exact && counter.push(x).noisy_prefix == prefix;
    }
    out.push_back(make("streaming", "zero sensitivity releases exact prefix sums", exact ? 0.0 : -1.0));
}

} // namespace

const std::vector<std::string>& verify_suite_names() {
    static const std::vector<std::string> names{"kernels", "binning", "perturbation", "streaming"};
    return names;
}

std::vector<CheckResult> run_verify_suite(std::string_view suite) {
    std::vector<CheckResult> out;
    const bool all = suite == "all";
    bool known = all;
    if (all || suite == "kernels") {
        known = true;
        kernels_suite(out);
    }
    if (all || suite == "binning") {
        known = true;
        binning_suite(out);
    }
    if (all || suite == "perturbation") {
        known = true;
        perturbation_suite(out);
    }
    if (all || suite == "streaming") {
        known = true;
        streaming_suite(out);
    }
    if (!known) throw ParameterError("unknown verify suite '" + std::string(suite) + "'");
    return out;
}

} // namespace binstream
