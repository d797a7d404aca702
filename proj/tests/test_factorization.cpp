#include "binstream/binned_matrix.hpp"
#include "binstream/errors.hpp"
#include "binstream/factorization.hpp"
#include "binstream/matrix.hpp"
#include "binstream/toeplitz.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>

using namespace binstream;
using doctest::Approx;

namespace {

LowerTriangularMatrix ones(std::size_t n) {
    return build_toeplitz(n, [](std::size_t) { return 1.0; });
}

LowerTriangularMatrix bennett(std::size_t n) {
    const ToeplitzSpec spec(1.0, 0.0, n);
    return build_toeplitz(n, spec.sqrt_coeffs());
}

} // namespace

TEST_CASE("right_factor") {
    CHECK(max_abs_diff(right_factor(bennett(6), ones(6)), bennett(6)) <= 1e-14);
    CHECK(max_abs_diff(right_factor(LowerTriangularMatrix::identity(6), ones(6)), ones(6)) == 0.0);

    const ToeplitzSpec spec(1.0, 0.0, 256);
    const auto fac = factorize_sqrt(spec, {0.9, 1.0 / 256});
    const auto lhat = materialize(fac.left);
    CHECK(max_abs_diff(multiply(lhat, fac.right), ones(256)) <= 1e-8);
    CHECK(max_abs_diff(right_factor(fac.left, ones(256)), right_factor(lhat, ones(256))) <= 1e-10);
}

TEST_CASE("mean_se and max_se") {
    const auto id = LowerTriangularMatrix::identity(4);
    CHECK(mean_se(id, id) == 1.0);
    CHECK(max_se(id, id) == 1.0);
    CHECK(mean_se(bennett(2), bennett(2)) == Approx(1.40625));
    CHECK(max_se(ones(3), LowerTriangularMatrix::identity(3)) == Approx(3.0));
    CHECK(mean_se(2.0, 3.0, 4) == Approx(9.0));
    CHECK(max_se(2.0, 3.0) == Approx(36.0));
    CHECK_THROWS_AS(mean_se(ones(2), ones(3)), DimensionError);
}

TEST_CASE("error_ratios") {
    const auto b = bennett(10);
    const auto r = error_ratios(b, b, b, b);
    CHECK(r.mean == 1.0);
    CHECK(r.max == 1.0);

    const ToeplitzSpec spec(1.0, 0.0, 50);
    const auto fac = factorize_sqrt(spec, {0.75, 0.02});
    const auto ref = error_ratios(materialize(fac.left), fac.right, bennett(50), bennett(50));
    CHECK(ref.mean == Approx(0.9965).epsilon(0.0005 / 0.9965));
    CHECK(ref.max == Approx(0.9951).epsilon(0.0005 / 0.9951));

    CHECK_THROWS_AS(error_ratios(b, b, b, LowerTriangularMatrix(10)), NumericError);
}

TEST_CASE("verify_perturbation") {
    const auto b = bennett(20);
    CHECK(verify_perturbation(b, b, 0.0, 0.0));
    const ToeplitzSpec spec(1.0, 0.0, 20);
    const auto lhat = materialize(factorize_sqrt(spec, {0.8, 0.01}).left);
    CHECK(verify_perturbation(b, lhat, 1 / 0.64 - 1, 0.01));

    auto broken = b;
    const double eta = 0.1;
    const double mu = 0.01;
    broken.at(10, 3) += 2 * eta * b(10, 3) + 2 * mu;
    CHECK_FALSE(verify_perturbation(b, broken, eta, mu));
}

TEST_CASE("theorem_params") {
    const auto p = theorem_params(24.0, 1.0, 1.0, 10);
    CHECK(p.c == Approx(std::exp(-1.0 / 24.0)));
    CHECK(p.c == Approx(0.9592).epsilon(1e-4));
    CHECK(p.tau == Approx(24.0 / 1440.0));

    const auto tiny = theorem_params(1e-6, 3.0, 2.0, 100);
    CHECK(tiny.c > 0.999999);
    CHECK(tiny.tau < 1e-8);

    CHECK_THROWS_AS(theorem_params(0.0, 2.0, 1.0, 10), ParameterError);
    CHECK_THROWS_AS(theorem_params(25.0, 2.0, 1.0, 10), ParameterError);
    CHECK_THROWS_AS(theorem_params(1.0, 0.5, 1.0, 10), ParameterError);

    const ToeplitzSpec spec(1.0, 0.0, 128);
    const auto rep = sqrt_binned_report(spec, theorem_params(0.5, spec));
    CHECK(rep.mean_se_ratio <= 1.5);
    CHECK(rep.max_se_ratio <= 1.5);
    const auto exact = theorem_params(0.5, spec, KappaMode::exact);
    CHECK(exact.c <= theorem_params(0.5, spec).c);
    CHECK_NOTHROW(theorem_params(0.5, ToeplitzSpec(1.0, 0.0, 1)));
}

TEST_CASE("binary mechanism") {
    auto [l1, r1] = binary_mechanism_factorization(1);
    CHECK(l1.rows() == 1);
    CHECK(l1.cols() == 1);
    CHECK(l1(0, 0) == 1.0);
    CHECK(r1(0, 0) == 1.0);

    auto [l2, r2] = binary_mechanism_factorization(2);
    CHECK(col_max_norm(r2) == Approx(std::sqrt(2.0)));

    for (std::size_t n : {4UL, 16UL, 100UL}) {
        auto [l, r] = binary_mechanism_factorization(n);
        CHECK(max_abs_diff(multiply(l, r), to_dense(ones(n))) == 0.0);
    }
    CHECK(binary_mechanism_space(1) == 1);
    CHECK(binary_mechanism_space(4096) == 13);
    CHECK(binary_mechanism_space(100) == 7);
}

TEST_CASE("closed-form binary report matches the dense factorization") {
    for (std::size_t n : {1UL, 7UL, 64UL, 100UL}) {
        const ToeplitzSpec spec(1.0, 0.0, n);
        const auto rep = binary_baseline_report(spec);
        auto [l, r] = binary_mechanism_factorization(n);
        CHECK(rep.mean_se == Approx(mean_se(l, r)).epsilon(1e-12));
        CHECK(rep.max_se == Approx(max_se(l, r)).epsilon(1e-12));
        CHECK(rep.bin_size == binary_mechanism_space(n));
    }
    CHECK_THROWS_AS(binary_baseline_report(ToeplitzSpec(1.0, 0.5, 8)), ParameterError);
}

TEST_CASE("baseline reports match dense evaluation") {
    const ToeplitzSpec spec(0.99, 0.9, 60);
    const auto b = build_toeplitz(60, spec.sqrt_coeffs());
    const auto a = build_toeplitz(60, spec.counting_coeffs());
    const auto sq = sqrt_baseline_report(spec);
    CHECK(sq.mean_se == Approx(mean_se(b, b)).epsilon(1e-12));
    CHECK(sq.max_se == Approx(max_se(b, b)).epsilon(1e-12));
    CHECK(sq.mean_se_ratio == 1.0);
    CHECK(sq.bin_size == 60);

    const auto id = identity_baseline_report(spec);
    const auto eye = LowerTriangularMatrix::identity(60);
    CHECK(id.mean_se == Approx(mean_se(eye, a)).epsilon(1e-12));
    CHECK(id.max_se == Approx(max_se(eye, a)).epsilon(1e-12));
    CHECK(id.mean_se_ratio == Approx(mean_se(eye, a) / mean_se(b, b)).epsilon(1e-12));
    CHECK(id.bin_size == 1);
}

TEST_CASE("streamed report matches the dense route") {
    for (auto [alpha, beta] : {std::pair{1.0, 0.0}, {0.99, 0.95}, {1.0, 0.5}}) {
        const ToeplitzSpec spec(alpha, beta, 90);
        const BinningParams params{0.8, 0.01};
        const auto rep = sqrt_binned_report(spec, params);
        const auto fac = factorize_sqrt(spec, params);
        const auto lhat = materialize(fac.left);
        const auto b = build_toeplitz(90, spec.sqrt_coeffs());
        const auto dense = error_ratios(lhat, fac.right, b, b);
        CHECK(rep.mean_se_ratio == Approx(dense.mean).epsilon(1e-12));
        CHECK(rep.max_se_ratio == Approx(dense.max).epsilon(1e-12));
        CHECK(rep.sensitivity == Approx(col_max_norm(fac.right)).epsilon(1e-12));
        CHECK(rep.bin_size == space_complexity(fac.left));
        REQUIRE(rep.c.has_value());
        CHECK(*rep.c == 0.8);
    }
}

// Reference values from an independent dense implementation of the greedy
// binning and of the square-root kernels.
TEST_CASE("reference factorizations") {
    struct Case {
        std::size_t n;
        double alpha, beta, c, tau;
        std::size_t bins;
        double mean, max;
    };
    const Case cases[] = {
        {50, 1.0, 0.0, 0.75, 0.02, 8, 0.99650264563037, 0.995138873386339},
        {50, 1.0, 0.95, 0.9, 0.02, 8, 0.9944987644827665, 0.9947214404053377},
        {50, 0.99, 0.0, 0.7, 0.02, 8, 1.0152085637597605, 1.0256065499189289},
        {50, 1.0, 0.9, 0.85, 0.02, 8, 0.9965196896443335, 0.9974365603741299},
        {50, 1.0, 0.5, 0.76, 0.02, 8, 0.9955962755639248, 0.9976989995221145},
        {1024, 1.0, 0.0, 0.9, 1.0 / 1024, 28, 0.9985392451750705, 0.9983555635991307},
        {16, 1.0, 0.0, 1e-6, 1e-6, 2, 1.0580165781297397, 1.2236539101118467},
    };
    for (const auto& cs : cases) {
        CAPTURE(cs.n);
        CAPTURE(cs.alpha);
        CAPTURE(cs.beta);
        CAPTURE(cs.c);
        const auto rep = sqrt_binned_report(ToeplitzSpec(cs.alpha, cs.beta, cs.n), {cs.c, cs.tau});
        CHECK(rep.bin_size == cs.bins);
        CHECK(rep.mean_se_ratio == Approx(cs.mean).epsilon(1e-9));
        CHECK(rep.max_se_ratio == Approx(cs.max).epsilon(1e-9));
    }
}

TEST_CASE("c close to one leaves the square root untouched") {
    const auto rep = sqrt_binned_report(ToeplitzSpec(1.0, 0.0, 16), {0.999999, 1e-6});
    CHECK(rep.bin_size == 16);
    CHECK(rep.mean_se_ratio == Approx(1.0).epsilon(1e-12));
    CHECK(rep.max_se_ratio == Approx(1.0).epsilon(1e-12));
}
