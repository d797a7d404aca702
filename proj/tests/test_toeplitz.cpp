#include "binstream/errors.hpp"
#include "binstream/toeplitz.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace binstream;
using doctest::Approx;

TEST_CASE("gamma values") {
    CHECK(binstream::gamma(0) == 1.0);
    CHECK(binstream::gamma(1) == 0.5);
    CHECK(binstream::gamma(2) == 0.375);
    CHECK(binstream::gamma(4) == 0.2734375);
    // binom(40,20) / 4^20
    CHECK(binstream::gamma(20) == Approx(137846528820.0 / std::pow(4.0, 20)).epsilon(1e-14));
}

TEST_CASE("gamma_prime values") {
    CHECK(binstream::gamma_prime(0) == 1.0);
    CHECK(binstream::gamma_prime(1) == -0.5);
    CHECK(binstream::gamma_prime(2) == -0.125);
    for (std::size_t k = 1; k < 50; ++k) CHECK(binstream::gamma_prime(k) == Approx(binstream::gamma(k) - binstream::gamma(k - 1)).epsilon(1e-13));
}

TEST_CASE("ToeplitzSpec validation") {
    CHECK_NOTHROW(ToeplitzSpec(1.0, 0.0, 1));
    CHECK_NOTHROW(ToeplitzSpec(1.0, 0.999, 4));
    CHECK_THROWS_AS(ToeplitzSpec(0.5, 0.5, 4), ParameterError);
    CHECK_THROWS_AS(ToeplitzSpec(0.4, 0.5, 4), ParameterError);
    CHECK_THROWS_AS(ToeplitzSpec(1.1, 0.5, 4), ParameterError);
    CHECK_THROWS_AS(ToeplitzSpec(1.0, -0.1, 4), ParameterError);
    CHECK_THROWS_AS(ToeplitzSpec(1.0, 0.0, 0), ParameterError);
    CHECK_THROWS_AS(ToeplitzSpec(std::nan(""), 0.0, 4), ParameterError);
    try {
        ToeplitzSpec(0.5, 0.5, 3);
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("alpha must be strictly greater than beta") != std::string::npos);
    }
}

TEST_CASE("counting coefficients") {
    const ToeplitzSpec bennett(1.0, 0.0, 8);
    CHECK(counting_coeff(5, bennett) == 1.0);
    CHECK(counting_coeff(0, ToeplitzSpec(0.3, 0.1, 2)) == 1.0);
    const ToeplitzSpec decay(0.5, 0.25, 4);
    CHECK(counting_coeff(1, decay) == Approx(0.75));
    CHECK(counting_coeff(2, decay) == Approx(0.4375));
    const auto a = decay.counting_coeffs();
    REQUIRE(a.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(a[k] == Approx(counting_coeff(k, decay)).epsilon(1e-14));
    // alpha = 1 with momentum: a_k = (1 - beta^{k+1}) / (1 - beta)
    const ToeplitzSpec mom(1.0, 0.9, 30);
    for (std::size_t k = 0; k < 30; ++k) {
        CHECK(mom.counting_coeffs()[k] == Approx((1 - std::pow(0.9, k + 1.0)) / 0.1).epsilon(1e-12));
    }
    CHECK_THROWS_AS(counting_coeff(8, bennett), ParameterError);
}

TEST_CASE("square-root coefficients") {
    CHECK(sqrt_coeff(0, ToeplitzSpec(0.7, 0.2, 3)) == 1.0);
    CHECK(sqrt_coeff(2, ToeplitzSpec(1.0, 0.0, 3)) == Approx(0.375));
    CHECK(sqrt_coeff(1, ToeplitzSpec(1.0, 0.5, 3)) == Approx(0.75));
    // alpha = 0.8, beta = 0.4, j = 2:
    // 0.64*0.375 + 0.8*0.5*0.5*0.4 + 0.375*0.16
    CHECK(sqrt_coeff(2, ToeplitzSpec(0.8, 0.4, 3)) == Approx(0.24 + 0.08 + 0.06).epsilon(1e-14));

    for (double beta : {0.0, 0.3, 0.9}) {
        const ToeplitzSpec spec(0.95, beta, 200);
        const auto b = spec.sqrt_coeffs();
        for (std::size_t j : {0UL, 1UL, 17UL, 199UL}) CHECK(b[j] == Approx(sqrt_coeff(j, spec)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(sqrt_coeff(3, ToeplitzSpec(1.0, 0.0, 3)), ParameterError);
}

TEST_CASE("inverse square-root coefficients") {
    CHECK(inv_sqrt_coeff(0, ToeplitzSpec(0.6, 0.1, 2)) == 1.0);
    CHECK(inv_sqrt_coeff(1, ToeplitzSpec(1.0, 0.0, 2)) == -0.5);
    const ToeplitzSpec spec(1.0, 0.0, 3);
    const auto s = spec.inv_sqrt_coeffs();
    const auto b = spec.sqrt_coeffs();
    CHECK(s[0] * b[2] + s[1] * b[1] + s[2] * b[0] == Approx(0.0).epsilon(1e-15));
    for (std::size_t k = 0; k < 3; ++k) CHECK(s[k] == Approx(binstream::gamma_prime(k)));
    CHECK_THROWS_AS(inv_sqrt_coeff(3, spec), ParameterError);
}

TEST_CASE("squared square root reproduces the counting kernel") {
    for (auto [alpha, beta] : {std::pair{1.0, 0.0}, {1.0, 0.9}, {0.99, 0.0}, {0.99, 0.95}, {0.5, 0.49}}) {
        const ToeplitzSpec spec(alpha, beta, 300);
        const auto a = spec.counting_coeffs();
        const auto b = spec.sqrt_coeffs();
        const auto s = spec.inv_sqrt_coeffs();
        for (std::size_t k = 0; k < 300; k += 7) {
            double bb = 0.0;
            double sb = 0.0;
            for (std::size_t i = 0; i <= k; ++i) {
                bb += b[i] * b[k - i];
                sb += s[i] * b[k - i];
            }
            CHECK(bb == Approx(a[k]).epsilon(1e-11));
            CHECK(std::abs(sb - (k == 0 ? 1.0 : 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("copies of a spec share the coefficient cache") {
    const ToeplitzSpec spec(1.0, 0.5, 64);
    const ToeplitzSpec copy = spec;
    CHECK(spec.sqrt_coeffs().data() == copy.sqrt_coeffs().data());
}
