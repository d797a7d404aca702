#include "binstream/binned_matrix.hpp"
#include "binstream/errors.hpp"
#include "binstream/matrix.hpp"
#include "binstream/toeplitz.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace binstream;
using doctest::Approx;

namespace {

BinnedMatrixView bennett_view(std::size_t n, double c, double tau) {
    const ToeplitzSpec spec(1.0, 0.0, n);
    const auto src = toeplitz_source(spec.sqrt_coeffs());
    return {src, build_binning(src, n, {c, tau})};
}

} // namespace

TEST_CASE("approx_entry and materialize on the n=5 trace") {
    const auto view = bennett_view(5, 0.75, 0.01);
    CHECK(approx_entry(view, 5, 1) == Approx(0.29296875));
    CHECK(approx_entry(view, 5, 2) == Approx(0.29296875));
    CHECK(approx_entry(view, 5, 3) == 0.375);
    CHECK(approx_entry(view, 3, 4) == 0.0);
    for (std::size_t i = 1; i <= 5; ++i) CHECK(approx_entry(view, i, i) == view.base(i, i));

    const auto m = materialize(view);
    const std::vector<double> row5(m.row(4).begin(), m.row(4).end());
    CHECK(row5 == std::vector<double>{0.29296875, 0.29296875, 0.375, 0.5, 1.0});
    CHECK(space_complexity(view) == 4);
    CHECK_THROWS_AS(approx_entry(view, 6, 1), DimensionError);
}

TEST_CASE("trivial binning reproduces the base matrix") {
    const ToeplitzSpec spec(0.99, 0.5, 30);
    const auto base = build_toeplitz(30, spec.sqrt_coeffs());
    const BinnedMatrixView view(matrix_source(base), Binning::trivial(30));
    CHECK(materialize(view) == base);
    CHECK(space_complexity(view) == 30);
    CHECK(frobenius_norm(view) == Approx(frobenius_norm(base)));
    CHECK(row_max_norm(view) == Approx(row_max_norm(base)));
}

TEST_CASE("constant base gives exact values on every interval") {
    const EntrySource flat = [](std::size_t, std::size_t) { return 0.5; };
    const BinnedMatrixView view(flat, build_binning(flat, 20, {0.9, 0.01}));
    for (std::size_t i = 1; i <= 20; ++i) {
        for (std::size_t j = 1; j <= i; ++j) CHECK(approx_entry(view, i, j) == 0.5);
    }
}

TEST_CASE("materialized rows are constant on intervals") {
    const auto view = bennett_view(80, 0.8, 0.01);
    const auto m = materialize(view);
    for (std::size_t i = 1; i <= 80; ++i) {
        for (const auto& iv : view.binning()[i]) {
            for (std::size_t j = iv.a; j <= iv.b; ++j) CHECK(m(i - 1, j - 1) == m(i - 1, iv.a - 1));
        }
    }
    CHECK(frobenius_norm(view) == Approx(frobenius_norm(m)).epsilon(1e-13));
    CHECK(row_max_norm(view) == Approx(row_max_norm(m)).epsilon(1e-13));
}

TEST_CASE("stream_step buffers hold interval sums") {
    const auto view = bennett_view(5, 0.75, 0.01);
    StreamState state;
    const auto row_fn = [&](std::size_t i) { return [&view, i](std::size_t j) { return view.base(i, j); }; };
    const double w = 2.5;
    CHECK(stream_step(state, view.binning()[1], w, row_fn(1)) == view.base(1, 1) * w);
    CHECK(state.buffer == std::vector<double>{w});
    for (std::size_t i = 2; i <= 5; ++i) stream_step(state, view.binning()[i], i == 2 ? 0.0 : 1.0, row_fn(i));

    StreamState ones;
    for (std::size_t i = 1; i <= 5; ++i) stream_step(ones, view.binning()[i], 1.0, row_fn(i));
    CHECK(ones.buffer == std::vector<double>{2, 1, 1, 1});
    CHECK(ones.partition == Partition{{1, 2}, {3, 3}, {4, 4}, {5, 5}});
    CHECK(ones.step == 5);
    CHECK(ones.peak_buffer == 4);

    StreamState bad;
    stream_step(bad, {{1, 1}}, 1.0, row_fn(1));
    CHECK_THROWS_AS(stream_step(bad, {{1, 1}, {3, 3}}, 1.0, row_fn(2)), ContractError);
}

TEST_CASE("streamed product matches the dense product") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (auto [alpha, beta] : {std::pair{1.0, 0.0}, {0.99, 0.95}}) {
        const std::size_t n = 256;
        const ToeplitzSpec spec(alpha, beta, n);
        const auto src = toeplitz_source(spec.sqrt_coeffs());
        const BinnedMatrixView view(src, build_binning(src, n, {0.9, 1.0 / n}));
        const auto dense = materialize(view);
        std::vector<double> z(n);
        for (auto& v : z) v = normal(rng);
        const auto expected = matvec(dense, z);
        const auto got = stream_apply(view, z);
        double scale = 0.0;
        double err = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            scale = std::max(scale, std::abs(expected[t]));
            err = std::max(err, std::abs(expected[t] - got[t]));
        }
        CHECK(err / scale <= 1e-10);
    }
}

TEST_CASE("evaluator memory and bounds") {
    const auto view = bennett_view(50, 0.75, 0.02);
    BinnedStreamEvaluator ev(view);
    std::size_t max_live = 0;
    for (std::size_t t = 0; t < 50; ++t) {
        ev.push(1.0);
        max_live = std::max(max_live, ev.live_reals());
        CHECK(ev.live_reals() <= space_complexity(view));
    }
    CHECK(max_live == 8);
    CHECK(ev.peak_buffer() == 8);
    CHECK_THROWS_AS(ev.push(1.0), InputError);
}

TEST_CASE("binned solve agrees with dense forward substitution") {
    const ToeplitzSpec spec(1.0, 0.9, 120);
    const auto src = toeplitz_source(spec.sqrt_coeffs());
    const BinnedMatrixView view(src, build_binning(src, 120, {0.8, 0.01}));
    const auto a = build_toeplitz(120, spec.counting_coeffs());
    const auto fast = solve_binned(view, a);
    const auto dense = forward_substitute(materialize(view), a);
    CHECK(max_abs_diff(fast, dense) <= 1e-10 * max_abs(dense));
}
