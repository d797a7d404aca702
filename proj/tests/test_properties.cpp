// Randomized properties. Each case draws its inputs from a fixed-seed
// generator so failures reproduce; CAPTURE prints the offending draw.
#include "binstream/binned_matrix.hpp"
#include "binstream/binning.hpp"
#include "binstream/factorization.hpp"
#include "binstream/matrix.hpp"
#include "binstream/toeplitz.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace binstream;

namespace {

struct Draw {
    std::size_t n;
    double alpha;
    double beta;
    double c;
    double tau;
};

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

    Draw draw(std::size_t max_n) {
        Draw d{};
        d.n = index(1, max_n);
        d.alpha = uniform(0.5, 1.0);
        if (index(0, 3) == 0) d.alpha = 1.0;
        d.beta = index(0, 2) == 0 ? 0.0 : uniform(0.0, d.alpha * 0.999);
        d.c = uniform(0.05, 0.995);
        d.tau = std::exp(uniform(std::log(1e-6), std::log(0.5)));
        return d;
    }

    // Random valid binning: each row keeps or merges adjacent intervals of
    // the previous row at random, then appends the new singleton.
    std::vector<Partition> binning(std::size_t n) {
        std::vector<Partition> rows;
        Partition cur;
        for (std::size_t i = 1; i <= n; ++i) {
            Partition next;
            for (const auto& iv : cur) {
                if (!next.empty() && index(0, 2) == 0) next.back().b = iv.b;
                else next.push_back(iv);
            }
            next.push_back({i, i});
            rows.push_back(next);
            cur = next;
        }
        return rows;
    }

private:
    std::mt19937_64 rng_;
};

void capture_draw(const Draw& d) {
    MESSAGE("n=" << d.n << " alpha=" << d.alpha << " beta=" << d.beta << " c=" << d.c << " tau=" << d.tau);
}

} // namespace

TEST_CASE("greedy binning is valid and is a (1/c^2 - 1, tau)-perturbation") {
    Gen gen(101);
    for (int trial = 0; trial < 60; ++trial) {
        const auto d = gen.draw(150);
        const ToeplitzSpec spec(d.alpha, d.beta, d.n);
        const auto src = toeplitz_source(spec.sqrt_coeffs());
        const BinnedMatrixView view(src, build_binning(src, d.n, {d.c, d.tau}));
        const auto b = build_toeplitz(d.n, spec.sqrt_coeffs());
        bool valid = verify_binning(view.binning());
        for (std::size_t i = 1; i <= d.n; ++i) valid = valid && view.binning()[i].back() == Interval{i, i};
        const bool perturb = verify_perturbation(b, materialize(view), 1.0 / (d.c * d.c) - 1.0, d.tau);
        if (!valid || !perturb) capture_draw(d);
        CHECK(valid);
        CHECK(perturb);
    }
}

TEST_CASE("streaming evaluation equals the dense product and uses |B| cells") {
    Gen gen(202);
    std::normal_distribution<double> normal;
    std::mt19937_64 zrng(203);
    for (int trial = 0; trial < 40; ++trial) {
        const auto d = gen.draw(200);
        const ToeplitzSpec spec(d.alpha, d.beta, d.n);
        const auto src = toeplitz_source(spec.sqrt_coeffs());
        const BinnedMatrixView view(src, build_binning(src, d.n, {d.c, d.tau}));
        std::vector<double> z(d.n);
        for (auto& v : z) v = normal(zrng);
        const auto expected = matvec(materialize(view), z);
        BinnedStreamEvaluator ev(view);
        double err = 0.0;
        double scale = 1e-300;
        for (std::size_t t = 0; t < d.n; ++t) {
            err = std::max(err, std::abs(ev.push(z[t]) - expected[t]));
            scale = std::max(scale, std::abs(expected[t]));
        }
        if (err > 1e-10 * scale || ev.peak_buffer() != space_complexity(view)) capture_draw(d);
        CHECK(err <= 1e-10 * scale);
        CHECK(ev.peak_buffer() == space_complexity(view));
    }
}

TEST_CASE("binned solve equals dense forward substitution") {
    Gen gen(303);
    for (int trial = 0; trial < 25; ++trial) {
        const auto d = gen.draw(120);
        const ToeplitzSpec spec(d.alpha, d.beta, d.n);
        const auto fac = factorize_sqrt(spec, {d.c, d.tau});
        const auto a = build_toeplitz(d.n, spec.counting_coeffs());
        const auto dense = forward_substitute(materialize(fac.left), a);
        const double diff = max_abs_diff(fac.right, dense);
        if (diff > 1e-10 * std::max(1.0, max_abs(dense))) capture_draw(d);
        CHECK(diff <= 1e-10 * std::max(1.0, max_abs(dense)));
        CHECK(max_abs_diff(multiply(materialize(fac.left), fac.right), a) <= 1e-8 * static_cast<double>(d.n));
    }
}

TEST_CASE("report ratios are finite and positive; bin size bounded by n") {
    Gen gen(404);
    for (int trial = 0; trial < 40; ++trial) {
        const auto d = gen.draw(300);
        const auto rep = sqrt_binned_report(ToeplitzSpec(d.alpha, d.beta, d.n), {d.c, d.tau});
        CHECK(std::isfinite(rep.mean_se_ratio));
        CHECK(std::isfinite(rep.max_se_ratio));
        CHECK(rep.mean_se_ratio > 0.0);
        CHECK(rep.max_se_ratio > 0.0);
        CHECK(rep.bin_size >= 1);
        CHECK(rep.bin_size <= d.n);
    }
}

TEST_CASE("random coarsening sequences are valid binnings; corruptions are not") {
    Gen gen(505);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = gen.index(2, 60);
        auto rows = gen.binning(n);
        CHECK(verify_binning(rows));
        const Binning bin(rows);
        for (std::size_t i = 1; i <= n; ++i) CHECK(parse_partition(format_partition(bin[i])) == bin[i]);

        // Split an interval of row r+1 inside a longer interval of row r:
        // that row-r interval now straddles a boundary, so coarsening fails.
        bool corrupted = false;
        for (std::size_t r = 1; r < n && !corrupted; ++r) {
            for (const auto& fine : rows[r - 1]) {
                if (fine.length() < 2) continue;
                auto& coarse_row = rows[r];
                for (std::size_t k = 0; k < coarse_row.size(); ++k) {
                    if (coarse_row[k].contains(fine.a)) {
                        const Interval whole = coarse_row[k];
                        coarse_row[k] = {fine.a + 1, whole.b};
                        coarse_row.insert(coarse_row.begin() + static_cast<std::ptrdiff_t>(k),
                                          Interval{whole.a, fine.a});
                        corrupted = true;
                        break;
                    }
                }
                break;
            }
        }
        if (corrupted) CHECK_FALSE(verify_binning(rows));
        // Dropping the new singleton always invalidates.
        auto broken = gen.binning(n);
        broken[n - 1].pop_back();
        CHECK_FALSE(verify_binning(broken));
    }
}

TEST_CASE("c close to one with tiny tau reproduces the square root") {
    Gen gen(606);
    for (int trial = 0; trial < 20; ++trial) {
        auto d = gen.draw(80);
        const ToeplitzSpec spec(d.alpha, d.beta, d.n);
        const auto src = toeplitz_source(spec.sqrt_coeffs());
        const auto exact = BinnedMatrixView(src, build_binning(src, d.n, {1.0 - 1e-12, 1e-300}));
        CHECK(space_complexity(exact) == d.n);
        CHECK(max_abs_diff(materialize(exact), build_toeplitz(d.n, spec.sqrt_coeffs())) == 0.0);
    }
}
