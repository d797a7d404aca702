#include "binstream/binned_matrix.hpp"

#include "binstream/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace binstream {

EntrySource toeplitz_source(std::span<const double> coeffs) {
    auto shared = std::make_shared<const std::vector<double>>(coeffs.begin(), coeffs.end());
    return [shared](std::size_t i, std::size_t j) { return j > i ? 0.0 : (*shared)[i - j]; };
}

EntrySource matrix_source(const LowerTriangularMatrix& m) {
    return [&m](std::size_t i, std::size_t j) { return m(i - 1, j - 1); };
}

BinnedMatrixView::BinnedMatrixView(EntrySource base, Binning binning)
    : base_(std::move(base)), binning_(std::move(binning)) {
    if (!base_) throw ParameterError("BinnedMatrixView: empty base source");
}

double approx_entry(const BinnedMatrixView& view, std::size_t i, std::size_t j) {
    if (j > i) return 0.0;
    if (j == 0 || i > view.n()) throw DimensionError("approx_entry: index out of range");
    const Partition& p = view.binning()[i];
    auto it = std::upper_bound(p.begin(), p.end(), j, [](std::size_t col, const Interval& iv) { return col < iv.a; });
    // upper_bound finds the first interval starting after j; j lies in the one before.
    return view.interval_value(i, *std::prev(it));
}

LowerTriangularMatrix materialize(const BinnedMatrixView& view) {
    const std::size_t n = view.n();
    LowerTriangularMatrix m(n);
    for (std::size_t i = 1; i <= n; ++i) {
        auto r = m.row(i - 1);
        for (const auto& iv : view.binning()[i]) {
            std::fill(r.begin() + static_cast<std::ptrdiff_t>(iv.a - 1), r.begin() + static_cast<std::ptrdiff_t>(iv.b),
                      view.interval_value(i, iv));
        }
    }
    return m;
}

std::size_t space_complexity(const BinnedMatrixView& view) noexcept { return view.binning().size(); }

namespace {

double row_sq_norm(const BinnedMatrixView& view, std::size_t i) {
    double acc = 0.0;
    for (const auto& iv : view.binning()[i]) {
        const double v = view.interval_value(i, iv);
        acc += static_cast<double>(iv.length()) * v * v;
    }
    return acc;
}

// For each interval of the new partition, the half-open range of old buffer
// slots it absorbs and whether it also contains the new index i.
struct MergeSpan {
    std::size_t first;
    std::size_t last;
    bool has_new;
};

std::vector<MergeSpan> merge_plan(const Partition& old, const Partition& next, std::size_t i) {
    if (!is_partition_of(next, i)) {
        throw ContractError("partition for step " + std::to_string(i) + " does not cover [1, " + std::to_string(i) +
                            "]");
    }
    std::vector<MergeSpan> plan;
    plan.reserve(next.size());
    std::size_t r = 0;
    for (const auto& iv : next) {
        MergeSpan span{r, r, false};
        std::size_t covered = iv.a;
        while (r < old.size() && old[r].b <= iv.b) {
            if (old[r].a != covered) break;
            covered = old[r].b + 1;
            ++r;
        }
        span.last = r;
        if (iv.b == i && covered == i) {
            span.has_new = true;
            covered = i + 1;
        }
        if (covered != iv.b + 1) {
            throw ContractError("partition for step " + std::to_string(i) + " is not a coarsening of the previous one");
        }
        plan.push_back(span);
    }
    if (r != old.size()) throw ContractError("partition for step " + std::to_string(i) + " drops earlier intervals");
    return plan;
}

} // namespace

double frobenius_norm(const BinnedMatrixView& view) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= view.n(); ++i) acc += row_sq_norm(view, i);
    return std::sqrt(acc);
}

double row_max_norm(const BinnedMatrixView& view) {
    double best = 0.0;
    for (std::size_t i = 1; i <= view.n(); ++i) best = std::max(best, row_sq_norm(view, i));
    return std::sqrt(best);
}

double stream_step(StreamState& state, const Partition& new_partition, double z, const RowFn& row) {
    const std::size_t i = state.step + 1;
    const auto plan = merge_plan(state.partition, new_partition, i);

    auto& buf = state.buffer;
    if (buf.size() < new_partition.size()) buf.resize(new_partition.size(), 0.0);
    for (std::size_t k = 0; k < plan.size(); ++k) {
        double sum = 0.0;
        for (std::size_t r = plan[k].first; r < plan[k].last; ++r) sum += buf[r];
        if (plan[k].has_new) sum += z;
        buf[k] = sum;
    }
    buf.resize(new_partition.size());

    state.partition = new_partition;
    state.step = i;
    state.peak_buffer = std::max(state.peak_buffer, buf.size());

    double out = 0.0;
    for (std::size_t k = 0; k < new_partition.size(); ++k) {
        const auto& iv = new_partition[k];
        out += 0.5 * (row(iv.a) + row(iv.b)) * buf[k];
    }
    return out;
}

BinnedStreamEvaluator::BinnedStreamEvaluator(const BinnedMatrixView& view)
    : view_(&view), base_(view.base_source()), n_(view.n()) {}

BinnedStreamEvaluator::BinnedStreamEvaluator(EntrySource base, std::size_t n, BinningParams params)
    : base_(std::move(base)), n_(n) {
    generator_.emplace(base_, n, params);
}

double BinnedStreamEvaluator::push(double z) {
    if (state_.step >= n_) {
        throw InputError("stream longer than the matrix dimension n = " + std::to_string(n_));
    }
    const std::size_t i = state_.step + 1;
    const Partition& next = generator_ ? generator_->next() : view_->binning()[i];
    return stream_step(state_, next, z, [&](std::size_t j) { return base_(i, j); });
}

std::vector<double> stream_apply(const BinnedMatrixView& view, std::span<const double> z) {
    if (z.size() != view.n()) throw DimensionError("stream_apply: input length differs from n");
    BinnedStreamEvaluator eval(view);
    std::vector<double> out;
    out.reserve(z.size());
    for (double v : z) out.push_back(eval.push(v));
    return out;
}

void solve_binned(const BinnedMatrixView& view, const RowFill& rhs, const RowSink& sink) {
    const std::size_t n = view.n();
    std::vector<std::vector<double>> slots;
    Partition old;
    std::vector<double> x(n);
    std::vector<double> values;

    for (std::size_t i = 1; i <= n; ++i) {
        const Partition& next = view.binning()[i];
        const auto plan = merge_plan(old, next, i);

        while (slots.size() < next.size()) slots.emplace_back(n, 0.0);
        for (std::size_t k = 0; k < plan.size(); ++k) {
            const auto [first, last, has_new] = plan[k];
            if (first == last) {
                std::fill(slots[k].begin(), slots[k].begin() + static_cast<std::ptrdiff_t>(i), 0.0);
                continue;
            }
            if (first != k) std::swap(slots[k], slots[first]);
            auto& dst = slots[k];
            for (std::size_t r = first + 1; r < last; ++r) {
                const auto& src = slots[r];
                for (std::size_t c = 0; c + 1 < i; ++c) dst[c] += src[c];
            }
            dst[i - 1] = 0.0;
        }

        values.resize(next.size());
        for (std::size_t k = 0; k < next.size(); ++k) values[k] = view.interval_value(i, next[k]);
        const double diag = values.back();
        if (diag == 0.0) throw NumericError("solve_binned: zero diagonal entry at row " + std::to_string(i));

        std::span<double> xi(x.data(), i);
        rhs(i, xi);
        for (std::size_t k = 0; k < next.size(); ++k) {
            const double v = values[k];
            const auto& s = slots[k];
            for (std::size_t c = 0; c + 1 < i; ++c) xi[c] -= v * s[c];
        }
        for (auto& v : xi) v /= diag;

        auto& tail = slots[next.size() - 1];
        for (std::size_t c = 0; c < i; ++c) tail[c] += xi[c];

        sink(i, xi);
        old = next;
    }
}

LowerTriangularMatrix solve_binned(const BinnedMatrixView& view, const LowerTriangularMatrix& rhs) {
    if (rhs.size() != view.n()) throw DimensionError("solve_binned: right-hand side dimension differs from n");
    LowerTriangularMatrix out(view.n());
    solve_binned(
        view,
        [&](std::size_t i, std::span<double> dst) {
            auto src = rhs.row(i - 1);
            std::copy(src.begin(), src.end(), dst.begin());
        },
        [&](std::size_t i, std::span<const double> src) {
            auto dst = out.row(i - 1);
            std::copy(src.begin(), src.end(), dst.begin());
        });
    return out;
}

} // namespace binstream
