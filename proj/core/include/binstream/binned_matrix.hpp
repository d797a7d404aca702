#pragma once

#include "binstream/binning.hpp"
#include "binstream/matrix.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace binstream {

/// Entry source for the lower-triangular Toeplitz matrix with the given
/// subdiagonals. The coefficients are copied into shared storage.
EntrySource toeplitz_source(std::span<const double> coeffs);

/// Entry source reading a dense matrix; `m` must outlive the source.
EntrySource matrix_source(const LowerTriangularMatrix& m);

/**
 * B-approximation of a base matrix L: on row i, every column of an interval
 * [a, b] in B^i takes the value (L(i,a) + L(i,b)) / 2. Only the two endpoint
 * entries of each interval are ever read, and since [i, i] is in B^i for
 * binnings produced by the greedy procedure the diagonal is kept exactly.
 */
class BinnedMatrixView {
public:
    BinnedMatrixView(EntrySource base, Binning binning);

    std::size_t n() const noexcept { return binning_.n(); }
    const Binning& binning() const noexcept { return binning_; }
    double base(std::size_t i, std::size_t j) const { return base_(i, j); }
    const EntrySource& base_source() const noexcept { return base_; }

    /// Common value of row i on interval iv.
    double interval_value(std::size_t i, const Interval& iv) const { return 0.5 * (base_(i, iv.a) + base_(i, iv.b)); }

private:
    EntrySource base_;
    Binning binning_;
};

/// Entry (i, j) of the approximation, 1-based; zero when j > i.
double approx_entry(const BinnedMatrixView& view, std::size_t i, std::size_t j);

/// Dense copy of the approximation.
LowerTriangularMatrix materialize(const BinnedMatrixView& view);

/// |B|, the number of reals a streaming evaluator has to keep.
std::size_t space_complexity(const BinnedMatrixView& view) noexcept;

/// Norms of the approximation computed from interval values, without
/// materializing it.
double frobenius_norm(const BinnedMatrixView& view);
double row_max_norm(const BinnedMatrixView& view);

/**
 * Live memory of the streaming evaluator after `step` inputs: one interval
 * sum per interval of the current partition.
 */
struct StreamState {
    std::vector<double> buffer;
    Partition partition;
    std::size_t step = 0;
    std::size_t peak_buffer = 0;
};

/**
 * Advances the state from step i-1 to i. The buffer is rewritten in place in
 * ascending order; each new interval sum is a range sum over the old buffer
 * (read pointer never behind the write pointer) plus z_i for the interval
 * containing i. Returns sum_k value(i, B^i_k) * buffer[k].
 *
 * Throws ContractError if new_partition is not a coarsening of the current
 * partition together with [i, i].
 */
double stream_step(StreamState& state, const Partition& new_partition, double z, const RowFn& row);

/**
 * Computes L_hat z one input at a time. Partitions are either replayed from
 * a stored binning or produced online by a BinningStream over the base
 * matrix, in which case no partition history is kept.
 */
class BinnedStreamEvaluator {
public:
    /// Replays view.binning(); `view` must outlive the evaluator.
    explicit BinnedStreamEvaluator(const BinnedMatrixView& view);
    /// Interleaves binning generation with evaluation.
    BinnedStreamEvaluator(EntrySource base, std::size_t n, BinningParams params);

    /// Consumes z_i and returns (L_hat z)_i.
    double push(double z);

    std::size_t n() const noexcept { return n_; }
    std::size_t step() const noexcept { return state_.step; }
    const StreamState& state() const noexcept { return state_; }
    /// Reals currently held in the buffer.
    std::size_t live_reals() const noexcept { return state_.buffer.size(); }
    std::size_t peak_buffer() const noexcept { return state_.peak_buffer; }

private:
    const BinnedMatrixView* view_ = nullptr;
    EntrySource base_;
    std::optional<BinningStream> generator_;
    std::size_t n_ = 0;
    StreamState state_;
};

/// All n outputs of the streaming evaluator for a full input vector.
std::vector<double> stream_apply(const BinnedMatrixView& view, std::span<const double> z);

/// Row i (1-based) of a right-hand side, written into `out` (length i).
using RowFill = std::function<void(std::size_t, std::span<double>)>;
/// Receives row i (1-based, length i) of a solution.
using RowSink = std::function<void(std::size_t, std::span<const double>)>;

/**
 * Solves L_hat X = Y row by row, where L_hat is the B-approximation in
 * `view`. Keeps one running column-sum vector per interval of the current
 * partition, merged exactly like the streaming buffer, so each row costs
 * O(|B| n) and memory is O(|B| n) besides the sink.
 */
void solve_binned(const BinnedMatrixView& view, const RowFill& rhs, const RowSink& sink);

/// Dense-output convenience wrapper around solve_binned.
LowerTriangularMatrix solve_binned(const BinnedMatrixView& view, const LowerTriangularMatrix& rhs);

} // namespace binstream
