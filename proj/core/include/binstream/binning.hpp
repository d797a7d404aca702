#pragma once

#include "binstream/matrix.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace binstream {

/// Closed column interval [a, b], 1-based, a <= b.
struct Interval {
    std::size_t a = 1;
    std::size_t b = 1;

    std::size_t length() const noexcept { return b - a + 1; }
    bool contains(std::size_t j) const noexcept { return a <= j && j <= b; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Disjoint intervals sorted by left endpoint whose union is [1, i].
using Partition = std::vector<Interval>;

/// True iff p partitions [1, i] (the empty partition covers [1, 0]).
bool is_partition_of(const Partition& p, std::size_t i) noexcept;

/// True iff every interval of `coarse` is a union of intervals from
/// `fine` plus, optionally, the fresh singleton [i, i] where i = fine's
/// right end + 1.
bool coarsens(const Partition& coarse, const Partition& fine) noexcept;

/// Greedy merge thresholds: consecutive intervals are merged while the
/// endpoint ratio stays above c (and the merged ratio at least c^2); every
/// column whose entry is at most tau is lumped into one leftmost interval.
struct BinningParams {
    double c = 0.0;
    double tau = 0.0;

    /// Throws ParameterError unless 0 < c < 1 and 0 < tau < 1.
    void validate() const;
};

/// Row i of a lower-triangular matrix as a function of the 1-based column.
using RowFn = std::function<double(std::size_t)>;
/// Entry (i, j) of a lower-triangular matrix, both 1-based, j <= i.
using EntrySource = std::function<double(std::size_t, std::size_t)>;

/**
 * One step of the binning procedure: given B^{i-1} (a partition of
 * [1, i-1]) and row i of L, scan the intervals right to left, greedily
 * merging towards column 1, collapse everything at or below tau into
 * [1, b], then append the singleton [i, i].
 *
 * Touches O(|prev|) entries of the row. Throws ContractError if prev does not
 * partition [1, i-1].
 */
Partition next_partition(const Partition& prev, std::size_t i, const RowFn& row, const BinningParams& params);

/// Sequence of partitions B^1 .. B^n in which each B^{i+1} coarsens
/// B^i together with [i+1, i+1].
class Binning {
public:
    Binning() = default;
    explicit Binning(std::vector<Partition> partitions);

    std::size_t n() const noexcept { return partitions_.size(); }
    /// B^i for 1-based i.
    const Partition& operator[](std::size_t i) const { return partitions_.at(i - 1); }
    /// max_i |B^i|
    std::size_t size() const noexcept { return size_; }

    const std::vector<Partition>& partitions() const noexcept { return partitions_; }

    static Binning trivial(std::size_t n);

private:
    std::vector<Partition> partitions_;
    std::size_t size_ = 0;
};

/**
 * Online generator for the binning of an n x n lower-triangular matrix. Only
 * the current partition is retained; each call to next() produces the next
 * row's partition in O(|B|) entry reads.
 */
class BinningStream {
public:
    BinningStream(EntrySource source, std::size_t n, BinningParams params);

    bool done() const noexcept { return row_ == n_; }
    /// Produces B^{row()+1}. Throws ContractError once all n rows are emitted.
    const Partition& next();

    std::size_t row() const noexcept { return row_; }
    std::size_t n() const noexcept { return n_; }
    const Partition& current() const noexcept { return current_; }
    /// Largest partition emitted so far.
    std::size_t max_size() const noexcept { return max_size_; }

private:
    EntrySource source_;
    std::size_t n_;
    BinningParams params_;
    std::size_t row_ = 0;
    std::size_t max_size_ = 0;
    Partition current_;
};

/// Runs the generator to completion and collects all partitions.
Binning build_binning(const EntrySource& source, std::size_t n, const BinningParams& params);

/// Checks that every B^i partitions [1, i] and that B^{i+1} coarsens B^i.
bool verify_binning(const Binning& b);
bool verify_binning(const std::vector<Partition>& partitions);

/**
 * Monotone-ratio check: (1) 0 < M(i,j) <= 1 on and below the diagonal,
 * (2) rows nondecreasing towards the diagonal, (3) M(x,j)/M(x,j+1)
 * nondecreasing in x >= j+1 for every j. Comparisons allow a relative slack
 * of tol; property (3) over consecutive columns implies it for all pairs.
 */
bool is_mrm(const LowerTriangularMatrix& m, double tol = 1e-12);

/// "a1-b1,a2-b2,..." (empty string for the empty partition).
std::string format_partition(const Partition& p);
/// Inverse of format_partition. Throws ParameterError on malformed text.
Partition parse_partition(std::string_view text);

} // namespace binstream
