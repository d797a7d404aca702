#include "binstream/binning.hpp"

#include "binstream/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace binstream {

bool is_partition_of(const Partition& p, std::size_t i) noexcept {
    std::size_t expected = 1;
    for (const auto& iv : p) {
        if (iv.a != expected || iv.b < iv.a) return false;
        expected = iv.b + 1;
    }
    return expected == i + 1;
}

bool coarsens(const Partition& coarse, const Partition& fine) noexcept {
    const std::size_t fine_end = fine.empty() ? 0 : fine.back().b;
    if (!is_partition_of(fine, fine_end) || !is_partition_of(coarse, fine_end + 1)) return false;
    std::size_t r = 0;
    for (const auto& iv : coarse) {
        std::size_t covered = iv.a;
        while (r < fine.size() && fine[r].b <= iv.b) {
            if (fine[r].a != covered) return false;
            covered = fine[r].b + 1;
            ++r;
        }
        if (iv.b == fine_end + 1 && covered == fine_end + 1) covered = fine_end + 2;
        if (covered != iv.b + 1) return false;
    }
    return r == fine.size();
}

void BinningParams::validate() const {
    if (!(c > 0.0 && c < 1.0)) throw ParameterError("binning parameter c must lie in (0, 1), got " + std::to_string(c));
    if (!(tau > 0.0 && tau < 1.0)) {
        throw ParameterError("binning parameter tau must lie in (0, 1), got " + std::to_string(tau));
    }
}

namespace {

// Merge trigger. The mutation build flips the strict comparison so the
// verification suites can demonstrate that they notice.
inline bool exceeds_merge_threshold(double ratio, double c) noexcept {
#ifdef BINSTREAM_MUTATE_MERGE_STRICTNESS
    return ratio >= c;
#else
    return ratio > c;
#endif
}

} // namespace

Partition next_partition(const Partition& prev, std::size_t i, const RowFn& row, const BinningParams& params) {
    if (i == 0 || !is_partition_of(prev, i - 1)) {
        throw ContractError("next_partition: previous partition does not cover [1, " + std::to_string(i - 1) + "]");
    }
    const double c = params.c;
    const double c2 = c * c;
    const double tau = params.tau;

    Partition out;
    out.reserve(prev.size() + 1);

    // k and k_merge are 1-based positions into prev, as in the pseudocode.
    std::size_t k = prev.size();
    while (k > 0) {
        std::size_t a = prev[k - 1].a;
        const std::size_t b = prev[k - 1].b;
        std::size_t k_merge = k;
        if (k > 1) {
            const double right = row(b + 1);
            if (right > 0.0 && exceeds_merge_threshold(row(a) / right, c)) {
                Interval candidate = prev[k_merge - 2];
                while (k_merge > 1 && row(candidate.a) / right >= c2) {
                    a = candidate.a;
                    --k_merge;
                    // No interval left of position 1; candidate keeps its last value.
                    if (k_merge > 1) candidate = prev[k_merge - 2];
                }
            }
        }
        if (row(b) <= tau) {
            out.push_back({1, b});
            k = 0;
        } else {
            out.push_back({a, b});
            k = k_merge - 1;
        }
    }
    std::reverse(out.begin(), out.end());
    out.push_back({i, i});
    return out;
}

Binning::Binning(std::vector<Partition> partitions) : partitions_(std::move(partitions)) {
    for (const auto& p : partitions_) size_ = std::max(size_, p.size());
}

Binning Binning::trivial(std::size_t n) {
    std::vector<Partition> parts;
    parts.reserve(n);
    Partition p;
    for (std::size_t i = 1; i <= n; ++i) {
        p.push_back({i, i});
        parts.push_back(p);
    }
    return Binning(std::move(parts));
}

BinningStream::BinningStream(EntrySource source, std::size_t n, BinningParams params)
    : source_(std::move(source)), n_(n), params_(params) {
    params_.validate();
    if (n_ == 0) throw ParameterError("binning dimension n must be at least 1");
}

const Partition& BinningStream::next() {
    if (done()) throw ContractError("BinningStream: all " + std::to_string(n_) + " rows already produced");
    const std::size_t i = row_ + 1;
    current_ = next_partition(current_, i, [&](std::size_t j) { return source_(i, j); }, params_);
    row_ = i;
    max_size_ = std::max(max_size_, current_.size());
    return current_;
}

Binning build_binning(const EntrySource& source, std::size_t n, const BinningParams& params) {
    BinningStream stream(source, n, params);
    std::vector<Partition> parts;
    parts.reserve(n);
    while (!stream.done()) parts.push_back(stream.next());
    return Binning(std::move(parts));
}

bool verify_binning(const std::vector<Partition>& partitions) {
    for (std::size_t i = 1; i <= partitions.size(); ++i) {
        if (!is_partition_of(partitions[i - 1], i)) return false;
        if (i > 1 && !coarsens(partitions[i - 1], partitions[i - 2])) return false;
    }
    return true;
}

bool verify_binning(const Binning& b) { return verify_binning(b.partitions()); }

bool is_mrm(const LowerTriangularMatrix& m, double tol) {
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j <= i; ++j) {
            if (!(r[j] > 0.0) || r[j] > 1.0 + tol) return false;
            if (j > 0 && r[j] < r[j - 1] * (1.0 - tol)) return false;
        }
    }
    // Ratio M(x, j) / M(x, j+1) must not decrease as x runs down from row j+1.
    for (std::size_t x = 1; x + 1 < n; ++x) {
        auto cur = m.row(x);
        auto nxt = m.row(x + 1);
        for (std::size_t j = 0; j < x; ++j) {
            const double here = cur[j] / cur[j + 1];
            const double below = nxt[j] / nxt[j + 1];
            if (below < here * (1.0 - tol)) return false;
        }
    }
    return true;
}

std::string format_partition(const Partition& p) {
    std::ostringstream os;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k > 0) os << ',';
        os << p[k].a << '-' << p[k].b;
    }
    return os.str();
}

Partition parse_partition(std::string_view text) {
    Partition out;
    if (text.empty()) return out;
    auto parse_index = [&](std::string_view tok) {
        std::size_t v = 0;
        const auto* end = tok.data() + tok.size();
        auto [ptr, ec] = std::from_chars(tok.data(), end, v);
        if (ec != std::errc{} || ptr != end || v == 0) {
            throw ParameterError("malformed partition index '" + std::string(tok) + "'");
        }
        return v;
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view item = text.substr(pos, comma - pos);
        const std::size_t dash = item.find('-');
        if (dash == std::string_view::npos) throw ParameterError("malformed interval '" + std::string(item) + "'");
        const Interval iv{parse_index(item.substr(0, dash)), parse_index(item.substr(dash + 1))};
        if (iv.b < iv.a) throw ParameterError("interval '" + std::string(item) + "' has b < a");
        out.push_back(iv);
        pos = comma + 1;
    }
    return out;
}

} // namespace binstream
