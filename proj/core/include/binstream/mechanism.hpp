#pragma once

#include "binstream/binned_matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace binstream {

struct PrivacyParams {
    double epsilon = 1.0;
    double delta = 1e-6;
    std::uint64_t seed = 0;

    /// Throws ParameterError unless epsilon in (0, 1] and delta in (0, 1).
    /// epsilon = 1 lies outside the Gaussian-mechanism hypothesis and is
    /// accepted with a warning on std::clog.
    void validate() const;
};

/// Gaussian mechanism variance factor 2 ln(1.25 / delta) / epsilon^2.
double gaussian_constant(double epsilon, double delta);

struct CounterOutput {
    std::size_t step = 0;
    double true_prefix = 0.0;
    double noisy_prefix = 0.0;
    double noise_component = 0.0;
};

/// Standard normal draw for stream position `step` (1-based), a pure function
/// of (seed, step) so noise is produced at the step that consumes it.
double standard_normal(std::uint64_t seed, std::size_t step);

/// z_1..z_n scaled by stddev, identical to what a counter with this seed draws.
std::vector<double> noise_vector(std::uint64_t seed, std::size_t n, double stddev);

/**
 * Continual counter releasing prefix sums of a stream with values in [0, 1]
 * plus correlated noise (L_hat z)_t, z_t ~ N(0, C_{eps,delta} sensitivity^2).
 * Live memory is the evaluator buffer plus the running prefix and step.
 *
 * A sensitivity of zero disables the noise, which tests use to check the
 * noiseless path.
 */
class PrivateCounter {
public:
    /// Replays the binning stored in `view`, which must outlive the counter.
    PrivateCounter(const BinnedMatrixView& view, double sensitivity, PrivacyParams privacy);
    /// Generates the binning of `base` online.
    PrivateCounter(EntrySource base, std::size_t n, BinningParams params, double sensitivity,
                   PrivacyParams privacy);

    /// Throws InputError if x is outside [0, 1] or the stream exceeds n.
    CounterOutput push(double x);

    std::size_t n() const noexcept { return evaluator_.n(); }
    double noise_stddev() const noexcept { return stddev_; }
    std::size_t live_reals() const noexcept { return evaluator_.live_reals(); }
    std::size_t peak_buffer() const noexcept { return evaluator_.peak_buffer(); }

private:
    BinnedStreamEvaluator evaluator_;
    PrivacyParams privacy_;
    double stddev_ = 0.0;
    double prefix_ = 0.0;
};

std::vector<CounterOutput> run_private_counter(std::span<const double> stream, const BinnedMatrixView& view,
                                               double sensitivity, const PrivacyParams& privacy);

} // namespace binstream
