#include "binstream/mechanism.hpp"

#include "binstream/errors.hpp"

#include <cmath>
#include <iostream>
#include <random>
#include <string>

namespace binstream {

void PrivacyParams::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw ParameterError("epsilon must lie in (0, 1], got " + std::to_string(epsilon));
    }
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1), got " + std::to_string(delta));
    if (epsilon == 1.0) {
        std::clog << "warning: epsilon = 1 is on the boundary of the Gaussian mechanism guarantee\n";
    }
}

double gaussian_constant(double epsilon, double delta) {
    PrivacyParams{epsilon, delta, 0}.validate();
    return 2.0 * std::log(1.25 / delta) / (epsilon * epsilon);
}

namespace {

// splitmix64 finalizer; decorrelates (seed, step) pairs before seeding.
std::uint64_t mix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

double standard_normal(std::uint64_t seed, std::size_t step) {
    std::mt19937_64 engine(mix(mix(seed) ^ static_cast<std::uint64_t>(step)));
    std::normal_distribution<double> normal(0.0, 1.0);
    return normal(engine);
}

std::vector<double> noise_vector(std::uint64_t seed, std::size_t n, double stddev) {
    std::vector<double> z(n);
    for (std::size_t t = 1; t <= n; ++t) z[t - 1] = stddev == 0.0 ? 0.0 : stddev * standard_normal(seed, t);
    return z;
}

namespace {

double gaussian_stddev(double sensitivity, const PrivacyParams& privacy) {
    if (!(sensitivity >= 0.0)) throw ParameterError("sensitivity must be nonnegative");
    return sensitivity * std::sqrt(gaussian_constant(privacy.epsilon, privacy.delta));
}

} // namespace

PrivateCounter::PrivateCounter(const BinnedMatrixView& view, double sensitivity, PrivacyParams privacy)
    : evaluator_(view), privacy_(privacy), stddev_(gaussian_stddev(sensitivity, privacy)) {}

PrivateCounter::PrivateCounter(EntrySource base, std::size_t n, BinningParams params, double sensitivity,
                               PrivacyParams privacy)
    : evaluator_(std::move(base), n, params), privacy_(privacy), stddev_(gaussian_stddev(sensitivity, privacy)) {}

CounterOutput PrivateCounter::push(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw InputError("stream value " + std::to_string(x) + " at step " + std::to_string(evaluator_.step() + 1) +
                         " is outside [0, 1]");
    }
    if (evaluator_.step() >= evaluator_.n()) {
        throw InputError("stream is longer than n = " + std::to_string(evaluator_.n()));
    }
    const std::size_t t = evaluator_.step() + 1;
    const double z = stddev_ == 0.0 ? 0.0 : stddev_ * standard_normal(privacy_.seed, t);
    const double noise = evaluator_.push(z);
    prefix_ += x;
    return {t, prefix_, prefix_ + noise, noise};
}

std::vector<CounterOutput> run_private_counter(std::span<const double> stream, const BinnedMatrixView& view,
                                               double sensitivity, const PrivacyParams& privacy) {
    if (stream.size() > view.n()) {
        throw InputError("stream of length " + std::to_string(stream.size()) + " exceeds n = " +
                         std::to_string(view.n()));
    }
    PrivateCounter counter(view, sensitivity, privacy);
    std::vector<CounterOutput> out;
    out.reserve(stream.size());
    for (double x : stream) out.push_back(counter.push(x));
    return out;
}

} // namespace binstream
