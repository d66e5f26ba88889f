#pragma once

#include <cstdint>
#include <string_view>

namespace fwa {

// xoshiro256++ with splitmix64 seeding. Hand-rolled so that streams are
// bit-reproducible across platforms and standard-library versions; the
// determinism guarantees of the run outputs depend on it.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Derives an independent child stream; stable for a given (seed, tag).
    Rng fork(std::string_view tag) const;

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);
    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);
    // Standard normal via Box-Muller (no cached spare: one sample per call
    // keeps the stream position independent of call history).
    double normal();
    double normal(double mean, double stddev);

private:
    std::uint64_t s_[4];
};

} // namespace fwa
