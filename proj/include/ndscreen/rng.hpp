#pragma once

#include <cstdint>
#include <random>

namespace ndscreen {

/// Portable pseudorandom source.
///
/// The bit stream is std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. The standard library distributions are not portable across
/// implementations, so every derived variate is computed here:
///   uniform()      = (next() >> 11) * 2^-53
///   index(n)       = rejection sampling on next() (no modulo bias)
///   normal()       = Box-Muller, cosine branch only (one variate per two uniforms)
///   exponential(r) = -log(1 - uniform()) / r
/// Identical seeds therefore give identical streams on any conforming
/// platform, up to libm rounding in log/cos/sqrt.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t index(std::uint64_t n);
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    double exponential(double rate);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent per-stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ndscreen
