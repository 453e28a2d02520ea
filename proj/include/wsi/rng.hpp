#pragma once

#include <cstdint>
#include <random>

namespace wsi {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for a sub-task, e.g. per-lemma induction.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t key) {
    return splitmix64(splitmix64(global_seed) ^ (key * 0xff51afd7ed558ccdULL));
}

/// mt19937_64 with portable bounded-integer and real draws. The standard
/// distributions are implementation-defined, which would make outputs differ
/// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n), n > 0. Rejection sampling, no modulo bias.
    std::uint64_t uniform(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform real in [0, 1) with 53 bits of precision.
    double uniform_real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

}  // namespace wsi
