#pragma once

// Portable random streams.
//
// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are implementation-defined, so the
// derived draws are implemented here:
//   - uniform integers by rejection sampling on the top bits,
//   - uniform reals in [0, 1) from the top 53 bits,
//   - standard normals by the Box-Muller transform (both outputs used in order).
// Sub-streams are seeded with SplitMix64 mixes of (seed, stream ids).
// The same seed therefore yields bit-identical draws on every platform.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mvml {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for an independent sub-stream identified by (seed, a, b).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Uniform real in [0, 1).
    double uniform01();

    double normal();

    /// Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Uniform random permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    /// k distinct indices drawn uniformly from 0..n-1, in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mvml
