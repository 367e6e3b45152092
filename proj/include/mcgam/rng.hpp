#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace mcgam {

/// Seedable splitmix64 generator. Produces identical output on every
/// platform; the reproducibility contract of training rests on that.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Multiply-shift; n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    std::uint64_t state_;
};

/// Mixes a tag into a stream id with the splitmix64 finalizer.
inline std::uint64_t mix_stream(std::uint64_t h, std::uint64_t tag) {
    std::uint64_t z = h + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream from a root seed and a path of tags
/// (e.g. {cycle, feature, bag}). Streams for distinct paths are
/// decorrelated, so the schedule that consumes them does not matter.
inline Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix_stream(0x6d6367616d2d3166ULL, seed);
    for (std::uint64_t tag : path) h = mix_stream(h, tag);
    return Rng(h);
}

/// In-place Fisher-Yates shuffle. Hand-rolled because std::shuffle's
/// sequence of draws is implementation-defined.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace mcgam
