#pragma once

#include <cstdint>
#include <string_view>

namespace ldgmq {

// Self-contained splitmix64 generator. Used for every random draw in the
// project so that results are bit-identical across platforms and standard
// library versions (std:: distributions are implementation-defined).
class rng {
  public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    bool bit() { return (next() >> 63) != 0; }

  private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Counter-based fan-out of one root seed into independent substreams, keyed
// by a component tag and an index. Parallel workers draw from disjoint
// substreams, so aggregation order cannot change results.
inline std::uint64_t substream(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = fnv1a64(tag);
    h ^= 0x9e3779b97f4a7c15ULL * (index + 1);
    rng mix(root ^ h);
    mix.next();
    return mix.next();
}

}  // namespace ldgmq
