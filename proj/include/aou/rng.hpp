#pragma once

#include <cstdint>

namespace aou {

// Counter-based generator: every draw is a pure function of
// (seed, stream, slot), so parallel trials with disjoint streams give
// results independent of execution order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t bits(std::uint64_t slot) const {
        std::uint64_t x = seed_;
        x = mix(x ^ (0x9e3779b97f4a7c15ULL + stream_ * 0xbf58476d1ce4e5b9ULL));
        x = mix(x ^ (0x94d049bb133111ebULL + slot * 0x2545f4914f6cdd1dULL));
        return mix(x);
    }

    // Uniform in [0, 1).
    double uniform(std::uint64_t slot) const {
        return static_cast<double>(bits(slot) >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t slot, std::uint64_t n) const {
        return n == 0 ? 0 : bits(slot) % n;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
};

// Sequential splitmix64, for one-shot generation (world sampling).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

private:
    std::uint64_t state_;
};

}  // namespace aou
