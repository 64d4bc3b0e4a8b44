#ifndef STDMAPLAB_RNG_HPP
#define STDMAPLAB_RNG_HPP

#include <cstdint>

#include "stdmaplab/map.hpp"

namespace stdmaplab {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so worker streams derived by index produce
/// identical values no matter how samples are scheduled across threads.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
        std::uint64_t z = seed_;
        z = mix(z + 0x9e3779b97f4a7c15ULL * (stream + 1));
        z = mix(z + 0x9e3779b97f4a7c15ULL * (counter + 1));
        return mix(z);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform(std::uint64_t stream, std::uint64_t counter) const {
        return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
    }

    TorusPoint point(std::uint64_t stream, std::uint64_t counter) const {
        return {uniform(stream, 2 * counter), uniform(stream, 2 * counter + 1)};
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t seed_;
};

} // namespace stdmaplab

#endif
