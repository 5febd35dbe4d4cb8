#pragma once

#include <cstdint>
#include <random>

namespace atomfringe {

/// Uniform double in [0, 1) built from the top 53 bits of the engine
/// output. Used instead of std::uniform_real_distribution so that streams
/// are reproducible across standard libraries.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Poisson draw with the given mean. Inversion by sequential search for
/// small means, Hormann's PTRS transformed rejection for large ones; both
/// are exact samplers, so the stream is reproducible across platforms for
/// a fixed engine state.
std::int64_t poisson_sample(std::mt19937_64& rng, double mean);

} // namespace atomfringe
