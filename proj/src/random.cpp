#include "atomfringe/random.hpp"

#include <cmath>

#include "atomfringe/errors.hpp"

namespace atomfringe {

namespace {

std::int64_t poisson_inversion(std::mt19937_64& rng, double mean) {
    const double limit = std::exp(-mean);
    double product = uniform_unit(rng);
    std::int64_t k = 0;
    while (product > limit) {
        product *= uniform_unit(rng);
        ++k;
    }
    return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables", algorithm PTRS. Valid for mean >= 10.
std::int64_t poisson_ptrs(std::mt19937_64& rng, double mean) {
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);

    for (;;) {
        const double u = uniform_unit(rng) - 0.5;
        const double v = uniform_unit(rng);
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);

        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mean - mean - std::lgamma(k + 1.0))
            return static_cast<std::int64_t>(k);
    }
}

} // namespace

std::int64_t poisson_sample(std::mt19937_64& rng, double mean) {
    if (mean < 0.0) throw ValidationError("Poisson mean must be non-negative");
    if (mean == 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(rng, mean);
    return poisson_ptrs(rng, mean);
}

} // namespace atomfringe
