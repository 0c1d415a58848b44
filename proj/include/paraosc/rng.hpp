#pragma once

// Reproducible sampling.  The generator is pinned to mt19937_64 with the
// canonical 53-bit uniform mapping, and the binomial draw is an explicit
// Bernoulli sum, so identical seeds give identical scans on every platform
// (std::binomial_distribution is implementation-defined and would not).

#include <cstdint>
#include <random>
#include <stdexcept>

namespace paraosc {

class SampleRng {
public:
    explicit SampleRng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // [0, 1) with 53-bit resolution
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    int binomial(int trials, double p) {
        if (trials < 0 || p < 0.0 || p > 1.0)
            throw std::invalid_argument("SampleRng::binomial: invalid parameters");
        int k = 0;
        for (int i = 0; i < trials; ++i)
            if (uniform() < p) ++k;
        return k;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace paraosc
