#include "pls/rng.hpp"

#include <cmath>
#include <vector>

namespace pls {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::for_trial(std::uint64_t master_seed, std::uint64_t grid_index,
                   std::uint64_t trial_index) {
    std::vector<std::uint32_t> words;
    for (auto v : {master_seed, grid_index, trial_index}) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    Rng rng(0);
    rng.engine_.seed(seq);
    return rng;
}

double Rng::normal() { return normal_(engine_); }

std::complex<double> Rng::complex_normal(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
}

std::uint8_t Rng::bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

}  // namespace pls
