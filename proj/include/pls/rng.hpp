#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace pls {

// Per-trial random stream. Seeded from (master, grid, trial) so results do not
// depend on which worker runs a trial.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    static Rng for_trial(std::uint64_t master_seed, std::uint64_t grid_index,
                         std::uint64_t trial_index);

    double normal();
    // Circularly symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance = 1.0);
    std::uint8_t bit();

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace pls
