#pragma once

#include "pls/numerics.hpp"
#include "pls/rng.hpp"

#include <cstddef>
#include <vector>

namespace pls {

struct PowerDelayProfile {
    std::vector<double> powers;  // sums to 1
};

struct ChannelTaps {
    ComplexVec taps;
};

struct Cfr {
    ComplexVec values;
};

// p_l proportional to exp(-l / decay), normalized to unit sum.
PowerDelayProfile exp_pdp(std::size_t num_taps, double decay);

// Independent Rayleigh taps, h_l ~ CN(0, p_l).
ChannelTaps draw_channel(const PowerDelayProfile& pdp, Rng& rng);

// rho * h + sqrt(1 - rho^2) * w with w an independent draw, tap by tap.
ChannelTaps draw_correlated(const ChannelTaps& h, const PowerDelayProfile& pdp, double rho,
                            Rng& rng);

// N-point frequency response of the taps. Requires L <= N and N a power of two.
Cfr cfr_of(const ChannelTaps& h, std::size_t n);

}  // namespace pls
