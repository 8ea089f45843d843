#pragma once

#include "pls/channel.hpp"
#include "pls/numerics.hpp"

#include <cstddef>
#include <vector>

namespace pls {

// H(k) = min_phase(k) * all_pass(k) on an N-point grid.
struct DecomposedChannel {
    Cfr min_phase;
    Cfr all_pass;
};

// Zeros with |z| - 1 > this are reflected; zeros on or near the circle stay put.
inline constexpr double kUnitCircleTolerance = 1e-6;

struct FirFactorization {
    PolyRoots roots;
    std::vector<bool> outside;  // parallel to roots.roots
    ChannelTaps min_phase;      // same length as the source taps
};

// Root-based split. The min-phase part keeps the inside zeros, takes 1/conj(z)
// for each outside zero z, and has gain h_d * prod(-z) over the outside zeros,
// so that the all-pass part is a pure Blaschke product (times any delay).
FirFactorization factor_fir(const ChannelTaps& h);

DecomposedChannel decompose_fir(const ChannelTaps& h, std::size_t n);

// Cepstral split of a sampled response. The min-phase part has real positive
// cepstral gain, so any constant phase ends up in the all-pass part.
DecomposedChannel decompose_cfr(const Cfr& h);

// Square root of a squared all-pass spectrum, exact up to a global sign. The
// input is fitted as a rational all-pass of the lowest order; inputs that fit no
// such model fall back to phase continuity from bin 0. Rejects inputs whose magnitude deviates from 1 by more than 0.05.
Cfr allpass_sqrt(const Cfr& ap_squared);

}  // namespace pls
