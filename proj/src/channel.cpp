#include "pls/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace pls {

PowerDelayProfile exp_pdp(std::size_t num_taps, double decay) {
    if (num_taps == 0) throw std::invalid_argument("power delay profile needs at least one tap");
    if (!(decay > 0.0) || !std::isfinite(decay)) {
        throw std::invalid_argument("pdp decay must be positive");
    }
    PowerDelayProfile pdp;
    pdp.powers.resize(num_taps);
    double total = 0.0;
    for (std::size_t l = 0; l < num_taps; ++l) {
        pdp.powers[l] = std::exp(-static_cast<double>(l) / decay);
        total += pdp.powers[l];
    }
    for (auto& p : pdp.powers) p /= total;
    return pdp;
}

ChannelTaps draw_channel(const PowerDelayProfile& pdp, Rng& rng) {
    ChannelTaps h;
    h.taps.reserve(pdp.powers.size());
    for (double p : pdp.powers) h.taps.push_back(rng.complex_normal(p));
    return h;
}

ChannelTaps draw_correlated(const ChannelTaps& h, const PowerDelayProfile& pdp, double rho,
                            Rng& rng) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
    if (h.taps.size() != pdp.powers.size()) {
        throw std::invalid_argument("channel and power delay profile lengths differ");
    }
    const double s = std::sqrt(1.0 - rho * rho);
    ChannelTaps out;
    out.taps.reserve(h.taps.size());
    for (std::size_t l = 0; l < h.taps.size(); ++l) {
        out.taps.push_back(rho * h.taps[l] + s * rng.complex_normal(pdp.powers[l]));
    }
    return out;
}

Cfr cfr_of(const ChannelTaps& h, std::size_t n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("subcarrier count must be a power of two");
    if (h.taps.size() > n) throw std::invalid_argument("more taps than subcarriers");
    return Cfr{fft_padded(h.taps, n)};
}

}  // namespace pls
