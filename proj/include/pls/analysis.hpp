#pragma once

#include "pls/channel.hpp"
#include "pls/decomposition.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pls {

struct BepParams {
    double gamma_bar = 1.0;
    double rho1 = 1.0;
    double rho2 = 0.0;
};

// QPSK over Rayleigh fading with an imperfect channel estimate.
double bep_imperfect(const BepParams& p);
double bep_perfect(double gamma_bar);
double bep_correlated(double gamma_bar, double rho);
// High-SNR limit of bep_correlated.
double bep_correlated_floor(double rho);

double gamma_factor(double rho);
double rho_min(double rho);

double nmse(const Cfr& est, const Cfr& truth);
double to_db(double linear);

double papr_db(std::span<const cplx> time);

struct CcdfCurve {
    std::vector<double> thresholds;
    std::vector<double> probabilities;
};

CcdfCurve ccdf(std::span<const double> samples, std::span<const double> thresholds);
// Smallest sample x with P(sample > x) <= p.
double ccdf_level(std::span<const double> samples, double p);

struct ChannelPair {
    DecomposedChannel a;
    DecomposedChannel b;
};

inline constexpr std::size_t kMinCorrelationPairs = 1000;

// |sum conj(a) b| / sqrt(sum|a|^2 sum|b|^2) over the min-phase responses, pooled
// over subcarriers and pairs.
double empirical_min_phase_correlation(std::span<const ChannelPair> pairs);
// Same statistic per subcarrier.
std::vector<double> per_subcarrier_min_phase_correlation(std::span<const ChannelPair> pairs);

}  // namespace pls
