#pragma once

#include "pls/channel.hpp"
#include "pls/numerics.hpp"
#include "pls/rng.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pls {

struct OfdmGrid {
    std::size_t n = 256;
    std::size_t cp_len = 64;
    std::vector<std::size_t> pilot_indices;
    std::vector<std::size_t> data_indices;
    ComplexVec pilot_values;

    // Comb pilots at offset, offset + spacing, ... with unit-modulus QPSK values
    // drawn from pilot_seed.
    static OfdmGrid comb(std::size_t n, std::size_t cp_len, std::size_t spacing,
                         std::size_t offset = 0, std::uint64_t pilot_seed = 1);

    std::size_t pilot_spacing() const;
    void validate() const;
};

struct OfdmSymbol {
    ComplexVec freq;
    ComplexVec time;
};

enum class EstimationMethod { LS, MMSE };
enum class Interpolation { Linear, Spline };

struct ChannelEstimate {
    Cfr values;
    EstimationMethod method = EstimationMethod::LS;
    double noise_var = 0.0;
};

using Bits = std::vector<std::uint8_t>;

ComplexVec qpsk_map(std::span<const std::uint8_t> bits);
Bits qpsk_demap(std::span<const cplx> symbols);

// Frequency grid with pilots at k_p and the given symbols at k_d.
ComplexVec assemble(const OfdmGrid& grid, std::span<const cplx> data_symbols);
// CP-prefixed IFFT of an arbitrary frequency grid.
OfdmSymbol make_symbol(const OfdmGrid& grid, ComplexVec freq);
OfdmSymbol modulate(const OfdmGrid& grid, std::span<const cplx> data_symbols);
ComplexVec demodulate(std::span<const cplx> time, const OfdmGrid& grid);

// Linear convolution truncated to the input length (the channel starts from rest).
ComplexVec apply_channel(std::span<const cplx> time, const ChannelTaps& h);

// Noise variance set from the measured signal power. snr_db = +inf leaves the signal unchanged.
ComplexVec awgn(std::span<const cplx> signal, double snr_db, Rng& rng);
ComplexVec add_noise(std::span<const cplx> signal, double variance, Rng& rng);

// Raw per-pilot division Y(k_p) / P(k_p).
ComplexVec pilot_ls(std::span<const cplx> rx_freq, const OfdmGrid& grid);

ChannelEstimate ls_estimate(std::span<const cplx> rx_freq, const OfdmGrid& grid,
                            Interpolation interp = Interpolation::Linear);

// Linear MMSE estimator for an L-tap channel observed at the pilots. The filter
// depends only on the grid, the prior and the noise variance, so it is built once
// and reused across symbols.
class MmseEstimator {
public:
    MmseEstimator(const OfdmGrid& grid, const Eigen::MatrixXcd& r_hh, double noise_var);

    ChannelTaps taps(std::span<const cplx> rx_freq) const;
    ChannelEstimate estimate(std::span<const cplx> rx_freq) const;

private:
    const OfdmGrid* grid_;
    Eigen::MatrixXcd filter_;  // L x P
    double noise_var_;
};

Eigen::MatrixXcd diagonal_prior(const PowerDelayProfile& pdp);

ChannelEstimate mmse_estimate(std::span<const cplx> rx_freq, const OfdmGrid& grid,
                              const Eigen::MatrixXcd& r_hh, double noise_var);

ComplexVec equalize(std::span<const cplx> rx_freq, const Cfr& est,
                    std::span<const std::size_t> indices);

}  // namespace pls
