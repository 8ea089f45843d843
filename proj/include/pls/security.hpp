#pragma once

#include "pls/channel.hpp"
#include "pls/decomposition.hpp"
#include "pls/ofdm.hpp"

#include <cstddef>
#include <cstdint>
#include <span>

namespace pls {

enum class SchemeMode { Baseline, DataSecurity, PilotSecurity, Joint };
enum class CsiMode { Perfect, Estimated };
enum class EveEqualizer { Full, MinPhase };

// How the pilot precoder's free global phase is pinned down.
// PilotMean: the precoder averages to a real positive value over the pilot bins.
// AnchorBin: the precoder is real positive at the first pilot bin.
enum class PhaseReference { PilotMean, AnchorBin };

bool precodes_data(SchemeMode mode);
bool precodes_pilots(SchemeMode mode);

// All-pass rotated so that its phase reference over the pilots is zero.
ComplexVec pilot_allpass(const Cfr& all_pass, const OfdmGrid& grid, PhaseReference ref);

// decomp is the factorization of the Alice-Bob channel; it may be null for Baseline.
OfdmSymbol alice_precode(const OfdmGrid& grid, std::span<const cplx> data_symbols,
                         SchemeMode mode, const DecomposedChannel* decomp,
                         PhaseReference ref = PhaseReference::PilotMean);

struct LinkOutcome {
    Bits decoded_bits;
    std::size_t bit_errors = 0;
    ChannelEstimate channel_estimate;
    double channel_nmse = 0.0;
};

struct ReceiverConfig {
    CsiMode csi = CsiMode::Estimated;
    EstimationMethod estimator = EstimationMethod::MMSE;
    Interpolation interpolation = Interpolation::Linear;
    double noise_var = 0.0;  // frequency-domain, per subcarrier
    PowerDelayProfile pdp;   // prior for MMSE; its length is the tap count
    PhaseReference phase_ref = PhaseReference::PilotMean;
    // Optional prebuilt MMSE filter matching grid, pdp and noise_var.
    const MmseEstimator* mmse = nullptr;
};

struct EveConfig : ReceiverConfig {
    bool knows_channel = true;
    EveEqualizer equalizer = EveEqualizer::Full;
};

LinkOutcome bob_receive(std::span<const cplx> rx_freq, const OfdmGrid& grid, SchemeMode mode,
                        const ReceiverConfig& cfg, const ChannelTaps& h_ab,
                        std::span<const std::uint8_t> tx_bits);

LinkOutcome eve_receive(std::span<const cplx> rx_freq, const OfdmGrid& grid, SchemeMode mode,
                        const EveConfig& cfg, const ChannelTaps& h_ae,
                        std::span<const std::uint8_t> tx_bits);

// H^2 up to a constant phase, as 2L-1 taps, from LS samples of H * pilot_allpass(H)
// at comb pilots 0, s, 2s, ... (power-of-two count of at least 2L - 1).
ComplexVec squared_channel_from_secured_pilots(std::span<const cplx> pilot_values,
                                               const OfdmGrid& grid, std::size_t num_taps);

struct PilotReconstruction {
    ChannelTaps taps;
    Cfr cfr;
    double residual = 0.0;  // relative misfit of h*h against the recovered square
};

// Recovers an L-tap channel from the same samples.
PilotReconstruction reconstruct_from_secured_pilots(std::span<const cplx> pilot_values,
                                                    const OfdmGrid& grid, std::size_t num_taps,
                                                    PhaseReference ref);

}  // namespace pls
