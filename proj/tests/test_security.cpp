#include "pls/analysis.hpp"
#include "pls/harness.hpp"
#include "pls/security.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pls;

namespace {

const SchemeMode kModes[] = {SchemeMode::Baseline, SchemeMode::DataSecurity,
                             SchemeMode::PilotSecurity, SchemeMode::Joint};

Bits random_bits(std::size_t n, Rng& rng) {
    Bits b(n);
    for (auto& v : b) v = rng.bit();
    return b;
}

struct Link {
    OfdmGrid grid = OfdmGrid::comb(256, 64, 4);
    PowerDelayProfile pdp = exp_pdp(11, 1.0);
};

ComplexVec transmit(const OfdmGrid& g, const OfdmSymbol& s, const ChannelTaps& h, double nv, Rng& rng) {
    return demodulate(add_noise(apply_channel(s.time, h), nv / static_cast<double>(g.n), rng), g);
}

}  // namespace

TEST(PilotAllpass, MeanOverPilotsIsRealPositive) {
    Link l;
    Rng rng(1);
    const auto d = decompose_fir(draw_channel(l.pdp, rng), 256);
    const auto pa = pilot_allpass(d.all_pass, l.grid, PhaseReference::PilotMean);
    cplx s{};
    for (auto k : l.grid.pilot_indices) s += pa[k];
    EXPECT_GT(s.real(), 0.0);
    EXPECT_NEAR(s.imag(), 0.0, 1e-12);
    const auto pb = pilot_allpass(d.all_pass, l.grid, PhaseReference::AnchorBin);
    EXPECT_NEAR(std::abs(pb[0] - cplx{1.0, 0.0}), 0.0, 1e-12);
}

TEST(AlicePrecode, TrivialAllPassLeavesSymbolUnchanged) {
    Link l;
    Rng rng(2);
    const auto data = qpsk_map(random_bits(384, rng));
    const auto d = decompose_fir(ChannelTaps{{1.0, 0.5}}, 256);
    const auto base = alice_precode(l.grid, data, SchemeMode::Baseline, nullptr);
    for (auto m : kModes) {
        const auto s = alice_precode(l.grid, data, m, &d);
        for (std::size_t k = 0; k < 256; ++k) EXPECT_NEAR(std::abs(s.freq[k] - base.freq[k]), 0.0, 1e-12);
    }
}

TEST(AlicePrecode, DataPrecodingKeepsModulusAndPilots) {
    Link l;
    Rng rng(3);
    const auto data = qpsk_map(random_bits(384, rng));
    const auto d = decompose_fir(draw_channel(l.pdp, rng), 256);
    const auto s = alice_precode(l.grid, data, SchemeMode::DataSecurity, &d);
    for (std::size_t i = 0; i < l.grid.data_indices.size(); ++i) {
        EXPECT_NEAR(std::abs(s.freq[l.grid.data_indices[i]]), std::abs(data[i]), 1e-12);
    }
    for (std::size_t i = 0; i < l.grid.pilot_indices.size(); ++i) {
        EXPECT_EQ(s.freq[l.grid.pilot_indices[i]], l.grid.pilot_values[i]);
    }
    EXPECT_THROW(alice_precode(l.grid, data, SchemeMode::Joint, nullptr), std::invalid_argument);
}

TEST(BobReceive, NoiselessTransparencyInEveryMode) {
    Link l;
    Rng rng(4);
    for (int t = 0; t < 30; ++t) {
        const auto h = draw_channel(l.pdp, rng);
        const auto bits = random_bits(384, rng);
        const auto d = decompose_fir(h, 256);
        for (auto m : kModes) {
            for (auto csi : {CsiMode::Perfect, CsiMode::Estimated}) {
                const auto s = alice_precode(l.grid, qpsk_map(bits), m, &d);
                const auto rx = transmit(l.grid, s, h, 0.0, rng);
                ReceiverConfig cfg;
                cfg.csi = csi;
                cfg.pdp = l.pdp;
                const auto out = bob_receive(rx, l.grid, m, cfg, h, bits);
                EXPECT_EQ(out.bit_errors, 0u) << pls::to_string(m);
                EXPECT_LT(out.channel_nmse, 1e-6) << pls::to_string(m);
            }
        }
    }
}

TEST(BobReceive, AnchorReferenceAlsoRecovers) {
    Link l;
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto h = draw_channel(l.pdp, rng);
        const auto bits = random_bits(384, rng);
        const auto d = decompose_fir(h, 256);
        const auto s = alice_precode(l.grid, qpsk_map(bits), SchemeMode::Joint, &d, PhaseReference::AnchorBin);
        ReceiverConfig cfg;
        cfg.pdp = l.pdp;
        cfg.phase_ref = PhaseReference::AnchorBin;
        const auto out = bob_receive(transmit(l.grid, s, h, 0.0, rng), l.grid, SchemeMode::Joint, cfg, h, bits);
        EXPECT_EQ(out.bit_errors, 0u);
        EXPECT_LT(out.channel_nmse, 1e-6);
    }
}

TEST(BobReceive, BaselineMatchesClosedFormAt30dB) {
    Link l;
    Rng rng(6);
    const double snr_db = 30.0;
    const double gamma = std::pow(10.0, snr_db / 10.0);
    const double nv = 0.5 / gamma;
    ReceiverConfig cfg;
    cfg.csi = CsiMode::Perfect;
    cfg.pdp = l.pdp;
    std::size_t errors = 0, bits_total = 0;
    for (int t = 0; t < 3000; ++t) {
        const auto h = draw_channel(l.pdp, rng);
        const auto bits = random_bits(384, rng);
        const auto s = alice_precode(l.grid, qpsk_map(bits), SchemeMode::Baseline, nullptr);
        errors += bob_receive(transmit(l.grid, s, h, nv, rng), l.grid, SchemeMode::Baseline, cfg, h, bits).bit_errors;
        bits_total += bits.size();
    }
    const double ber = static_cast<double>(errors) / static_cast<double>(bits_total);
    EXPECT_NEAR(ber, bep_perfect(gamma), 0.15 * bep_perfect(gamma));
}

TEST(EveReceive, ResidualRotationIsTheConjugateAllPass) {
    Link l;
    Rng rng(7);
    const auto h_ab = draw_channel(l.pdp, rng);
    const auto h_ae = draw_channel(l.pdp, rng);
    const auto data = qpsk_map(random_bits(384, rng));
    const auto d = decompose_fir(h_ab, 256);
    const auto s = alice_precode(l.grid, data, SchemeMode::DataSecurity, &d);
    const auto rx = transmit(l.grid, s, h_ae, 0.0, rng);
    const auto eq = equalize(rx, cfr_of(h_ae, 256), l.grid.data_indices);
    for (std::size_t i = 0; i < eq.size(); ++i) {
        const auto k = l.grid.data_indices[i];
        EXPECT_NEAR(std::abs(eq[i] - std::conj(d.all_pass.values[k]) * data[i]), 0.0, 1e-9);
    }
}

TEST(EveReceive, NothingToHideMeansNoProtection) {
    Link l;
    Rng rng(8);
    const ChannelTaps h_ab{{1.0, 0.5}};
    const auto h_ae = draw_channel(l.pdp, rng);
    const auto bits = random_bits(384, rng);
    const auto d = decompose_fir(h_ab, 256);
    EveConfig cfg;
    cfg.pdp = l.pdp;
    for (auto m : kModes) {
        const auto s = alice_precode(l.grid, qpsk_map(bits), m, &d);
        const auto out = eve_receive(transmit(l.grid, s, h_ae, 0.0, rng), l.grid, m, cfg, h_ae, bits);
        EXPECT_EQ(out.bit_errors, 0u) << pls::to_string(m);
    }
}

TEST(EveReceive, FullyCorrelatedMinPhaseEveDecodes) {
    Link l;
    Rng rng(9);
    const auto h = draw_channel(l.pdp, rng);
    const auto bits = random_bits(384, rng);
    const auto d = decompose_fir(h, 256);
    const auto s = alice_precode(l.grid, qpsk_map(bits), SchemeMode::DataSecurity, &d);
    EveConfig cfg;
    cfg.pdp = l.pdp;
    cfg.equalizer = EveEqualizer::MinPhase;
    const auto out = eve_receive(transmit(l.grid, s, h, 0.0, rng), l.grid, SchemeMode::DataSecurity, cfg, h, bits);
    EXPECT_EQ(out.bit_errors, 0u);
}

TEST(EveReceive, SecuredPilotsMisleadHerEstimate) {
    Link l;
    Rng rng(10);
    double acc = 0.0;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
        const auto h_ab = draw_channel(l.pdp, rng);
        const auto h_ae = draw_channel(l.pdp, rng);
        const auto bits = random_bits(384, rng);
        const auto d = decompose_fir(h_ab, 256);
        const auto s = alice_precode(l.grid, qpsk_map(bits), SchemeMode::PilotSecurity, &d);
        EveConfig cfg;
        cfg.pdp = l.pdp;
        acc += eve_receive(transmit(l.grid, s, h_ae, 0.0, rng), l.grid, SchemeMode::PilotSecurity, cfg, h_ae, bits)
                   .channel_nmse;
    }
    // Bob recovers his channel to < 1e-6 in the same setting.
    EXPECT_GT(to_db(acc / trials), -10.0);
}

TEST(Reconstruction, RejectsUnsupportedPilotLayouts) {
    const auto g = OfdmGrid::comb(256, 64, 4, 1);
    EXPECT_THROW(reconstruct_from_secured_pilots(ComplexVec(64, 1.0), g, 11, PhaseReference::PilotMean),
                 std::invalid_argument);
    const auto sparse = OfdmGrid::comb(256, 64, 16);
    EXPECT_THROW(reconstruct_from_secured_pilots(ComplexVec(16, 1.0), sparse, 11, PhaseReference::PilotMean),
                 std::invalid_argument);
}
