#include "pls/security.hpp"

#include "pls/analysis.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace pls {

namespace {

// Oversampling of the fine grid used to take square roots by phase continuity.
constexpr std::size_t kFineFactor = 16;
// Relative floor on the interpolated power spectrum.
constexpr double kPowerFloor = 1e-6;
// Circles on which square roots are tried by phase continuity.
constexpr double kContinuityRadii[] = {1.0, 0.85, 1.15};

std::size_t count_errors(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("bit sequences differ in length");
    std::size_t e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] != b[i]) ? 1 : 0;
    return e;
}

ChannelTaps truncate_taps(const Cfr& cfr, std::size_t num_taps) {
    ComplexVec t = ifft(cfr.values);
    t.resize(num_taps);
    return ChannelTaps{std::move(t)};
}

struct TapEstimate {
    ChannelEstimate estimate;
    ChannelTaps taps;
};

// Standard pilot-based estimate; the taps are an L-tap projection of it.
TapEstimate estimate_channel(std::span<const cplx> rx, const OfdmGrid& grid,
                             const ReceiverConfig& cfg) {
    const std::size_t num_taps = cfg.pdp.powers.size();
    TapEstimate out;
    if (cfg.estimator == EstimationMethod::MMSE) {
        std::optional<MmseEstimator> local;
        const MmseEstimator* est = cfg.mmse;
        if (est == nullptr) {
            local.emplace(grid, diagonal_prior(cfg.pdp), cfg.noise_var);
            est = &*local;
        }
        out.taps = est->taps(rx);
        out.estimate.method = EstimationMethod::MMSE;
        out.estimate.noise_var = cfg.noise_var;
        out.estimate.values = cfr_of(out.taps, grid.n);
    } else {
        out.estimate = ls_estimate(rx, grid, cfg.interpolation);
        out.estimate.noise_var = cfg.noise_var;
        out.taps = truncate_taps(out.estimate.values, num_taps);
    }
    return out;
}

ChannelEstimate exact_estimate(const Cfr& h) {
    ChannelEstimate e;
    e.values = h;
    e.method = EstimationMethod::LS;
    return e;
}

LinkOutcome decode(std::span<const cplx> rx, const OfdmGrid& grid, const Cfr& equalizer,
                   std::span<const std::uint8_t> tx_bits) {
    LinkOutcome out;
    const ComplexVec sym = equalize(rx, equalizer, grid.data_indices);
    out.decoded_bits = qpsk_demap(sym);
    out.bit_errors = count_errors(out.decoded_bits, tx_bits);
    return out;
}

ComplexVec self_convolve(std::span<const cplx> h) { return convolve(h, h); }

double square_residual(std::span<const cplx> h, std::span<const cplx> g) {
    const ComplexVec hh = self_convolve(h);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        num += std::norm(hh[i] - g[i]);
        den += std::norm(g[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Gauss-Newton on h * h = g.
ComplexVec refine_square_root(ComplexVec h, std::span<const cplx> g) {
    const auto l = static_cast<Eigen::Index>(h.size());
    const auto m = static_cast<Eigen::Index>(g.size());
    for (int it = 0; it < 20; ++it) {
        const ComplexVec hh = self_convolve(h);
        Eigen::VectorXcd r(m);
        for (Eigen::Index i = 0; i < m; ++i) r(i) = hh[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(i)];
        Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(m, l);
        for (Eigen::Index c = 0; c < l; ++c) {
            for (Eigen::Index i = 0; i < l; ++i) j(c + i, c) += 2.0 * h[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXcd d = j.colPivHouseholderQr().solve(-r);
        if (!d.allFinite()) break;
        for (Eigen::Index i = 0; i < l; ++i) h[static_cast<std::size_t>(i)] += d(i);
        if (d.norm() < 1e-14) break;
    }
    return h;
}

// Square root of a sequence by phase continuity of its z-transform sampled on
// the circle |z| = radius. Moving off the unit circle sidesteps zeros close to it.
ComplexVec sqrt_by_continuity(std::span<const cplx> g, std::size_t num_taps, std::size_t fine,
                              double radius) {
    ComplexVec scaled(g.begin(), g.end());
    double w = 1.0;
    for (auto& v : scaled) {
        v *= w;
        w /= radius;
    }
    ComplexVec h = ifft(continuous_sqrt(fft_padded(scaled, fine)));
    h.resize(num_taps);
    w = 1.0;
    for (auto& v : h) {
        v *= w;
        w *= radius;
    }
    return h;
}

// Square root of a sequence by pairing its zeros, closest pair first.
std::optional<ComplexVec> sqrt_by_roots(std::span<const cplx> g, std::size_t num_taps) {
    PolyRoots pr;
    try {
        pr = poly_roots(g);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (pr.delay != 0 || pr.roots.size() != 2 * (num_taps - 1)) return std::nullopt;
    ComplexVec left = pr.roots;
    ComplexVec half;
    while (!left.empty()) {
        std::size_t bi = 0;
        std::size_t bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < left.size(); ++i) {
            for (std::size_t j = i + 1; j < left.size(); ++j) {
                const double d = std::abs(left[i] - left[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        half.push_back(0.5 * (left[bi] + left[bj]));
        left.erase(left.begin() + static_cast<std::ptrdiff_t>(bj));
        left.erase(left.begin() + static_cast<std::ptrdiff_t>(bi));
    }
    return poly_from_roots(half, std::sqrt(pr.leading_coeff));
}

std::span<const std::size_t> reference_bins(const OfdmGrid& grid, PhaseReference ref) {
    std::span<const std::size_t> kp(grid.pilot_indices);
    return ref == PhaseReference::AnchorBin ? kp.first(1) : kp;
}

}  // namespace

bool precodes_data(SchemeMode mode) {
    return mode == SchemeMode::DataSecurity || mode == SchemeMode::Joint;
}

bool precodes_pilots(SchemeMode mode) {
    return mode == SchemeMode::PilotSecurity || mode == SchemeMode::Joint;
}

ComplexVec pilot_allpass(const Cfr& all_pass, const OfdmGrid& grid, PhaseReference ref) {
    if (all_pass.values.size() != grid.n) throw std::invalid_argument("all-pass size mismatch");
    cplx s{};
    for (auto k : reference_bins(grid, ref)) s += all_pass.values[k];
    if (std::abs(s) < 1e-12) s = all_pass.values[grid.pilot_indices.front()];
    const cplx rot = std::conj(s) / std::abs(s);
    ComplexVec out(all_pass.values);
    for (auto& v : out) v *= rot;
    return out;
}

OfdmSymbol alice_precode(const OfdmGrid& grid, std::span<const cplx> data_symbols,
                         SchemeMode mode, const DecomposedChannel* decomp, PhaseReference ref) {
    ComplexVec freq = assemble(grid, data_symbols);
    if (mode == SchemeMode::Baseline) return make_symbol(grid, std::move(freq));
    if (decomp == nullptr) throw std::invalid_argument("secured modes need the channel decomposition");
    const auto& ap = decomp->all_pass.values;
    if (ap.size() != grid.n) throw std::invalid_argument("decomposition size mismatch");
    if (precodes_data(mode)) {
        for (auto k : grid.data_indices) freq[k] *= std::conj(ap[k]);
    }
    if (precodes_pilots(mode)) {
        const ComplexVec pa = pilot_allpass(decomp->all_pass, grid, ref);
        for (auto k : grid.pilot_indices) freq[k] *= pa[k];
    }
    return make_symbol(grid, std::move(freq));
}

ComplexVec squared_channel_from_secured_pilots(std::span<const cplx> pilot_values,
                                               const OfdmGrid& grid, std::size_t num_taps) {
    const std::size_t p = grid.pilot_indices.size();
    const std::size_t spacing = grid.pilot_spacing();
    if (pilot_values.size() != p) throw std::invalid_argument("pilot sample count mismatch");
    if (!is_power_of_two(p) || p < 2 * num_taps - 1 || num_taps == 0) {
        throw std::invalid_argument("secured pilots need a power-of-two count of at least 2L-1");
    }
    for (std::size_t i = 0; i < p; ++i) {
        if (grid.pilot_indices[i] != i * spacing) {
            throw std::invalid_argument("secured pilots must be a comb starting at bin 0");
        }
    }
    const std::size_t fine = kFineFactor * grid.n;

    // |C|^2 = |H|^2 is a trigonometric polynomial with lags below L.
    ComplexVec power(p);
    for (std::size_t i = 0; i < p; ++i) power[i] = std::norm(pilot_values[i]);
    const ComplexVec r = ifft(power);
    ComplexVec lags(fine, cplx{});
    for (std::size_t m = 0; m < num_taps; ++m) lags[m] = r[m];
    for (std::size_t m = 1; m < num_taps; ++m) lags[fine - m] = r[p - m];
    const ComplexVec fine_power = fft(lags);
    double peak = 0.0;
    for (const auto& v : fine_power) peak = std::max(peak, v.real());
    if (!(peak > 0.0)) throw std::runtime_error("secured pilots carry no power");
    std::vector<double> mag(fine);
    for (std::size_t k = 0; k < fine; ++k) mag[k] = std::sqrt(std::max(fine_power[k].real(), kPowerFloor * peak));
    const ComplexVec fine_min = min_phase_from_magnitude(mag);

    // H_min * C equals H^2 up to a constant phase, a (2L-1)-tap sequence.
    const std::size_t stride = fine / grid.n * spacing;
    ComplexVec prod(p);
    for (std::size_t i = 0; i < p; ++i) prod[i] = fine_min[i * stride] * pilot_values[i];
    ComplexVec g = ifft(prod);
    g.resize(2 * num_taps - 1);
    return g;
}

PilotReconstruction reconstruct_from_secured_pilots(std::span<const cplx> pilot_values,
                                                    const OfdmGrid& grid, std::size_t num_taps,
                                                    PhaseReference ref) {
    const ComplexVec g = squared_channel_from_secured_pilots(pilot_values, grid, num_taps);
    const std::size_t p = grid.pilot_indices.size();
    const std::size_t fine = kFineFactor * grid.n;

    std::vector<ComplexVec> candidates;
    for (double radius : kContinuityRadii) {
        candidates.push_back(refine_square_root(sqrt_by_continuity(g, num_taps, fine, radius), g));
    }
    if (auto rooted = sqrt_by_roots(g, num_taps)) {
        candidates.push_back(refine_square_root(std::move(*rooted), g));
    }
    PilotReconstruction out;
    out.residual = std::numeric_limits<double>::infinity();
    ComplexVec h0;
    for (auto& c : candidates) {
        const double res = square_residual(c, g);
        if (res < out.residual) {
            out.residual = res;
            h0 = std::move(c);
        }
    }

    // Resolve the global phase against the precoded pilots as Alice would form them.
    const ChannelTaps h0_taps{h0};
    const Cfr h0_cfr = cfr_of(h0_taps, grid.n);
    const ComplexVec pa = pilot_allpass(decompose_fir(h0_taps, grid.n).all_pass, grid, ref);
    cplx acc{};
    const std::size_t used = ref == PhaseReference::AnchorBin ? 1 : p;
    for (std::size_t i = 0; i < used; ++i) {
        const auto k = grid.pilot_indices[i];
        acc += std::conj(h0_cfr.values[k] * pa[k]) * pilot_values[i];
    }
    const cplx rot = std::abs(acc) > 0.0 ? acc / std::abs(acc) : cplx{1.0, 0.0};
    out.taps.taps = h0;
    for (auto& v : out.taps.taps) v *= rot;
    out.cfr = cfr_of(out.taps, grid.n);
    return out;
}

LinkOutcome bob_receive(std::span<const cplx> rx_freq, const OfdmGrid& grid, SchemeMode mode,
                        const ReceiverConfig& cfg, const ChannelTaps& h_ab,
                        std::span<const std::uint8_t> tx_bits) {
    const Cfr truth = cfr_of(h_ab, grid.n);
    const std::size_t num_taps = cfg.pdp.powers.empty() ? h_ab.taps.size() : cfg.pdp.powers.size();

    ChannelEstimate est;
    ChannelTaps taps;
    if (cfg.csi == CsiMode::Perfect) {
        est = exact_estimate(truth);
        taps = h_ab;
    } else if (precodes_pilots(mode)) {
        const auto rec = reconstruct_from_secured_pilots(pilot_ls(rx_freq, grid), grid, num_taps,
                                                         cfg.phase_ref);
        est.values = rec.cfr;
        est.method = EstimationMethod::LS;
        est.noise_var = cfg.noise_var;
        taps = rec.taps;
    } else {
        auto te = estimate_channel(rx_freq, grid, cfg);
        est = std::move(te.estimate);
        taps = std::move(te.taps);
    }

    Cfr equalizer = est.values;
    if (precodes_data(mode)) equalizer = decompose_fir(taps, grid.n).min_phase;
    LinkOutcome out = decode(rx_freq, grid, equalizer, tx_bits);
    out.channel_nmse = nmse(est.values, truth);
    out.channel_estimate = std::move(est);
    return out;
}

LinkOutcome eve_receive(std::span<const cplx> rx_freq, const OfdmGrid& grid, SchemeMode mode,
                        const EveConfig& cfg, const ChannelTaps& h_ae,
                        std::span<const std::uint8_t> tx_bits) {
    (void)mode;  // Eve is not told which scheme Alice uses
    const Cfr truth = cfr_of(h_ae, grid.n);
    // Eve runs a standard estimator; with secured pilots it targets H_ae times the precoder.
    ReceiverConfig est_cfg = cfg;
    est_cfg.csi = CsiMode::Estimated;
    TapEstimate te = estimate_channel(rx_freq, grid, est_cfg);

    const Cfr& full = cfg.knows_channel ? truth : te.estimate.values;
    Cfr equalizer = full;
    if (cfg.equalizer == EveEqualizer::MinPhase) {
        equalizer = decompose_fir(cfg.knows_channel ? h_ae : te.taps, grid.n).min_phase;
    }
    LinkOutcome out = decode(rx_freq, grid, equalizer, tx_bits);
    out.channel_nmse = nmse(te.estimate.values, truth);
    out.channel_estimate = std::move(te.estimate);
    return out;
}

}  // namespace pls
