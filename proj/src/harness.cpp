#include "pls/harness.hpp"

#include "pls/analysis.hpp"
#include "pls/decomposition.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <system_error>
#include <thread>

namespace pls {

namespace {

// Runs body(i) for i in [0, count) on up to `workers` threads. Results must be
// written to slots indexed by i so the outcome does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body body) {
    const unsigned w = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
    if (w <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(count);
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct TrialResult {
    std::size_t bob_errors = 0;
    std::size_t eve_errors = 0;
    double bob_nmse = 0.0;
    double eve_nmse = 0.0;
};

Bits random_bits(std::size_t count, Rng& rng) {
    Bits b(count);
    for (auto& v : b) v = rng.bit();
    return b;
}

double sample_sd(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!is_power_of_two(n)) throw std::invalid_argument("n must be a power of two");
    if (num_taps == 0 || num_taps > n) throw std::invalid_argument("num_taps must lie in [1, n]");
    if (cp_len + 1 < num_taps) throw std::invalid_argument("cp_len must be at least num_taps - 1");
    if (cp_len > n) throw std::invalid_argument("cp_len must not exceed n");
    if (!(pilot_rate > 0.0 && pilot_rate < 1.0)) {
        throw std::invalid_argument("pilot_rate must lie in (0, 1)");
    }
    const double inv = 1.0 / pilot_rate;
    const double spacing = std::round(inv);
    if (std::abs(inv - spacing) > 1e-9 || n % static_cast<std::size_t>(spacing) != 0) {
        throw std::invalid_argument("pilot_rate must be 1/s with s dividing n");
    }
    if (pilot_offset >= static_cast<std::size_t>(spacing)) {
        throw std::invalid_argument("pilot_offset must be below the pilot spacing");
    }
    if (constellation != "qpsk") throw std::invalid_argument("only qpsk is supported");
    if (!(pdp_decay > 0.0) || !std::isfinite(pdp_decay)) {
        throw std::invalid_argument("pdp_decay must be positive");
    }
    if (snr_grid_db.empty()) throw std::invalid_argument("snr_grid_db must not be empty");
    for (double s : snr_grid_db) {
        if (std::isnan(s) || (std::isinf(s) && s < 0.0)) {
            throw std::invalid_argument("snr values must be finite or +inf");
        }
    }
    if (rho_grid.empty()) throw std::invalid_argument("rho_grid must not be empty");
    for (double r : rho_grid) {
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("rho values must lie in [0, 1]");
    }
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

std::size_t ExperimentConfig::pilot_spacing() const {
    return static_cast<std::size_t>(std::round(1.0 / pilot_rate));
}

OfdmGrid ExperimentConfig::grid() const {
    return OfdmGrid::comb(n, cp_len, pilot_spacing(), pilot_offset, pilot_seed);
}

PowerDelayProfile ExperimentConfig::pdp() const { return exp_pdp(num_taps, pdp_decay); }

double noise_variance_for_snr(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
    return 0.5 * std::pow(10.0, -snr_db / 10.0);
}

double LinkPointStats::bob_ber() const {
    return bits ? static_cast<double>(bob_errors) / static_cast<double>(bits) : 0.0;
}

double LinkPointStats::eve_ber() const {
    return bits ? static_cast<double>(eve_errors) / static_cast<double>(bits) : 0.0;
}

std::vector<LinkPointStats> simulate_link(const ExperimentConfig& cfg) {
    cfg.validate();
    const OfdmGrid grid = cfg.grid();
    const PowerDelayProfile pdp = cfg.pdp();
    const std::size_t bits_per_trial = 2 * grid.data_indices.size();
    const SchemeMode mode = cfg.scheme;

    std::vector<LinkPointStats> out;
    const std::size_t nsnr = cfg.snr_grid_db.size();
    for (std::size_t ri = 0; ri < cfg.rho_grid.size(); ++ri) {
        for (std::size_t si = 0; si < nsnr; ++si) {
            const double rho = cfg.rho_grid[ri];
            const double snr = cfg.snr_grid_db[si];
            const std::uint64_t grid_index = ri * nsnr + si;
            const double nv = noise_variance_for_snr(snr);
            const double nv_time = nv / static_cast<double>(grid.n);

            ReceiverConfig bob_cfg;
            bob_cfg.csi = cfg.csi_mode;
            bob_cfg.estimator = cfg.estimator;
            bob_cfg.interpolation = cfg.interpolation;
            bob_cfg.noise_var = nv;
            bob_cfg.pdp = pdp;
            bob_cfg.phase_ref = cfg.phase_reference;
            std::optional<MmseEstimator> mmse;
            if (cfg.estimator == EstimationMethod::MMSE) {
                mmse.emplace(grid, diagonal_prior(pdp), nv);
                bob_cfg.mmse = &*mmse;
            }
            EveConfig eve_cfg;
            static_cast<ReceiverConfig&>(eve_cfg) = bob_cfg;
            eve_cfg.knows_channel = cfg.eve_knows_channel;
            switch (cfg.eve_equalizer) {
                case EveEqualizerChoice::Full: eve_cfg.equalizer = EveEqualizer::Full; break;
                case EveEqualizerChoice::MinPhase: eve_cfg.equalizer = EveEqualizer::MinPhase; break;
                case EveEqualizerChoice::Auto:
                    eve_cfg.equalizer = rho > 0.0 ? EveEqualizer::MinPhase : EveEqualizer::Full;
                    break;
            }

            std::vector<TrialResult> results(cfg.trials);
            parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
                Rng rng = Rng::for_trial(cfg.master_seed, grid_index, t);
                const ChannelTaps h_ab = draw_channel(pdp, rng);
                const ChannelTaps h_ae = draw_correlated(h_ab, pdp, rho, rng);
                const Bits bits = random_bits(bits_per_trial, rng);
                const ComplexVec data = qpsk_map(bits);
                std::optional<DecomposedChannel> decomp;
                if (mode != SchemeMode::Baseline) decomp = decompose_fir(h_ab, grid.n);
                const OfdmSymbol sym = alice_precode(grid, data, mode, decomp ? &*decomp : nullptr,
                                                     cfg.phase_reference);
                const ComplexVec rx_bob =
                    demodulate(add_noise(apply_channel(sym.time, h_ab), nv_time, rng), grid);
                const ComplexVec rx_eve =
                    demodulate(add_noise(apply_channel(sym.time, h_ae), nv_time, rng), grid);
                const LinkOutcome bob = bob_receive(rx_bob, grid, mode, bob_cfg, h_ab, bits);
                const LinkOutcome eve = eve_receive(rx_eve, grid, mode, eve_cfg, h_ae, bits);
                results[t] = {bob.bit_errors, eve.bit_errors, bob.channel_nmse, eve.channel_nmse};
            });

            LinkPointStats st;
            st.snr_db = snr;
            st.rho = rho;
            st.trials = cfg.trials;
            st.bits = bits_per_trial * cfg.trials;
            std::vector<double> bob_ber(cfg.trials), eve_ber(cfg.trials);
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                const auto& r = results[t];
                st.bob_errors += r.bob_errors;
                st.eve_errors += r.eve_errors;
                st.bob_nmse += r.bob_nmse;
                st.eve_nmse += r.eve_nmse;
                bob_ber[t] = static_cast<double>(r.bob_errors) / static_cast<double>(bits_per_trial);
                eve_ber[t] = static_cast<double>(r.eve_errors) / static_cast<double>(bits_per_trial);
            }
            st.bob_nmse /= static_cast<double>(cfg.trials);
            st.eve_nmse /= static_cast<double>(cfg.trials);
            st.bob_ber_trial_sd = sample_sd(bob_ber);
            st.eve_ber_trial_sd = sample_sd(eve_ber);
            out.push_back(st);
        }
    }
    return out;
}

std::vector<MetricRecord> run(const ExperimentConfig& cfg) {
    const auto stats = simulate_link(cfg);
    const std::string scheme = to_string(cfg.scheme);
    std::vector<MetricRecord> out;
    for (const auto& st : stats) {
        auto add = [&](const char* metric, double value) {
            out.push_back({scheme, st.snr_db, st.rho, metric, value, st.trials, cfg.master_seed});
        };
        add("ber_bob", st.bob_ber());
        add("ber_eve", st.eve_ber());
        if (cfg.csi_mode == CsiMode::Estimated && st.bob_nmse > 0.0) add("nmse_bob_db", to_db(st.bob_nmse));
        if (st.eve_nmse > 0.0) add("nmse_eve_db", to_db(st.eve_nmse));
    }
    return out;
}

PaprSamples simulate_papr(const ExperimentConfig& cfg) {
    cfg.validate();
    const OfdmGrid grid = cfg.grid();
    const PowerDelayProfile pdp = cfg.pdp();
    const std::size_t bits_per_trial = 2 * grid.data_indices.size();
    PaprSamples s;
    s.baseline.resize(cfg.trials);
    s.secured.resize(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
        Rng rng = Rng::for_trial(cfg.master_seed, 0, t);
        const ChannelTaps h = draw_channel(pdp, rng);
        const ComplexVec data = qpsk_map(random_bits(bits_per_trial, rng));
        s.baseline[t] = papr_db(modulate(grid, data).time);
        if (cfg.scheme == SchemeMode::Baseline) {
            s.secured[t] = s.baseline[t];
        } else {
            const DecomposedChannel d = decompose_fir(h, grid.n);
            s.secured[t] = papr_db(alice_precode(grid, data, cfg.scheme, &d, cfg.phase_reference).time);
        }
    });
    return s;
}

std::vector<MetricRecord> run_papr(const ExperimentConfig& cfg) {
    const PaprSamples s = simulate_papr(cfg);
    std::vector<MetricRecord> out;
    out.reserve(2 * s.baseline.size());
    auto emit = [&](SchemeMode mode, const std::vector<double>& v) {
        for (double x : v) {
            out.push_back({to_string(mode), std::nullopt, std::nullopt, "papr_db_sample", x,
                           cfg.trials, cfg.master_seed});
        }
    };
    emit(SchemeMode::Baseline, s.baseline);
    if (cfg.scheme != SchemeMode::Baseline) emit(cfg.scheme, s.secured);
    return out;
}

std::vector<CorrelationPoint> simulate_correlation(const ExperimentConfig& cfg) {
    cfg.validate();
    const PowerDelayProfile pdp = cfg.pdp();
    std::vector<CorrelationPoint> out;
    for (std::size_t ri = 0; ri < cfg.rho_grid.size(); ++ri) {
        const double rho = cfg.rho_grid[ri];
        std::vector<ChannelPair> pairs(cfg.trials);
        parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
            Rng rng = Rng::for_trial(cfg.master_seed, ri, t);
            const ChannelTaps h = draw_channel(pdp, rng);
            const ChannelTaps he = draw_correlated(h, pdp, rho, rng);
            pairs[t] = {decompose_fir(h, cfg.n), decompose_fir(he, cfg.n)};
        });
        out.push_back({rho, empirical_min_phase_correlation(pairs), rho_min(rho)});
    }
    return out;
}

std::vector<MetricRecord> run_correlation(const ExperimentConfig& cfg) {
    std::vector<MetricRecord> out;
    for (const auto& p : simulate_correlation(cfg)) {
        out.push_back({"none", std::nullopt, p.rho, "corr_min_empirical", p.empirical, cfg.trials,
                       cfg.master_seed});
        out.push_back({"none", std::nullopt, p.rho, "corr_min_model", p.model, cfg.trials,
                       cfg.master_seed});
    }
    return out;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return {buf, res.ptr};
}

std::string to_csv(const std::vector<MetricRecord>& records) {
    std::string s = "scheme,snr_db,rho,metric,value,trials,seed\n";
    for (const auto& r : records) {
        if (!std::isfinite(r.value)) throw std::invalid_argument("metric value is not finite");
        s += r.scheme;
        s += ',';
        if (r.snr_db) s += format_double(*r.snr_db);
        s += ',';
        if (r.rho) s += format_double(*r.rho);
        s += ',';
        s += r.metric;
        s += ',';
        s += format_double(r.value);
        s += ',';
        s += std::to_string(r.trials);
        s += ',';
        s += std::to_string(r.seed);
        s += '\n';
    }
    return s;
}

void write_text_atomic(const std::string& text, const std::filesystem::path& path) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f << text;
        f.flush();
        if (!f) {
            f.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot move output into place at " + path.string());
    }
}

void write_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path) {
    write_text_atomic(to_csv(records), path);
}

}  // namespace pls
