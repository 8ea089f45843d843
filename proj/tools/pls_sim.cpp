#include "pls/analysis.hpp"
#include "pls/decomposition.hpp"
#include "pls/harness.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace {

// Raised for bad flag values; mapped to the usage exit code.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double parse_number(const std::string& tok) {
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) throw UsageError("bad number: " + tok);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

// "0,4,8" or "start:step:stop" (inclusive).
std::vector<double> parse_grid(const std::string& s) {
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3) throw UsageError("range must be start:step:stop");
        const double a = parse_number(parts[0]);
        const double step = parse_number(parts[1]);
        const double b = parse_number(parts[2]);
        if (!(step > 0.0) || b < a) throw UsageError("bad range " + s);
        std::vector<double> out;
        const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) out.push_back(a + step * static_cast<double>(i));
        return out;
    }
    std::vector<double> out;
    for (const auto& t : split(s, ',')) out.push_back(parse_number(t));
    if (out.empty()) throw UsageError("empty list");
    return out;
}

// Accepts "a", "a+bj", "a-bj" and "bj".
pls::cplx parse_complex(std::string t) {
    if (t.empty()) throw UsageError("empty tap");
    if (t.back() != 'j' && t.back() != 'i') return {parse_number(t), 0.0};
    t.pop_back();
    const auto pos = t.find_last_of("+-");
    if (pos == std::string::npos || pos == 0) {
        return {0.0, t.empty() || t == "+" ? 1.0 : (t == "-" ? -1.0 : parse_number(t))};
    }
    const std::string im = t.substr(pos);
    return {parse_number(t.substr(0, pos)), im == "+" ? 1.0 : (im == "-" ? -1.0 : parse_number(im))};
}

std::string fmt(double v) { return pls::format_double(v); }

struct SimFlags {
    std::string config;
    std::string scheme, snr, rho, csi, estimator, eve_equalizer, phase_ref, interpolation;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    double pdp_decay = 0.0;
    bool eve_knows = true;
    std::string out;
};

void add_sim_flags(CLI::App* sub, SimFlags& f) {
    sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--scheme", f.scheme, "baseline|data|pilot|joint")
        ->check(CLI::IsMember({"baseline", "data", "pilot", "joint"}));
    sub->add_option("--snr", f.snr, "SNR grid in dB: list a,b,c or range start:step:stop");
    sub->add_option("--rho", f.rho, "Eve correlation grid");
    sub->add_option("--trials", f.trials, "Trials per grid point")->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.seed, "Master seed");
    sub->add_option("--csi", f.csi, "perfect|estimated")->check(CLI::IsMember({"perfect", "estimated"}));
    sub->add_option("--estimator", f.estimator, "ls|mmse")->check(CLI::IsMember({"ls", "mmse"}));
    sub->add_option("--eve-equalizer", f.eve_equalizer, "auto|full|min_phase")
        ->check(CLI::IsMember({"auto", "full", "min_phase"}));
    sub->add_option("--phase-ref", f.phase_ref, "mean|anchor")->check(CLI::IsMember({"mean", "anchor"}));
    sub->add_option("--interpolation", f.interpolation, "linear|spline")
        ->check(CLI::IsMember({"linear", "spline"}));
    sub->add_option("--eve-knows-channel", f.eve_knows, "Eve equalizes with her true channel");
    sub->add_option("--pdp-decay", f.pdp_decay, "Exponential PDP decay in taps")->check(CLI::PositiveNumber);
    sub->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", f.out, "Output CSV path")->required();
}

pls::ExperimentConfig build_config(CLI::App* sub, const SimFlags& f, pls::ExperimentConfig base) {
    pls::ExperimentConfig c = f.config.empty() ? base : pls::load_config(f.config);
    auto set = [&](const char* name) { return sub->count(name) > 0; };
    if (set("--scheme")) c.scheme = pls::parse_scheme(f.scheme);
    if (set("--snr")) c.snr_grid_db = parse_grid(f.snr);
    if (set("--rho")) c.rho_grid = parse_grid(f.rho);
    if (set("--trials")) c.trials = f.trials;
    if (set("--seed")) c.master_seed = f.seed;
    if (set("--csi")) c.csi_mode = pls::parse_csi(f.csi);
    if (set("--estimator")) c.estimator = pls::parse_estimator(f.estimator);
    if (set("--eve-equalizer")) c.eve_equalizer = pls::parse_eve_equalizer(f.eve_equalizer);
    if (set("--phase-ref")) c.phase_reference = pls::parse_phase_reference(f.phase_ref);
    if (set("--interpolation")) c.interpolation = pls::parse_interpolation(f.interpolation);
    if (set("--eve-knows-channel")) c.eve_knows_channel = f.eve_knows;
    if (set("--pdp-decay")) c.pdp_decay = f.pdp_decay;
    if (set("--workers")) c.workers = f.workers;
    c.validate();
    return c;
}

std::vector<pls::MetricRecord> keep_metrics(std::vector<pls::MetricRecord> recs, const std::string& prefix) {
    std::vector<pls::MetricRecord> out;
    for (auto& r : recs) {
        if (r.metric.rfind(prefix, 0) == 0) out.push_back(std::move(r));
    }
    return out;
}

int run_decompose(const std::string& taps_arg, std::optional<std::uint64_t> seed, std::size_t n,
                  std::size_t num_taps, double decay, const std::string& out) {
    pls::ChannelTaps h;
    if (!taps_arg.empty()) {
        for (const auto& t : split(taps_arg, ',')) h.taps.push_back(parse_complex(t));
    } else if (seed) {
        pls::Rng rng(*seed);
        h = pls::draw_channel(pls::exp_pdp(num_taps, decay), rng);
    } else {
        throw UsageError("decompose needs --taps or --seed");
    }
    if (h.taps.empty() || h.taps.size() > n) throw UsageError("tap count must lie in [1, n]");
    bool any = false;
    for (const auto& v : h.taps) any = any || v != pls::cplx{};
    if (!any) throw UsageError("taps are all zero");
    if (!pls::is_power_of_two(n)) throw UsageError("--n must be a power of two");

    const auto f = pls::factor_fir(h);
    const auto d = pls::decompose_fir(h, n);
    const auto full = pls::cfr_of(h, n);

    std::string csv = "section,index,re,im,abs,outside,min_re,min_im,ap_re,ap_im,recon_err\n";
    for (std::size_t i = 0; i < h.taps.size(); ++i) {
        csv += "tap," + std::to_string(i) + "," + fmt(h.taps[i].real()) + "," + fmt(h.taps[i].imag()) +
               "," + fmt(std::abs(h.taps[i])) + ",,,,,,\n";
    }
    std::size_t outside = 0;
    for (std::size_t i = 0; i < f.roots.roots.size(); ++i) {
        const auto z = f.roots.roots[i];
        outside += f.outside[i] ? 1 : 0;
        csv += "zero," + std::to_string(i) + "," + fmt(z.real()) + "," + fmt(z.imag()) + "," +
               fmt(std::abs(z)) + "," + (f.outside[i] ? "1" : "0") + ",,,,,\n";
    }
    double max_err = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto m = d.min_phase.values[k];
        const auto a = d.all_pass.values[k];
        const auto hk = full.values[k];
        const double err = std::abs(m * a - hk) / std::max(std::abs(hk), 1e-300);
        max_err = std::max(max_err, err);
        csv += "cfr," + std::to_string(k) + "," + fmt(hk.real()) + "," + fmt(hk.imag()) + "," +
               fmt(std::abs(hk)) + ",," + fmt(m.real()) + "," + fmt(m.imag()) + "," + fmt(a.real()) +
               "," + fmt(a.imag()) + "," + fmt(err) + "\n";
    }
    pls::write_text_atomic(csv, out);
    std::cout << "zeros: " << f.roots.roots.size() << " outside: " << outside
              << " max_reconstruction_error: " << fmt(max_err) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OFDM channel-decomposition security simulator"};
    app.require_subcommand(1);

    SimFlags ber_f, nmse_f, papr_f, corr_f;
    auto* ber = app.add_subcommand("ber", "BER sweep over SNR and rho");
    add_sim_flags(ber, ber_f);
    auto* nmse = app.add_subcommand("nmse", "Channel-estimate NMSE sweep");
    add_sim_flags(nmse, nmse_f);
    auto* papr = app.add_subcommand("papr", "Per-symbol PAPR samples");
    add_sim_flags(papr, papr_f);
    auto* corr = app.add_subcommand("correlation", "Min-phase correlation versus rho");
    add_sim_flags(corr, corr_f);

    auto* dec = app.add_subcommand("decompose", "Dump the min-phase/all-pass split of one channel");
    std::string taps_arg, dec_out;
    std::uint64_t dec_seed = 0;
    std::size_t dec_n = 256, dec_taps = 11;
    double dec_decay = 1.0;
    dec->add_option("--taps", taps_arg, "Comma-separated taps, e.g. 1,0.5 or 0.3+0.2j");
    auto* seed_opt = dec->add_option("--seed", dec_seed, "Draw a random channel with this seed");
    dec->add_option("--n", dec_n, "Grid size");
    dec->add_option("--num-taps", dec_taps, "Taps for --seed")->check(CLI::PositiveNumber);
    dec->add_option("--pdp-decay", dec_decay, "PDP decay for --seed")->check(CLI::PositiveNumber);
    dec->add_option("--out", dec_out, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (dec->parsed()) {
            return run_decompose(taps_arg, seed_opt->count() ? std::optional(dec_seed) : std::nullopt,
                                 dec_n, dec_taps, dec_decay, dec_out);
        }
        pls::ExperimentConfig defaults;
        if (ber->parsed()) {
            const auto c = build_config(ber, ber_f, defaults);
            pls::write_csv(keep_metrics(pls::run(c), "ber_"), ber_f.out);
        } else if (nmse->parsed()) {
            defaults.scheme = pls::SchemeMode::PilotSecurity;
            defaults.snr_grid_db = {0, 5, 10, 15, 20, 25, 30};
            const auto c = build_config(nmse, nmse_f, defaults);
            pls::write_csv(keep_metrics(pls::run(c), "nmse_"), nmse_f.out);
        } else if (papr->parsed()) {
            const auto c = build_config(papr, papr_f, defaults);
            pls::write_csv(pls::run_papr(c), papr_f.out);
        } else if (corr->parsed()) {
            defaults.rho_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
            const auto c = build_config(corr, corr_f, defaults);
            pls::write_csv(pls::run_correlation(c), corr_f.out);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
