#pragma once

#include "pls/channel.hpp"
#include "pls/ofdm.hpp"
#include "pls/security.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pls {

enum class EveEqualizerChoice { Auto, Full, MinPhase };

struct ExperimentConfig {
    std::size_t n = 256;
    std::size_t cp_len = 64;
    double pilot_rate = 0.25;
    std::size_t pilot_offset = 0;
    std::uint64_t pilot_seed = 1;
    std::string constellation = "qpsk";
    std::size_t num_taps = 11;
    double pdp_decay = 1.0;
    std::vector<double> snr_grid_db{0, 4, 8, 12, 16, 20, 24, 28};
    std::vector<double> rho_grid{0.0};
    std::size_t trials = 1000;
    std::uint64_t master_seed = 1;
    SchemeMode scheme = SchemeMode::DataSecurity;
    bool eve_knows_channel = true;
    EstimationMethod estimator = EstimationMethod::MMSE;
    Interpolation interpolation = Interpolation::Linear;
    CsiMode csi_mode = CsiMode::Estimated;
    EveEqualizerChoice eve_equalizer = EveEqualizerChoice::Auto;
    PhaseReference phase_reference = PhaseReference::PilotMean;
    unsigned workers = 1;

    // Throws std::invalid_argument on the first violated invariant.
    void validate() const;
    std::size_t pilot_spacing() const;
    OfdmGrid grid() const;
    PowerDelayProfile pdp() const;
};

// Frequency-domain noise variance for a per-bit mean SNR in dB with unit-power
// QPSK and unit-power channels. +inf maps to zero.
double noise_variance_for_snr(double snr_db);

struct MetricRecord {
    std::string scheme;
    std::optional<double> snr_db;
    std::optional<double> rho;
    std::string metric;
    double value = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

struct LinkPointStats {
    double snr_db = 0.0;
    double rho = 0.0;
    std::size_t trials = 0;
    std::size_t bits = 0;  // total data bits over all trials
    std::size_t bob_errors = 0;
    std::size_t eve_errors = 0;
    double bob_nmse = 0.0;  // mean of per-trial linear NMSE
    double eve_nmse = 0.0;
    // Sample standard deviation of the per-trial BER.
    double bob_ber_trial_sd = 0.0;
    double eve_ber_trial_sd = 0.0;

    double bob_ber() const;
    double eve_ber() const;
};

// One entry per (rho, snr) grid point, rho-major.
std::vector<LinkPointStats> simulate_link(const ExperimentConfig& cfg);

// Link sweep as records: ber_bob, ber_eve, nmse_bob_db (estimated CSI only), nmse_eve_db.
std::vector<MetricRecord> run(const ExperimentConfig& cfg);

// Per-trial PAPR samples of the precoded time signal.
struct PaprSamples {
    std::vector<double> baseline;
    std::vector<double> secured;  // cfg.scheme
};
PaprSamples simulate_papr(const ExperimentConfig& cfg);
// papr_db_sample rows for baseline and, if different, cfg.scheme.
std::vector<MetricRecord> run_papr(const ExperimentConfig& cfg);

struct CorrelationPoint {
    double rho = 0.0;
    double empirical = 0.0;
    double model = 0.0;
};
std::vector<CorrelationPoint> simulate_correlation(const ExperimentConfig& cfg);
// corr_min_empirical and corr_min_model rows per rho.
std::vector<MetricRecord> run_correlation(const ExperimentConfig& cfg);

std::string format_double(double v);
std::string to_csv(const std::vector<MetricRecord>& records);
// Writes through a temporary file that is renamed into place on success.
void write_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path);
void write_text_atomic(const std::string& text, const std::filesystem::path& path);

// Config file: a JSON object whose keys mirror ExperimentConfig fields.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json_text(const std::string& text);

std::string to_string(SchemeMode mode);
SchemeMode parse_scheme(const std::string& s);
EstimationMethod parse_estimator(const std::string& s);
CsiMode parse_csi(const std::string& s);
EveEqualizerChoice parse_eve_equalizer(const std::string& s);
PhaseReference parse_phase_reference(const std::string& s);
Interpolation parse_interpolation(const std::string& s);

}  // namespace pls
