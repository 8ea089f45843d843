#include "pls/harness.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pls {

namespace {

using nlohmann::json;

double number_or_inf(const json& v, const char* key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument(std::string("bad numeric value for ") + key);
}

double parse_rate(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
        }
        return std::stod(s);
    }
    throw std::invalid_argument("bad pilot_rate");
}

std::vector<double> number_list(const json& v, const char* key) {
    if (!v.is_array()) return {number_or_inf(v, key)};
    std::vector<double> out;
    for (const auto& e : v) out.push_back(number_or_inf(e, key));
    return out;
}

}  // namespace

std::string to_string(SchemeMode mode) {
    switch (mode) {
        case SchemeMode::Baseline: return "baseline";
        case SchemeMode::DataSecurity: return "data";
        case SchemeMode::PilotSecurity: return "pilot";
        case SchemeMode::Joint: return "joint";
    }
    return "unknown";
}

SchemeMode parse_scheme(const std::string& s) {
    if (s == "baseline") return SchemeMode::Baseline;
    if (s == "data") return SchemeMode::DataSecurity;
    if (s == "pilot") return SchemeMode::PilotSecurity;
    if (s == "joint") return SchemeMode::Joint;
    throw std::invalid_argument("unknown scheme: " + s);
}

EstimationMethod parse_estimator(const std::string& s) {
    if (s == "ls") return EstimationMethod::LS;
    if (s == "mmse") return EstimationMethod::MMSE;
    throw std::invalid_argument("unknown estimator: " + s);
}

CsiMode parse_csi(const std::string& s) {
    if (s == "perfect") return CsiMode::Perfect;
    if (s == "estimated") return CsiMode::Estimated;
    throw std::invalid_argument("unknown csi mode: " + s);
}

EveEqualizerChoice parse_eve_equalizer(const std::string& s) {
    if (s == "auto") return EveEqualizerChoice::Auto;
    if (s == "full") return EveEqualizerChoice::Full;
    if (s == "min_phase") return EveEqualizerChoice::MinPhase;
    throw std::invalid_argument("unknown eve equalizer: " + s);
}

PhaseReference parse_phase_reference(const std::string& s) {
    if (s == "mean") return PhaseReference::PilotMean;
    if (s == "anchor") return PhaseReference::AnchorBin;
    throw std::invalid_argument("unknown phase reference: " + s);
}

Interpolation parse_interpolation(const std::string& s) {
    if (s == "linear") return Interpolation::Linear;
    if (s == "spline") return Interpolation::Spline;
    throw std::invalid_argument("unknown interpolation: " + s);
}

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

    ExperimentConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "n") c.n = v.get<std::size_t>();
            else if (key == "cp_len") c.cp_len = v.get<std::size_t>();
            else if (key == "pilot_rate") c.pilot_rate = parse_rate(v);
            else if (key == "pilot_offset") c.pilot_offset = v.get<std::size_t>();
            else if (key == "pilot_seed") c.pilot_seed = v.get<std::uint64_t>();
            else if (key == "constellation") c.constellation = v.get<std::string>();
            else if (key == "num_taps") c.num_taps = v.get<std::size_t>();
            else if (key == "pdp_decay") c.pdp_decay = v.get<double>();
            else if (key == "snr_grid_db") c.snr_grid_db = number_list(v, "snr_grid_db");
            else if (key == "rho_grid") c.rho_grid = number_list(v, "rho_grid");
            else if (key == "trials") c.trials = v.get<std::size_t>();
            else if (key == "master_seed") c.master_seed = v.get<std::uint64_t>();
            else if (key == "scheme") c.scheme = parse_scheme(v.get<std::string>());
            else if (key == "eve_knows_channel") c.eve_knows_channel = v.get<bool>();
            else if (key == "estimator") c.estimator = parse_estimator(v.get<std::string>());
            else if (key == "interpolation") c.interpolation = parse_interpolation(v.get<std::string>());
            else if (key == "csi_mode") c.csi_mode = parse_csi(v.get<std::string>());
            else if (key == "eve_equalizer") c.eve_equalizer = parse_eve_equalizer(v.get<std::string>());
            else if (key == "phase_reference") c.phase_reference = parse_phase_reference(v.get<std::string>());
            else if (key == "workers") c.workers = v.get<unsigned>();
            else throw std::invalid_argument("unknown config key: " + key);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad config value: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot read config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_json_text(ss.str());
}

}  // namespace pls
