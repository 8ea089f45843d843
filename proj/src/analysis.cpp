#include "pls/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pls {

namespace {

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
}

void check_gamma(double gamma_bar) {
    if (!(gamma_bar > 0.0)) throw std::invalid_argument("mean SNR must be positive");
}

}  // namespace

double bep_imperfect(const BepParams& p) {
    check_gamma(p.gamma_bar);
    check_rho(p.rho1);
    check_rho(p.rho2);
    if (p.rho1 * p.rho1 + p.rho2 * p.rho2 > 1.0 + 1e-12) {
        throw std::invalid_argument("rho1^2 + rho2^2 must not exceed 1");
    }
    const double s = std::sqrt(0.5);
    const double sum = (p.rho1 + p.rho2) * s;
    const double diff = (p.rho1 - p.rho2) * s;
    const double base = 1.0 + 1.0 / (2.0 * p.gamma_bar);
    const double t1 = sum / std::sqrt(base - diff * diff);
    const double t2 = diff / std::sqrt(base - sum * sum);
    return 0.5 * (1.0 - 0.5 * t1 - 0.5 * t2);
}

double bep_perfect(double gamma_bar) {
    if (std::isinf(gamma_bar) && gamma_bar > 0.0) return 0.0;
    check_gamma(gamma_bar);
    return 0.5 * (1.0 - 1.0 / std::sqrt(1.0 + 1.0 / gamma_bar));
}

double bep_correlated(double gamma_bar, double rho) {
    check_rho(rho);
    if (std::isinf(gamma_bar) && gamma_bar > 0.0) return bep_correlated_floor(rho);
    check_gamma(gamma_bar);
    return 0.5 * (1.0 - rho / std::sqrt(1.0 + 1.0 / gamma_bar));
}

double bep_correlated_floor(double rho) {
    check_rho(rho);
    return 0.5 * (1.0 - rho);
}

double gamma_factor(double rho) {
    check_rho(rho);
    return 1.0 + std::sqrt(1.0 - rho * rho);
}

double rho_min(double rho) { return rho / gamma_factor(rho); }

double nmse(const Cfr& est, const Cfr& truth) {
    if (est.values.size() != truth.values.size()) {
        throw std::invalid_argument("nmse inputs differ in length");
    }
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t k = 0; k < truth.values.size(); ++k) {
        err += std::norm(est.values[k] - truth.values[k]);
        ref += std::norm(truth.values[k]);
    }
    if (!(ref > 0.0)) throw std::invalid_argument("reference response has zero power");
    return err / ref;
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

double papr_db(std::span<const cplx> time) {
    if (time.empty()) throw std::invalid_argument("empty signal");
    double peak = 0.0;
    double mean = 0.0;
    for (const auto& v : time) {
        const double p = std::norm(v);
        peak = std::max(peak, p);
        mean += p;
    }
    mean /= static_cast<double>(time.size());
    if (!(mean > 0.0)) throw std::invalid_argument("signal has zero power");
    return to_db(peak / mean);
}

CcdfCurve ccdf(std::span<const double> samples, std::span<const double> thresholds) {
    if (samples.empty()) throw std::invalid_argument("no samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    CcdfCurve c;
    c.thresholds.assign(thresholds.begin(), thresholds.end());
    std::sort(c.thresholds.begin(), c.thresholds.end());
    for (double t : c.thresholds) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
        c.probabilities.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
    }
    return c;
}

double ccdf_level(std::span<const double> samples, double p) {
    if (samples.empty()) throw std::invalid_argument("no samples");
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("exceedance must lie in [0, 1)");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    // At most floor(p * n) samples may lie strictly above the returned level.
    const auto allowed = static_cast<std::size_t>(std::floor(p * static_cast<double>(n)));
    return sorted[n - 1 - std::min(allowed, n - 1)];
}

double empirical_min_phase_correlation(std::span<const ChannelPair> pairs) {
    if (pairs.size() < kMinCorrelationPairs) {
        throw std::invalid_argument("too few channel pairs for a correlation estimate");
    }
    cplx cross{};
    double pa = 0.0;
    double pb = 0.0;
    for (const auto& pr : pairs) {
        const auto& a = pr.a.min_phase.values;
        const auto& b = pr.b.min_phase.values;
        if (a.size() != b.size()) throw std::invalid_argument("pair responses differ in length");
        for (std::size_t k = 0; k < a.size(); ++k) {
            cross += std::conj(a[k]) * b[k];
            pa += std::norm(a[k]);
            pb += std::norm(b[k]);
        }
    }
    return std::abs(cross) / std::sqrt(pa * pb);
}

std::vector<double> per_subcarrier_min_phase_correlation(std::span<const ChannelPair> pairs) {
    if (pairs.size() < kMinCorrelationPairs) {
        throw std::invalid_argument("too few channel pairs for a correlation estimate");
    }
    const std::size_t n = pairs.front().a.min_phase.values.size();
    std::vector<cplx> cross(n);
    std::vector<double> pa(n, 0.0), pb(n, 0.0);
    for (const auto& pr : pairs) {
        const auto& a = pr.a.min_phase.values;
        const auto& b = pr.b.min_phase.values;
        if (a.size() != n || b.size() != n) {
            throw std::invalid_argument("pair responses differ in length");
        }
        for (std::size_t k = 0; k < n; ++k) {
            cross[k] += std::conj(a[k]) * b[k];
            pa[k] += std::norm(a[k]);
            pb[k] += std::norm(b[k]);
        }
    }
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = std::abs(cross[k]) / std::sqrt(pa[k] * pb[k]);
    return out;
}

}  // namespace pls
