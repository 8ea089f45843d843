#include "pls/decomposition.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace pls {

FirFactorization factor_fir(const ChannelTaps& h) {
    FirFactorization f;
    f.roots = poly_roots(h.taps);
    ComplexVec min_zeros;
    min_zeros.reserve(f.roots.roots.size());
    cplx gain = f.roots.leading_coeff;
    f.outside.reserve(f.roots.roots.size());
    for (const auto& z : f.roots.roots) {
        const bool out = std::abs(z) > 1.0 + kUnitCircleTolerance;
        f.outside.push_back(out);
        if (out) {
            gain *= -z;
            min_zeros.push_back(1.0 / std::conj(z));
        } else {
            min_zeros.push_back(z);
        }
    }
    f.min_phase.taps = poly_from_roots(min_zeros, gain);
    f.min_phase.taps.resize(h.taps.size(), cplx{});
    return f;
}

DecomposedChannel decompose_fir(const ChannelTaps& h, std::size_t n) {
    const FirFactorization f = factor_fir(h);
    DecomposedChannel d;
    d.min_phase = cfr_of(f.min_phase, n);
    d.all_pass.values.assign(n, cplx{1.0, 0.0});
    ComplexVec poles;
    for (std::size_t i = 0; i < f.roots.roots.size(); ++i) {
        if (f.outside[i]) poles.push_back(1.0 / f.roots.roots[i]);
    }
    const double delay = static_cast<double>(f.roots.delay);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        const cplx e = std::polar(1.0, -w);
        cplx v = std::polar(1.0, -w * delay);
        for (const auto& p : poles) v *= (e - p) / (1.0 - std::conj(p) * e);
        d.all_pass.values[k] = v;
    }
    return d;
}

namespace {

// The log-magnitude is evaluated on a grid refined until successive results agree,
// which keeps cepstral aliasing from zeros near the unit circle small.
constexpr std::size_t kMinOversample = 16;
constexpr std::size_t kMaxOversample = 1024;
constexpr double kOversampleAgreement = 1e-9;

// Min-phase response at the n original bins from a grid oversampled by factor.
ComplexVec min_phase_oversampled(const ComplexVec& autocorr, std::size_t factor) {
    const std::size_t n = autocorr.size();
    const std::size_t fine = n * factor;
    const std::size_t half = n / 2;
    ComplexVec lags(fine);
    for (std::size_t i = 0; i < half; ++i) lags[i] = autocorr[i];
    for (std::size_t i = half + 1; i < n; ++i) lags[fine - n + i] = autocorr[i];
    lags[half] += 0.5 * autocorr[half];
    lags[fine - half] += 0.5 * autocorr[half];
    const ComplexVec fine_power = fft(lags);
    std::vector<double> mag(fine);
    for (std::size_t k = 0; k < fine; ++k) mag[k] = std::sqrt(std::max(fine_power[k].real(), 0.0));
    const ComplexVec fine_min = min_phase_from_magnitude(mag);
    ComplexVec out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = fine_min[k * factor];
    return out;
}

}  // namespace

DecomposedChannel decompose_cfr(const Cfr& h) {
    const std::size_t n = h.values.size();
    if (!is_power_of_two(n) || n < 2) throw std::invalid_argument("cfr length must be a power of two >= 2");
    // |H|^2 is trigonometrically interpolated through its circular autocorrelation.
    ComplexVec power(n);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        power[k] = std::norm(h.values[k]);
        peak = std::max(peak, std::abs(h.values[k]));
    }
    const ComplexVec r = ifft(power);
    ComplexVec min = min_phase_oversampled(r, kMinOversample);
    for (std::size_t f = 2 * kMinOversample; f <= kMaxOversample; f *= 2) {
        ComplexVec next = min_phase_oversampled(r, f);
        double diff = 0.0;
        for (std::size_t k = 0; k < n; ++k) diff = std::max(diff, std::abs(next[k] - min[k]));
        min = std::move(next);
        if (diff <= kOversampleAgreement * peak) break;
    }

    DecomposedChannel d;
    d.min_phase.values = std::move(min);
    d.all_pass.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) d.all_pass.values[k] = h.values[k] / d.min_phase.values[k];
    return d;
}

namespace {

// Largest model order tried when fitting a squared all-pass.
constexpr std::size_t kMaxAllpassOrder = 64;
constexpr double kFitTolerance = 1e-9;

// Fits e = exp(-j w t) conj(D) / D with D of degree m, as the real null vector
// of the linear system e D - exp(-j w t) conj(D) = 0. Returns the coefficients
// of D when the relative residual is below tolerance.
std::optional<ComplexVec> fit_allpass(const ComplexVec& e, std::size_t t, std::size_t m) {
    const std::size_t n = e.size();
    const auto cols = static_cast<Eigen::Index>(2 * (m + 1));
    Eigen::MatrixXd a(static_cast<Eigen::Index>(2 * n), cols);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        const cplx shift = std::polar(1.0, -w * static_cast<double>(t));
        for (std::size_t i = 0; i <= m; ++i) {
            const cplx z = std::polar(1.0, -w * static_cast<double>(i));
            // Coefficient q_i = x + j y contributes e z (x + j y) - shift conj(z) (x - j y).
            const cplx cx = e[k] * z - shift * std::conj(z);
            const cplx cy = cplx{0.0, 1.0} * (e[k] * z + shift * std::conj(z));
            const auto r = static_cast<Eigen::Index>(2 * k);
            const auto c = static_cast<Eigen::Index>(2 * i);
            a(r, c) = cx.real();
            a(r + 1, c) = cx.imag();
            a(r, c + 1) = cy.real();
            a(r + 1, c + 1) = cy.imag();
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(cols - 1) > kFitTolerance * std::sqrt(static_cast<double>(n))) return std::nullopt;
    const Eigen::VectorXd v = svd.matrixV().col(cols - 1);
    ComplexVec q(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        q[i] = cplx{v(static_cast<Eigen::Index>(2 * i)), v(static_cast<Eigen::Index>(2 * i + 1))};
    }
    if (std::abs(q[0]) < kFitTolerance) return std::nullopt;
    return q;
}

// Square root of a polynomial that is an exact square, normalized to s_0 = 1.
ComplexVec poly_sqrt(const ComplexVec& q) {
    const std::size_t h = (q.size() - 1) / 2;
    ComplexVec s(h + 1);
    s[0] = 1.0;
    for (std::size_t i = 1; i <= h; ++i) {
        cplx acc = q[i] / q[0];
        for (std::size_t j = 1; j < i; ++j) acc -= s[j] * s[i - j];
        s[i] = 0.5 * acc;
    }
    return s;
}

Cfr allpass_sqrt_by_unwrap(const Cfr& ap_squared) {
    std::vector<double> ph(ap_squared.values.size());
    for (std::size_t k = 0; k < ph.size(); ++k) ph[k] = std::arg(ap_squared.values[k]);
    const auto un = unwrap_phase(ph);
    Cfr out;
    out.values.resize(un.size());
    for (std::size_t k = 0; k < un.size(); ++k) out.values[k] = std::polar(1.0, 0.5 * un[k]);
    return out;
}

}  // namespace

Cfr allpass_sqrt(const Cfr& ap_squared) {
    const std::size_t n = ap_squared.values.size();
    for (const auto& v : ap_squared.values) {
        if (!(std::abs(std::abs(v) - 1.0) <= 0.05)) throw std::invalid_argument("not an all-pass spectrum");
    }
    // The squared all-pass of a delay d and k Blaschke sections has total order
    // t = 2(d + k) and a squared denominator of degree 2k. The lowest order that
    // fits is the reduced form, which fixes the branch even where the phase turns
    // by more than pi between bins.
    const std::size_t max_order = std::min(kMaxAllpassOrder, n / 4);
    for (std::size_t t = 0; t <= max_order; t += 2) {
        for (std::size_t m = 0; m <= t; m += 2) {
            const auto q = fit_allpass(ap_squared.values, t, m);
            if (!q) continue;
            const ComplexVec s = poly_sqrt(*q);
            // Rotation so the result squares to the input at bin 0.
            const cplx s0 = std::accumulate(s.begin(), s.end(), cplx{});
            const cplx base = std::conj(s0) / s0;
            const cplx rot = std::sqrt(ap_squared.values[0] / (base * base));
            Cfr out;
            out.values.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                const double w = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
                cplx sk{};
                for (std::size_t i = s.size(); i-- > 0;) sk = sk * std::polar(1.0, -w) + s[i];
                const cplx model = rot * std::polar(1.0, -0.5 * w * static_cast<double>(t)) * std::conj(sk) / sk;
                // The model only selects the branch; the value is the exact root.
                const cplx root = std::sqrt(ap_squared.values[k] / std::abs(ap_squared.values[k]));
                out.values[k] = std::abs(root - model) <= std::abs(root + model) ? root : -root;
            }
            return out;
        }
    }
    return allpass_sqrt_by_unwrap(ap_squared);
}

}  // namespace pls
