#include "pls/ofdm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pls {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Natural cubic spline through (x_i, y_i), evaluated at x.
std::vector<double> spline_coeffs(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1];
        const double h1 = x[i + 1] - x[i];
        a[i] = h0;
        b[i] = 2.0 * (h0 + h1);
        c[i] = h1;
        d[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        if (i == 1) break;
    }
    return m;
}

double spline_eval(const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<double>& m, std::size_t seg, double t) {
    const double h = x[seg + 1] - x[seg];
    const double u = (x[seg + 1] - t) / h;
    const double v = (t - x[seg]) / h;
    return u * y[seg] + v * y[seg + 1] +
           ((u * u * u - u) * m[seg] + (v * v * v - v) * m[seg + 1]) * h * h / 6.0;
}

}  // namespace

OfdmGrid OfdmGrid::comb(std::size_t n, std::size_t cp_len, std::size_t spacing,
                        std::size_t offset, std::uint64_t pilot_seed) {
    if (spacing == 0 || offset >= spacing) {
        throw std::invalid_argument("pilot spacing must be positive and exceed the offset");
    }
    OfdmGrid g;
    g.n = n;
    g.cp_len = cp_len;
    for (std::size_t k = 0; k < n; ++k) {
        if (k % spacing == offset) {
            g.pilot_indices.push_back(k);
        } else {
            g.data_indices.push_back(k);
        }
    }
    Rng rng(pilot_seed);
    Bits bits(2 * g.pilot_indices.size());
    for (auto& b : bits) b = rng.bit();
    g.pilot_values = qpsk_map(bits);
    g.validate();
    return g;
}

std::size_t OfdmGrid::pilot_spacing() const {
    if (pilot_indices.size() < 2) return n;
    return pilot_indices[1] - pilot_indices[0];
}

void OfdmGrid::validate() const {
    if (!is_power_of_two(n)) throw std::invalid_argument("subcarrier count must be a power of two");
    if (pilot_indices.size() != pilot_values.size()) {
        throw std::invalid_argument("pilot index and value counts differ");
    }
    if (pilot_indices.empty()) throw std::invalid_argument("grid has no pilots");
    std::vector<int> seen(n, 0);
    for (auto k : pilot_indices) {
        if (k >= n) throw std::invalid_argument("pilot index out of range");
        ++seen[k];
    }
    for (auto k : data_indices) {
        if (k >= n) throw std::invalid_argument("data index out of range");
        ++seen[k];
    }
    for (int s : seen) {
        if (s != 1) throw std::invalid_argument("pilot and data indices must partition the grid");
    }
    if (!std::is_sorted(pilot_indices.begin(), pilot_indices.end())) {
        throw std::invalid_argument("pilot indices must be sorted");
    }
}

ComplexVec qpsk_map(std::span<const std::uint8_t> bits) {
    if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk needs an even bit count");
    ComplexVec out(bits.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double re = bits[2 * i] ? -kInvSqrt2 : kInvSqrt2;
        const double im = bits[2 * i + 1] ? -kInvSqrt2 : kInvSqrt2;
        out[i] = {re, im};
    }
    return out;
}

Bits qpsk_demap(std::span<const cplx> symbols) {
    Bits out(2 * symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        out[2 * i] = symbols[i].real() < 0.0 ? 1 : 0;
        out[2 * i + 1] = symbols[i].imag() < 0.0 ? 1 : 0;
    }
    return out;
}

ComplexVec assemble(const OfdmGrid& grid, std::span<const cplx> data_symbols) {
    if (data_symbols.size() != grid.data_indices.size()) {
        throw std::invalid_argument("data symbol count does not match the grid");
    }
    ComplexVec freq(grid.n, cplx{});
    for (std::size_t i = 0; i < grid.pilot_indices.size(); ++i) {
        freq[grid.pilot_indices[i]] = grid.pilot_values[i];
    }
    for (std::size_t i = 0; i < grid.data_indices.size(); ++i) {
        freq[grid.data_indices[i]] = data_symbols[i];
    }
    return freq;
}

OfdmSymbol make_symbol(const OfdmGrid& grid, ComplexVec freq) {
    if (freq.size() != grid.n) throw std::invalid_argument("frequency grid size mismatch");
    if (grid.cp_len > grid.n) throw std::invalid_argument("cyclic prefix longer than symbol");
    OfdmSymbol s;
    const ComplexVec body = ifft(freq);
    s.time.reserve(grid.n + grid.cp_len);
    s.time.insert(s.time.end(), body.end() - static_cast<std::ptrdiff_t>(grid.cp_len), body.end());
    s.time.insert(s.time.end(), body.begin(), body.end());
    s.freq = std::move(freq);
    return s;
}

OfdmSymbol modulate(const OfdmGrid& grid, std::span<const cplx> data_symbols) {
    return make_symbol(grid, assemble(grid, data_symbols));
}

ComplexVec demodulate(std::span<const cplx> time, const OfdmGrid& grid) {
    if (time.size() != grid.n + grid.cp_len) {
        throw std::invalid_argument("time signal length does not match the grid");
    }
    return fft(time.subspan(grid.cp_len, grid.n));
}

ComplexVec apply_channel(std::span<const cplx> time, const ChannelTaps& h) {
    ComplexVec out(time.size(), cplx{});
    for (std::size_t n = 0; n < time.size(); ++n) {
        cplx acc{};
        const std::size_t lmax = std::min(h.taps.size(), n + 1);
        for (std::size_t l = 0; l < lmax; ++l) acc += h.taps[l] * time[n - l];
        out[n] = acc;
    }
    return out;
}

ComplexVec add_noise(std::span<const cplx> signal, double variance, Rng& rng) {
    ComplexVec out(signal.begin(), signal.end());
    if (variance <= 0.0) return out;
    for (auto& v : out) v += rng.complex_normal(variance);
    return out;
}

ComplexVec awgn(std::span<const cplx> signal, double snr_db, Rng& rng) {
    if (std::isinf(snr_db) && snr_db > 0.0) return ComplexVec(signal.begin(), signal.end());
    double power = 0.0;
    for (const auto& v : signal) power += std::norm(v);
    power /= static_cast<double>(std::max<std::size_t>(signal.size(), 1));
    return add_noise(signal, power * std::pow(10.0, -snr_db / 10.0), rng);
}

ComplexVec pilot_ls(std::span<const cplx> rx_freq, const OfdmGrid& grid) {
    if (rx_freq.size() != grid.n) throw std::invalid_argument("received grid size mismatch");
    ComplexVec out(grid.pilot_indices.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (grid.pilot_values[i] == cplx{}) throw std::invalid_argument("zero pilot symbol");
        out[i] = rx_freq[grid.pilot_indices[i]] / grid.pilot_values[i];
    }
    return out;
}

ChannelEstimate ls_estimate(std::span<const cplx> rx_freq, const OfdmGrid& grid,
                            Interpolation interp) {
    const ComplexVec hp = pilot_ls(rx_freq, grid);
    const auto& kp = grid.pilot_indices;
    ChannelEstimate est;
    est.method = EstimationMethod::LS;
    est.values.values.resize(grid.n);
    auto& out = est.values.values;

    std::vector<double> x(kp.size()), re(kp.size()), im(kp.size());
    for (std::size_t i = 0; i < kp.size(); ++i) {
        x[i] = static_cast<double>(kp[i]);
        re[i] = hp[i].real();
        im[i] = hp[i].imag();
    }
    std::vector<double> mre, mim;
    if (interp == Interpolation::Spline) {
        mre = spline_coeffs(x, re);
        mim = spline_coeffs(x, im);
    }
    std::size_t seg = 0;
    for (std::size_t k = 0; k < grid.n; ++k) {
        if (k <= kp.front()) {
            out[k] = hp.front();
            continue;
        }
        if (k >= kp.back()) {
            out[k] = hp.back();
            continue;
        }
        while (kp[seg + 1] < k) ++seg;
        const double t = static_cast<double>(k);
        if (interp == Interpolation::Spline) {
            out[k] = {spline_eval(x, re, mre, seg, t), spline_eval(x, im, mim, seg, t)};
        } else {
            const double w = (t - x[seg]) / (x[seg + 1] - x[seg]);
            out[k] = (1.0 - w) * hp[seg] + w * hp[seg + 1];
        }
    }
    return est;
}

Eigen::MatrixXcd diagonal_prior(const PowerDelayProfile& pdp) {
    const auto l = static_cast<Eigen::Index>(pdp.powers.size());
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(l, l);
    for (Eigen::Index i = 0; i < l; ++i) r(i, i) = pdp.powers[static_cast<std::size_t>(i)];
    return r;
}

MmseEstimator::MmseEstimator(const OfdmGrid& grid, const Eigen::MatrixXcd& r_hh,
                             double noise_var)
    : grid_(&grid), noise_var_(noise_var) {
    if (r_hh.rows() != r_hh.cols() || r_hh.rows() == 0) {
        throw std::invalid_argument("channel prior must be a nonempty square matrix");
    }
    if (static_cast<std::size_t>(r_hh.rows()) > grid.n) {
        throw std::invalid_argument("more taps than subcarriers");
    }
    if (!(noise_var >= 0.0)) throw std::invalid_argument("noise variance must be non-negative");
    const auto p = static_cast<Eigen::Index>(grid.pilot_indices.size());
    const auto l = r_hh.rows();
    // A = diag(P) * F_p maps taps to pilot observations.
    Eigen::MatrixXcd a(p, l);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double k = static_cast<double>(grid.pilot_indices[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < l; ++j) {
            const double ang = -2.0 * kPi * k * static_cast<double>(j) / static_cast<double>(grid.n);
            a(i, j) = grid.pilot_values[static_cast<std::size_t>(i)] * std::polar(1.0, ang);
        }
    }
    const Eigen::MatrixXcd ra = r_hh * a.adjoint();
    Eigen::MatrixXcd s = a * ra;
    if (noise_var > 0.0) {
        s += noise_var * Eigen::MatrixXcd::Identity(p, p);
        Eigen::LLT<Eigen::MatrixXcd> llt(s);
        if (llt.info() != Eigen::Success) throw std::runtime_error("singular MMSE system");
        filter_ = llt.solve(ra.adjoint()).adjoint();
    } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(s);
        if (cod.rank() == 0) throw std::runtime_error("singular MMSE system");
        filter_ = ra * cod.pseudoInverse();
    }
}

ChannelTaps MmseEstimator::taps(std::span<const cplx> rx_freq) const {
    const auto& grid = *grid_;
    if (rx_freq.size() != grid.n) throw std::invalid_argument("received grid size mismatch");
    Eigen::VectorXcd y(static_cast<Eigen::Index>(grid.pilot_indices.size()));
    for (std::size_t i = 0; i < grid.pilot_indices.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = rx_freq[grid.pilot_indices[i]];
    }
    const Eigen::VectorXcd h = filter_ * y;
    ChannelTaps out;
    out.taps.assign(h.data(), h.data() + h.size());
    return out;
}

ChannelEstimate MmseEstimator::estimate(std::span<const cplx> rx_freq) const {
    ChannelEstimate est;
    est.method = EstimationMethod::MMSE;
    est.noise_var = noise_var_;
    est.values = cfr_of(taps(rx_freq), grid_->n);
    return est;
}

ChannelEstimate mmse_estimate(std::span<const cplx> rx_freq, const OfdmGrid& grid,
                              const Eigen::MatrixXcd& r_hh, double noise_var) {
    return MmseEstimator(grid, r_hh, noise_var).estimate(rx_freq);
}

ComplexVec equalize(std::span<const cplx> rx_freq, const Cfr& est,
                    std::span<const std::size_t> indices) {
    ComplexVec out;
    out.reserve(indices.size());
    for (auto k : indices) {
        cplx h = est.values.at(k);
        if (std::abs(h) < 1e-12) h = std::abs(h) > 0.0 ? h / std::abs(h) * 1e-12 : cplx{1e-12, 0.0};
        out.push_back(rx_freq[k] / h);
    }
    return out;
}

}  // namespace pls
