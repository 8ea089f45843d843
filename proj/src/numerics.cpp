#include "pls/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pls {

namespace {

void fft_in_place(ComplexVec& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("fft length must be a power of two");
    }
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::size_t half = len / 2;
        for (std::size_t k = 0; k < half; ++k) {
            const cplx w = std::polar(1.0, ang * static_cast<double>(k));
            for (std::size_t i = k; i < n; i += len) {
                const cplx u = a[i];
                const cplx v = a[i + half] * w;
                a[i] = u + v;
                a[i + half] = u - v;
            }
        }
    }
    if (inverse) {
        const double s = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= s;
    }
}

cplx horner(std::span<const cplx> desc, cplx z) {
    cplx acc{0.0, 0.0};
    for (const auto& c : desc) acc = acc * z + c;
    return acc;
}

cplx horner_deriv(std::span<const cplx> desc, cplx z) {
    cplx acc{0.0, 0.0};
    const std::size_t deg = desc.size() - 1;
    for (std::size_t i = 0; i < deg; ++i) {
        acc = acc * z + desc[i] * static_cast<double>(deg - i);
    }
    return acc;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

ComplexVec fft(std::span<const cplx> x) {
    ComplexVec a(x.begin(), x.end());
    fft_in_place(a, false);
    return a;
}

ComplexVec ifft(std::span<const cplx> x) {
    ComplexVec a(x.begin(), x.end());
    fft_in_place(a, true);
    return a;
}

ComplexVec fft_padded(std::span<const cplx> x, std::size_t n) {
    ComplexVec a(n, cplx{});
    std::copy_n(x.begin(), std::min(n, x.size()), a.begin());
    fft_in_place(a, false);
    return a;
}

PolyRoots poly_roots(std::span<const cplx> coeffs) {
    std::size_t last = coeffs.size();
    while (last > 0 && coeffs[last - 1] == cplx{}) --last;
    if (last == 0) throw std::invalid_argument("degenerate polynomial");
    std::size_t first = 0;
    while (coeffs[first] == cplx{}) ++first;

    PolyRoots out;
    out.delay = first;
    out.leading_coeff = coeffs[first];
    // In powers of z the coefficients read c[first] z^D + ... + c[last-1].
    std::vector<cplx> desc(coeffs.begin() + static_cast<std::ptrdiff_t>(first),
                           coeffs.begin() + static_cast<std::ptrdiff_t>(last));
    const std::size_t deg = desc.size() - 1;
    if (deg == 0) return out;

    const auto d = static_cast<Eigen::Index>(deg);
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        companion(0, j) = -desc[static_cast<std::size_t>(j) + 1] / desc[0];
    }
    for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("root finding did not converge");
    }
    out.roots.reserve(deg);
    for (Eigen::Index i = 0; i < d; ++i) {
        cplx z = solver.eigenvalues()(i);
        // Newton polishing, accepted only while the residual shrinks.
        double res = std::abs(horner(desc, z));
        for (int it = 0; it < 8 && res > 0.0; ++it) {
            const cplx dp = horner_deriv(desc, z);
            if (dp == cplx{}) break;
            const cplx cand = z - horner(desc, z) / dp;
            const double cand_res = std::abs(horner(desc, cand));
            if (!(cand_res < res)) break;
            z = cand;
            res = cand_res;
        }
        out.roots.push_back(z);
    }
    return out;
}

ComplexVec poly_from_roots(std::span<const cplx> roots, cplx gain) {
    ComplexVec c{gain};
    c.reserve(roots.size() + 1);
    for (const auto& r : roots) {
        c.push_back(cplx{});
        for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= r * c[i - 1];
    }
    return c;
}

ComplexVec convolve(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.empty() || b.empty()) return {};
    ComplexVec out(a.size() + b.size() - 1, cplx{});
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

ComplexVec min_phase_from_magnitude(std::span<const double> magnitude) {
    const std::size_t n = magnitude.size();
    if (!is_power_of_two(n) || n < 2) {
        throw std::invalid_argument("magnitude length must be a power of two >= 2");
    }
    double peak = 0.0;
    for (double m : magnitude) {
        if (!std::isfinite(m) || m < 0.0) {
            throw std::invalid_argument("magnitude samples must be finite and non-negative");
        }
        peak = std::max(peak, m);
    }
    if (peak <= 0.0) throw std::invalid_argument("magnitude is identically zero");
    const double floor = 1e-8 * peak;

    ComplexVec logmag(n);
    for (std::size_t k = 0; k < n; ++k) logmag[k] = std::log(std::max(magnitude[k], floor));
    ComplexVec cep = ifft(logmag);
    const std::size_t half = n / 2;
    for (std::size_t i = 1; i < half; ++i) cep[i] *= 2.0;
    for (std::size_t i = half + 1; i < n; ++i) cep[i] = cplx{};
    ComplexVec spec = fft(cep);
    for (auto& v : spec) v = std::exp(v);
    return spec;
}

std::vector<double> unwrap_phase(std::span<const double> phase) {
    std::vector<double> out(phase.begin(), phase.end());
    for (std::size_t i = 1; i < out.size(); ++i) {
        double d = phase[i] - phase[i - 1];
        d = std::remainder(d, 2.0 * kPi);
        out[i] = out[i - 1] + d;
    }
    return out;
}

ComplexVec continuous_sqrt(std::span<const cplx> values) {
    std::vector<double> ph(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) ph[i] = std::arg(values[i]);
    const auto un = unwrap_phase(ph);
    ComplexVec out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = std::polar(std::sqrt(std::abs(values[i])), 0.5 * un[i]);
    }
    return out;
}

}  // namespace pls
