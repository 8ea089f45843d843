#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pls {

using cplx = std::complex<double>;
using ComplexVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;

bool is_power_of_two(std::size_t n);

// Forward DFT without scaling; the inverse carries 1/N. Power-of-two lengths only.
ComplexVec fft(std::span<const cplx> x);
ComplexVec ifft(std::span<const cplx> x);

// Zero-pads (or truncates) to n before transforming.
ComplexVec fft_padded(std::span<const cplx> x, std::size_t n);

struct PolyRoots {
    ComplexVec roots;
    cplx leading_coeff{};
    // Leading zero coefficients, i.e. a pure delay factor z^-d.
    std::size_t delay = 0;
};

// Roots of sum_l c[l] z^-l, so c == leading_coeff * z^-delay * prod(1 - r_k z^-1).
PolyRoots poly_roots(std::span<const cplx> coeffs);

// Coefficients of gain * prod(1 - r_k z^-1) in powers of z^-1.
ComplexVec poly_from_roots(std::span<const cplx> roots, cplx gain);

ComplexVec convolve(std::span<const cplx> a, std::span<const cplx> b);

// Minimum-phase spectrum with the given magnitude, via the folded real cepstrum.
// Magnitudes below 1e-8 * max are floored.
ComplexVec min_phase_from_magnitude(std::span<const double> magnitude);

std::vector<double> unwrap_phase(std::span<const double> phase);

// Square root whose phase follows the unwrapped phase starting from bin 0.
ComplexVec continuous_sqrt(std::span<const cplx> values);

}  // namespace pls
