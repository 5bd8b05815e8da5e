#pragma once

#include <complex>
#include <vector>

namespace tracelab {

using Complex = std::complex<double>;

inline bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT; inverse when sign = +1 (unscaled).
inline void fft_pow2(std::vector<Complex>& a, int sign) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * 3.14159265358979323846 / static_cast<double>(len);
        const Complex wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// O(n^2) fallback for non-power-of-two lengths (sizes here are multiples of 8,
// not necessarily powers of two).
inline void dft_naive(std::vector<Complex>& a, int sign) {
    const size_t n = a.size();
    std::vector<Complex> out(n, Complex(0.0, 0.0));
    for (size_t k = 0; k < n; ++k) {
        for (size_t j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * 3.14159265358979323846 * static_cast<double>(k * j) /
                               static_cast<double>(n);
            out[k] += a[j] * Complex(std::cos(ang), std::sin(ang));
        }
    }
    a = std::move(out);
}

inline void fft_1d(std::vector<Complex>& a, int sign) {
    if (is_pow2(a.size()))
        fft_pow2(a, sign);
    else
        dft_naive(a, sign);
}

// Separable 2D transform on an n x n grid (row-major). sign=-1 forward,
// sign=+1 inverse (unscaled; caller divides by n*n after a roundtrip).
inline void fft_2d(std::vector<Complex>& grid, int n, int sign) {
    std::vector<Complex> line(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) line[c] = grid[static_cast<size_t>(r) * n + c];
        fft_1d(line, sign);
        for (int c = 0; c < n; ++c) grid[static_cast<size_t>(r) * n + c] = line[c];
    }
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) line[r] = grid[static_cast<size_t>(r) * n + c];
        fft_1d(line, sign);
        for (int r = 0; r < n; ++r) grid[static_cast<size_t>(r) * n + c] = line[r];
    }
}

}  // namespace tracelab
