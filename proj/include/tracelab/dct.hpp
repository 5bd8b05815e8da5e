#pragma once

#include <array>
#include <cmath>

namespace tracelab {

// Orthonormal 8x8 DCT-II basis, C[k][x] = s_k cos((2x+1)k pi / 16).
struct Dct8 {
    std::array<std::array<double, 8>, 8> basis{};

    Dct8() {
        const double pi = 3.14159265358979323846;
        for (int k = 0; k < 8; ++k) {
            const double s = (k == 0) ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int x = 0; x < 8; ++x)
                basis[k][x] = s * std::cos((2.0 * x + 1.0) * k * pi / 16.0);
        }
    }

    static const Dct8& instance() {
        static const Dct8 d;
        return d;
    }

    // block and coef are 64-element row-major 8x8 arrays.
    void forward(const double* block, double* coef) const {
        double tmp[64];
        for (int k = 0; k < 8; ++k)
            for (int x = 0; x < 8; ++x) {
                double acc = 0.0;
                for (int j = 0; j < 8; ++j) acc += basis[k][j] * block[x * 8 + j];
                tmp[x * 8 + k] = acc;
            }
        for (int u = 0; u < 8; ++u)
            for (int v = 0; v < 8; ++v) {
                double acc = 0.0;
                for (int j = 0; j < 8; ++j) acc += basis[u][j] * tmp[j * 8 + v];
                coef[u * 8 + v] = acc;
            }
    }

    void inverse(const double* coef, double* block) const {
        double tmp[64];
        for (int x = 0; x < 8; ++x)
            for (int v = 0; v < 8; ++v) {
                double acc = 0.0;
                for (int k = 0; k < 8; ++k) acc += basis[k][x] * coef[k * 8 + v];
                tmp[x * 8 + v] = acc;
            }
        for (int x = 0; x < 8; ++x)
            for (int y = 0; y < 8; ++y) {
                double acc = 0.0;
                for (int k = 0; k < 8; ++k) acc += basis[k][y] * tmp[x * 8 + k];
                block[x * 8 + y] = acc;
            }
    }
};

}  // namespace tracelab
