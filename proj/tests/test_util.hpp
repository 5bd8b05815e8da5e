#pragma once

#include <complex>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tracelab/image.hpp"
#include "tracelab/rng.hpp"

namespace testutil {

// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "tracelab_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return s;
}

// Uniform-random image with values in [lo, hi].
inline tracelab::Image random_image(tracelab::Rng& rng, int h, int w, double lo = 0.0,
                                    double hi = 1.0) {
    tracelab::Image img(h, w);
    for (double& v : img.data) v = rng.uniform(lo, hi);
    return img;
}

inline tracelab::Image constant_image(int h, int w, double r, double g, double b) {
    tracelab::Image img(h, w);
    for (size_t p = 0; p < img.pixel_count(); ++p) {
        img.data[p * 3] = r;
        img.data[p * 3 + 1] = g;
        img.data[p * 3 + 2] = b;
    }
    return img;
}

// Independent separable naive DFT (direct summation, no radix tricks) used as
// the spectral oracle against the library's generator.
inline std::vector<std::complex<double>> naive_dft_2d(const std::vector<double>& field, int n) {
    const std::complex<double> I(0.0, 1.0);
    std::vector<std::complex<double>> rows(static_cast<size_t>(n) * n);
    for (int y = 0; y < n; ++y)
        for (int k = 0; k < n; ++k) {
            std::complex<double> acc = 0.0;
            for (int x = 0; x < n; ++x)
                acc += field[static_cast<size_t>(y) * n + x] *
                       std::exp(-2.0 * M_PI * I * (double(k) * x / n));
            rows[static_cast<size_t>(y) * n + k] = acc;
        }
    std::vector<std::complex<double>> out(static_cast<size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) {
            std::complex<double> acc = 0.0;
            for (int y = 0; y < n; ++y)
                acc += rows[static_cast<size_t>(y) * n + k] *
                       std::exp(-2.0 * M_PI * I * (double(m) * y / n));
            out[static_cast<size_t>(m) * n + k] = acc;
        }
    return out;
}

}  // namespace testutil
