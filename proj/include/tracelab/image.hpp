#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tracelab/errors.hpp"

namespace tracelab {

// H x W x 3 image, row-major, interleaved RGB, values in [0, 1].
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // height * width * 3

    Image() = default;
    Image(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0.0) {}

    double& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    double at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }

    size_t pixel_count() const { return static_cast<size_t>(height) * width; }
    size_t value_count() const { return data.size(); }

    bool valid() const {
        if (height < 16 || width < 16) return false;
        if (data.size() != static_cast<size_t>(height) * width * 3) return false;
        for (double v : data)
            if (!(v >= 0.0 && v <= 1.0)) return false;
        return true;
    }

    void clamp01() {
        for (double& v : data) v = std::clamp(v, 0.0, 1.0);
    }

    // Rec.601 luma.
    std::vector<double> luminance() const {
        std::vector<double> lum(pixel_count());
        for (size_t p = 0; p < lum.size(); ++p)
            lum[p] = 0.299 * data[p * 3] + 0.587 * data[p * 3 + 1] + 0.114 * data[p * 3 + 2];
        return lum;
    }
};

inline std::uint8_t to_byte(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

// The canonical at-rest representation: clamp then quantize to 8 bits.
inline Image quantize8(const Image& img) {
    Image out(img.height, img.width);
    for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = to_byte(img.data[i]) / 255.0;
    return out;
}

}  // namespace tracelab
