#include "tracelab/png_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "tracelab/errors.hpp"

namespace tracelab {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& payload) {
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    const size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0, out.data() + start, static_cast<uInt>(out.size() - start)));
    put_u32(out, crc);
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& img) {
    const int h = img.height, w = img.width;
    const size_t stride = static_cast<size_t>(w) * 3;
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<size_t>(h) * (stride + 1));
    for (int y = 0; y < h; ++y) {
        raw.push_back(0);  // filter type: none
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) raw.push_back(to_byte(img.at(y, x, c)));
    }

    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()),
                  Z_DEFAULT_COMPRESSION) != Z_OK)
        throw IoError("png encode: deflate failed");
    comp.resize(comp_len);

    std::vector<std::uint8_t> out;
    const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.insert(out.end(), sig, sig + 8);

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(w));
    put_u32(ihdr, static_cast<std::uint32_t>(h));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", comp);
    put_chunk(out, "IEND", {});
    return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
        throw IoError("not a PNG file: " + origin);

    int w = 0, h = 0;
    std::vector<std::uint8_t> idat;
    size_t pos = 8;
    bool seen_ihdr = false;
    while (pos + 12 <= bytes.size()) {
        const std::uint32_t len = get_u32(bytes.data() + pos);
        if (pos + 12 + len > bytes.size()) throw IoError("truncated PNG chunk: " + origin);
        const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
        const std::uint8_t* payload = bytes.data() + pos + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw IoError("bad IHDR: " + origin);
            w = static_cast<int>(get_u32(payload));
            h = static_cast<int>(get_u32(payload + 4));
            if (payload[8] != 8 || payload[9] != 2 || payload[12] != 0)
                throw IoError("unsupported PNG format (need 8-bit RGB): " + origin);
            seen_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (!seen_ihdr || w <= 0 || h <= 0) throw IoError("missing IHDR: " + origin);

    const size_t stride = static_cast<size_t>(w) * 3;
    std::vector<std::uint8_t> raw(static_cast<size_t>(h) * (stride + 1));
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw IoError("png inflate failed: " + origin);

    std::vector<std::uint8_t> prev(stride, 0);
    std::vector<std::uint8_t> cur(stride);
    Image img(h, w);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* line = raw.data() + static_cast<size_t>(y) * (stride + 1);
        const int filter = line[0];
        for (size_t i = 0; i < stride; ++i) {
            const int x = line[1 + i];
            const int a = i >= 3 ? cur[i - 3] : 0;
            const int b = prev[i];
            const int c = i >= 3 ? prev[i - 3] : 0;
            int v = 0;
            switch (filter) {
                case 0: v = x; break;
                case 1: v = x + a; break;
                case 2: v = x + b; break;
                case 3: v = x + (a + b) / 2; break;
                case 4: v = x + paeth(a, b, c); break;
                default: throw IoError("bad PNG filter type: " + origin);
            }
            cur[i] = static_cast<std::uint8_t>(v & 0xff);
        }
        for (size_t i = 0; i < stride; ++i) img.data[static_cast<size_t>(y) * stride + i] = cur[i] / 255.0;
        std::swap(prev, cur);
    }
    return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
    const auto bytes = encode_png(img);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for write: " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write: " + path.string());
}

Image read_png(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for read: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return decode_png(bytes, path.string());
}

}  // namespace tracelab
