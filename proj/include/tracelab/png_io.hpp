#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tracelab/image.hpp"

namespace tracelab {

// 8-bit RGB PNG, fixed encoder settings so identical pixels yield identical bytes.
void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(const std::vector<std::uint8_t>& bytes, const std::string& origin);

}  // namespace tracelab
