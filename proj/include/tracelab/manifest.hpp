#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tracelab {

struct ManifestEntry {
    std::string file;
    int label = 0;  // 1 = real, 0 = constructed
    int source = -1;  // index of the real counterpart within the source corpus
};

struct DatasetManifest {
    int version = 1;
    std::string channel_kind;  // "continuous" | "token" | "denoise" | "sparse_union" | "real"
    std::string params_hash;
    std::string taxonomy_category;
    std::vector<ManifestEntry> entries;

    std::vector<ManifestEntry> fakes() const;
    std::vector<ManifestEntry> reals() const;

    void save(const std::filesystem::path& path) const;
    static DatasetManifest load(const std::filesystem::path& path);

    // FNV-1a over the serialized form; byte-identical manifests hash equal.
    std::uint64_t hash() const;
};

std::uint64_t fnv1a(const void* data, size_t len, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hash_hex(std::uint64_t h);

}  // namespace tracelab
