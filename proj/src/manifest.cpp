#include "tracelab/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "tracelab/errors.hpp"

namespace tracelab {

std::uint64_t fnv1a(const void* data, size_t len, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

nlohmann::json to_json(const DatasetManifest& m) {
    nlohmann::json j;
    j["version"] = m.version;
    j["channel"] = {{"kind", m.channel_kind},
                    {"params_hash", m.params_hash},
                    {"taxonomy_category", m.taxonomy_category}};
    auto entries = nlohmann::json::array();
    for (const auto& e : m.entries)
        entries.push_back({{"file", e.file}, {"label", e.label}, {"source", e.source}});
    j["entries"] = entries;
    return j;
}

}  // namespace

std::vector<ManifestEntry> DatasetManifest::fakes() const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries)
        if (e.label == 0) out.push_back(e);
    return out;
}

std::vector<ManifestEntry> DatasetManifest::reals() const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries)
        if (e.label == 1) out.push_back(e);
    return out;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write manifest: " + path.string());
    f << to_json(*this).dump(2) << "\n";
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read manifest: " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest " + path.string() + ": " + e.what());
    }
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    m.channel_kind = j.at("channel").at("kind").get<std::string>();
    m.params_hash = j.at("channel").at("params_hash").get<std::string>();
    m.taxonomy_category = j.at("channel").at("taxonomy_category").get<std::string>();
    for (const auto& e : j.at("entries")) {
        ManifestEntry entry;
        entry.file = e.at("file").get<std::string>();
        entry.label = e.at("label").get<int>();
        entry.source = e.at("source").get<int>();
        m.entries.push_back(std::move(entry));
    }
    return m;
}

std::uint64_t DatasetManifest::hash() const {
    const std::string s = to_json(*this).dump();
    return fnv1a(s.data(), s.size());
}

}  // namespace tracelab
