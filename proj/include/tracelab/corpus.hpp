#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "tracelab/image.hpp"

namespace tracelab {

struct CorpusConfig {
    int count = 512;
    int size = 64;  // square, multiple of 8
    std::uint64_t seed = 1234;
    double spectral_exponent = 2.0;  // power spectrum ~ 1/f^gamma
    double shape_density = 0.3;      // in [0, 1]

    void validate() const;
};

// Deterministic synthetic "real" corpus: 1/f^gamma Gaussian random fields
// overlaid with flat geometric patches. Image i depends only on
// (seed, i), so parallel generation equals serial generation.
std::vector<Image> generate_corpus(const CorpusConfig& config);
Image generate_image(const CorpusConfig& config, int index);

// 8-bit PNGs plus a JSON manifest; returns the manifest path.
std::filesystem::path save_corpus(const std::vector<Image>& images,
                                  const std::filesystem::path& directory,
                                  const CorpusConfig& config);
std::vector<Image> load_corpus(const std::filesystem::path& directory);
std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& directory);

// Disjoint, exhaustive partition by seeded permutation.
std::pair<std::vector<Image>, std::vector<Image>> split_corpus(const std::vector<Image>& images,
                                                               double train_fraction,
                                                               std::uint64_t seed);
std::pair<std::vector<int>, std::vector<int>> split_indices(int n, double train_fraction,
                                                            std::uint64_t seed);

}  // namespace tracelab
