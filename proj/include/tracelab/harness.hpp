#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tracelab/corpus.hpp"
#include "tracelab/detector.hpp"

namespace tracelab {

inline constexpr const char* kToolVersion = "1.0.0";

// Resolved configuration for one experiment run. Every field has a desk-scale
// default; the JSON config file overrides selectively.
struct ExperimentConfig {
    std::string kind = "within_channel";  // within_channel | cross_channel | sparse_vs_full |
                                          // property1 | variance_probe | visualize
    std::uint64_t seed = 1234;
    int threads = 1;
    std::filesystem::path out_dir = "run";

    CorpusConfig corpus;
    double train_fraction = 0.8;

    std::vector<std::string> channel_list = {"continuous", "token", "denoise"};
    int continuous_d = 8;
    int token_patch = 8;
    int token_K = 64;
    int denoise_T = 8;
    int denoise_t_start = -1;  // -1 -> T/2

    int selection_k = 25;
    TrainConfig train;

    int probe_batch = 16;
    int probe_trials = 10000;
    int property1_d = 8;
    int property1_seeds = 5;

    void validate() const;
    std::string to_json_string() const;  // resolved echo, deterministic bytes
    static ExperimentConfig from_json_file(const std::filesystem::path& path);
    static ExperimentConfig from_json_string(const std::string& text);
};

// Executes the configured experiment kind end to end and writes all artifacts
// (resolved config, manifests, metrics CSV/JSON, version stamp) under
// config.out_dir. Throws on failure after persisting partial results.
void run_experiment(const ExperimentConfig& config);

// Feature CSV (tag,source,f0..f127 rows) -> 3-D scatter CSV (x,y,z,tag).
void emit_viz(const std::filesystem::path& features_csv, const std::filesystem::path& out_csv);

// Machine-readable error record for nonzero exits.
void write_error_record(const std::filesystem::path& out_dir, const std::string& stage,
                        const std::string& message);

}  // namespace tracelab
