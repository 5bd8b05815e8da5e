#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "tracelab/errors.hpp"
#include "tracelab/harness.hpp"
#include "tracelab/taxonomy.hpp"
#include "test_util.hpp"

using namespace tracelab;

namespace {

// Compact defaults so the harness suites run in seconds.
ExperimentConfig tiny_config(const std::string& kind, const std::filesystem::path& out) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.out_dir = out;
    cfg.seed = 77;
    cfg.corpus.count = 64;
    cfg.corpus.size = 16;
    cfg.corpus.seed = 77;
    cfg.continuous_d = 8;
    cfg.token_K = 8;
    cfg.denoise_T = 4;
    cfg.selection_k = 4;
    cfg.train.epochs = 8;
    cfg.train.batch = 8;
    return cfg;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cols.push_back(cell);
        rows.push_back(cols);
    }
    return rows;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("taxonomy registry: size, categories, filter, dual entries") {
    const auto& reg = taxonomy_registry();
    std::set<std::string> names;
    for (const auto& e : reg) names.insert(e.name);
    CHECK(names.size() >= 21);

    const auto& cats = taxonomy_categories();
    for (const auto& e : reg)
        CHECK(std::find(cats.begin(), cats.end(), e.category) != cats.end());

    const auto vq = taxonomy_list("VQ.de-tokenizer");
    std::set<std::string> vq_names;
    for (const auto& e : vq) vq_names.insert(e.name);
    for (const char* want : {"Emu3", "JanusPro", "LlamaGen", "VAR", "Infinity", "Kandinsky 3.0"})
        CHECK(vq_names.count(want) == 1);

    CHECK_THROWS_AS(taxonomy_list("GAN.upsampler"), ConfigError);

    // Dual-implementation generators appear once per implementation with
    // distinct source notes.
    for (const char* dual : {"Flux 1-dev", "DeepFloyd IF"}) {
        std::vector<TaxonomyEntry> hits;
        for (const auto& e : reg)
            if (e.name == dual) hits.push_back(e);
        REQUIRE(hits.size() == 2);
        CHECK(hits[0].source_note != hits[1].source_note);
        CHECK(hits[0].category != hits[1].category);
    }
}

TEST_CASE("taxonomy JSON round-trip is lossless") {
    const auto dir = testutil::scratch_dir("taxonomy_io");
    save_taxonomy(taxonomy_registry(), dir / "tax.json");
    const auto back = load_taxonomy(dir / "tax.json");
    REQUIRE(back.size() == taxonomy_registry().size());
    for (size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].name == taxonomy_registry()[i].name);
        CHECK(back[i].category == taxonomy_registry()[i].category);
        CHECK(back[i].subcategory == taxonomy_registry()[i].subcategory);
        CHECK(back[i].source_note == taxonomy_registry()[i].source_note);
    }
}

TEST_CASE("experiment config: parse, echo, validation") {
    const ExperimentConfig def;
    const ExperimentConfig parsed = ExperimentConfig::from_json_string("{}");
    CHECK(parsed.kind == def.kind);
    CHECK(parsed.corpus.count == def.corpus.count);

    const ExperimentConfig custom = ExperimentConfig::from_json_string(
        R"({"kind":"cross_channel","seed":5,"corpus":{"count":32,"size":16},"train":{"arch":"mlp"}})");
    CHECK(custom.kind == "cross_channel");
    CHECK(custom.corpus.count == 32);
    CHECK(custom.train.arch == Arch::mlp);

    // The echo parses back to the same resolved config.
    const ExperimentConfig echoed = ExperimentConfig::from_json_string(custom.to_json_string());
    CHECK(echoed.to_json_string() == custom.to_json_string());

    ExperimentConfig bad;
    bad.kind = "mystery";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = def;
    bad.channel_list = {"continuous", "vae"};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_string("{nope"), ConfigError);
}

TEST_CASE("within_channel smoke run emits metrics and reruns byte-identically") {
    const auto out = testutil::scratch_dir("harness_within");
    const ExperimentConfig cfg = tiny_config("within_channel", out);
    run_experiment(cfg);

    CHECK(std::filesystem::exists(out / "resolved_config.json"));
    CHECK(std::filesystem::exists(out / "version.txt"));
    const std::string first = testutil::slurp(out / "metrics.csv");
    const auto rows = parse_csv(first);
    REQUIRE(rows.size() == 4);  // header + one row per channel
    CHECK(rows[0][0] == "experiment");
    std::set<std::string> subjects;
    for (size_t r = 1; r < rows.size(); ++r) {
        subjects.insert(rows[r][1]);
        const double acc = std::stod(rows[r][3]);
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }
    CHECK(subjects == std::set<std::string>{"continuous", "token", "denoise"});

    run_experiment(cfg);
    CHECK(testutil::slurp(out / "metrics.csv") == first);
}

TEST_CASE("cross_channel emits a full train-by-test accuracy matrix") {
    const auto out = testutil::scratch_dir("harness_cross");
    ExperimentConfig cfg = tiny_config("cross_channel", out);
    run_experiment(cfg);

    const auto rows = parse_csv(testutil::slurp(out / "cross_matrix.csv"));
    REQUIRE(rows.size() == 4);  // header + 3 train channels
    REQUIRE(rows[0].size() == 4);
    CHECK(rows[0][0] == "train_channel");
    for (size_t r = 1; r < rows.size(); ++r) {
        REQUIRE(rows[r].size() == 4);
        for (size_t c = 1; c < 4; ++c) {
            const double acc = std::stod(rows[r][c]);
            CHECK(acc >= 0.0);
            CHECK(acc <= 1.0);
        }
    }
}

TEST_CASE("sparse_vs_full emits both reports") {
    const auto out = testutil::scratch_dir("harness_sparse");
    ExperimentConfig cfg = tiny_config("sparse_vs_full", out);
    run_experiment(cfg);
    const auto rows = parse_csv(testutil::slurp(out / "metrics.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][1] == "full");
    CHECK(rows[2][1] == "sparse");
}

TEST_CASE("visualize pipeline and emit_viz") {
    const auto out = testutil::scratch_dir("harness_viz");
    ExperimentConfig cfg = tiny_config("visualize", out);
    cfg.corpus.count = 24;
    run_experiment(cfg);

    const std::string scatter = testutil::slurp(out / "scatter.csv");
    const auto rows = parse_csv(scatter);
    REQUIRE(rows.size() > 1);
    CHECK(rows[0] == std::vector<std::string>{"x", "y", "z", "tag"});
    std::set<std::string> tags;
    for (size_t r = 1; r < rows.size(); ++r) tags.insert(rows[r][3]);
    for (const char* t : {"continuous", "token", "denoise", "real"}) CHECK(tags.count(t) == 1);

    // Re-running the projection is deterministic.
    emit_viz(out / "features.csv", out / "scatter2.csv");
    CHECK(testutil::slurp(out / "scatter2.csv") == scatter);

    // Malformed input reports the offending line.
    const auto bad = out / "bad.csv";
    {
        std::ofstream f(bad);
        f << "tag,source,f0,f1\nreal,0,0.1,0.2\nreal,1,0.3\n";
    }
    try {
        emit_viz(bad, out / "never.csv");
        FAIL("expected parse error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("stage failure leaves a machine-readable error record") {
    const auto out = testutil::scratch_dir("harness_error");
    ExperimentConfig cfg = tiny_config("within_channel", out);
    cfg.continuous_d = 16 * 16 * 3 + 1;  // larger than D: channel fit must fail
    CHECK_THROWS(run_experiment(cfg));
    CHECK(std::filesystem::exists(out / "error.json"));
    CHECK(std::filesystem::exists(out / "resolved_config.json"));
}

}  // TEST_SUITE
