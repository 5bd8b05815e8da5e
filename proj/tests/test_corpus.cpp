#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tracelab/corpus.hpp"
#include "tracelab/errors.hpp"
#include "tracelab/png_io.hpp"
#include "test_util.hpp"

using namespace tracelab;

TEST_SUITE("corpus") {

TEST_CASE("small corpus: count, validity, range") {
    CorpusConfig cfg;
    cfg.count = 4;
    cfg.size = 16;
    cfg.seed = 7;
    const auto imgs = generate_corpus(cfg);
    REQUIRE(imgs.size() == 4);
    for (const auto& img : imgs) {
        CHECK(img.valid());
        CHECK(img.height == 16);
        CHECK(img.width == 16);
    }
}

TEST_CASE("generation is deterministic") {
    CorpusConfig cfg;
    cfg.count = 3;
    cfg.size = 16;
    cfg.seed = 11;
    const auto a = generate_corpus(cfg);
    const auto b = generate_corpus(cfg);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);
}

TEST_CASE("per-image sub-seeding: image i independent of count") {
    CorpusConfig cfg;
    cfg.size = 16;
    cfg.seed = 5;
    cfg.count = 2;
    const auto two = generate_corpus(cfg);
    cfg.count = 6;
    const auto six = generate_corpus(cfg);
    CHECK(two[0].data == six[0].data);
    CHECK(two[1].data == six[1].data);
}

TEST_CASE("invalid configs rejected") {
    CorpusConfig cfg;
    cfg.count = 0;
    CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
    cfg.count = 1;
    cfg.size = 20;  // not a multiple of 8
    CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
    cfg.size = 8;  // below the 16-pixel minimum
    CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
    cfg.size = 16;
    cfg.shape_density = 1.5;
    CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
}

TEST_CASE("radial power-spectrum slope tracks the spectral exponent") {
    CorpusConfig cfg;
    cfg.count = 32;
    cfg.size = 64;
    cfg.seed = 99;
    cfg.spectral_exponent = 2.0;
    cfg.shape_density = 0.0;  // flat overlays would distort the slope estimate
    const auto imgs = generate_corpus(cfg);

    const int n = cfg.size;
    std::vector<double> power(static_cast<size_t>(n), 0.0);
    std::vector<long> counts(static_cast<size_t>(n), 0);
    for (const auto& img : imgs) {
        std::vector<double> lum = img.luminance();
        const double mean = std::accumulate(lum.begin(), lum.end(), 0.0) / lum.size();
        for (double& v : lum) v -= mean;
        const auto spec = testutil::naive_dft_2d(lum, n);
        for (int ky = 0; ky < n; ++ky)
            for (int kx = 0; kx < n; ++kx) {
                const int fy = ky <= n / 2 ? ky : ky - n;
                const int fx = kx <= n / 2 ? kx : kx - n;
                const int r = static_cast<int>(
                    std::lround(std::sqrt(double(fy) * fy + double(fx) * fx)));
                if (r >= 1 && r < n) {
                    power[static_cast<size_t>(r)] += std::norm(spec[static_cast<size_t>(ky) * n + kx]);
                    ++counts[static_cast<size_t>(r)];
                }
            }
    }

    // Least-squares slope of log mean power vs log radius over mid frequencies.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int r = 2; r <= n / 4; ++r) {
        const double px = std::log(static_cast<double>(r));
        const double py = std::log(power[static_cast<size_t>(r)] / counts[static_cast<size_t>(r)]);
        sx += px;
        sy += py;
        sxx += px * px;
        sxy += px * py;
        ++m;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-cfg.spectral_exponent).epsilon(0.15));
    CHECK(std::abs(slope + cfg.spectral_exponent) < 0.3);
}

TEST_CASE("save/load quantization bound and byte idempotence") {
    const auto dir = testutil::scratch_dir("corpus_io");
    CorpusConfig cfg;
    cfg.count = 4;
    cfg.size = 16;
    cfg.seed = 21;
    const auto imgs = generate_corpus(cfg);
    save_corpus(imgs, dir, cfg);

    const auto loaded = load_corpus(dir);
    REQUIRE(loaded.size() == imgs.size());
    double max_diff = 0.0;
    for (size_t i = 0; i < imgs.size(); ++i)
        for (size_t j = 0; j < imgs[i].data.size(); ++j)
            max_diff = std::max(max_diff, std::abs(imgs[i].data[j] - loaded[i].data[j]));
    CHECK(max_diff <= 1.0 / 255.0 + 1e-12);

    // save(load(save(x))) produces identical PNG bytes.
    const auto dir2 = testutil::scratch_dir("corpus_io2");
    save_corpus(loaded, dir2, cfg);
    for (int i = 0; i < cfg.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%05d.png", i);
        CHECK(testutil::slurp(dir / name) == testutil::slurp(dir2 / name));
    }
}

TEST_CASE("load without manifest fails") {
    const auto dir = testutil::scratch_dir("corpus_empty");
    CHECK_THROWS_AS(load_corpus(dir), IoError);
}

TEST_CASE("split: sizes, disjointness, determinism, multiset preservation") {
    CorpusConfig cfg;
    cfg.count = 10;
    cfg.size = 16;
    cfg.seed = 3;
    const auto imgs = generate_corpus(cfg);

    const auto [train, test] = split_corpus(imgs, 0.8, 42);
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);

    const auto [i1, i2] = split_indices(10, 0.8, 42);
    const auto [j1, j2] = split_indices(10, 0.8, 42);
    CHECK(i1 == j1);
    CHECK(i2 == j2);

    std::vector<int> all = i1;
    all.insert(all.end(), i2.begin(), i2.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 10; ++i) CHECK(all[static_cast<size_t>(i)] == i);

    // Union of the split multisets equals the input multiset.
    std::vector<std::vector<double>> combined;
    for (const auto& im : train) combined.push_back(im.data);
    for (const auto& im : test) combined.push_back(im.data);
    std::vector<std::vector<double>> original;
    for (const auto& im : imgs) original.push_back(im.data);
    std::sort(combined.begin(), combined.end());
    std::sort(original.begin(), original.end());
    CHECK(combined == original);

    CHECK_THROWS_AS(split_corpus(imgs, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split_corpus(imgs, 1.0, 1), ConfigError);
}

}  // TEST_SUITE
