#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tracelab/channels.hpp"
#include "tracelab/corpus.hpp"
#include "tracelab/errors.hpp"
#include "tracelab/rng.hpp"
#include "tracelab/selection.hpp"
#include "test_util.hpp"

using namespace tracelab;

namespace {

// Exhaustive optimum over all k-subsets; reference for the PAM solver.
double brute_force_optimum(const Eigen::MatrixXd& dist, int k) {
    const int n = static_cast<int>(dist.rows());
    std::vector<int> pick(static_cast<size_t>(k));
    std::vector<int> best;
    double best_td = std::numeric_limits<double>::infinity();
    // Iterate combinations.
    std::vector<int> idx(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
    while (true) {
        const double td = total_deviation(dist, idx);
        if (td < best_td) best_td = td;
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<size_t>(pos)] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<size_t>(pos)];
        for (int j = pos + 1; j < k; ++j) idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
    return best_td;
}

Eigen::MatrixXd random_dist(Rng& rng, int n, int dim) {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v(dim);
        for (int j = 0; j < dim; ++j) v(j) = rng.normal();
        pts.push_back(v);
    }
    return distance_matrix(pts);
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("distance_matrix basics") {
    Eigen::VectorXd a(2), b(2), c(2);
    a << 0, 0;
    b << 3, 4;
    c << 0, 0;
    const Eigen::MatrixXd d = distance_matrix({a, b, c});
    CHECK(d(0, 1) == doctest::Approx(5.0));
    CHECK(d(1, 0) == doctest::Approx(5.0));
    CHECK(d(0, 2) == 0.0);
    CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd wrong(3);
    wrong.setZero();
    CHECK_THROWS_AS(distance_matrix({a, wrong}), ShapeError);
    CHECK_THROWS_AS(distance_matrix({a}), ConfigError);
}

TEST_CASE("distance_matrix: symmetry and triangle inequality on random points") {
    Rng rng(61);
    const Eigen::MatrixXd d = random_dist(rng, 10, 5);
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            for (int k = 0; k < 10; ++k) CHECK(d(i, j) <= d(i, k) + d(k, j) + 1e-9);
}

TEST_CASE("kmedoids: trivial and hand cases") {
    Rng rng(62);
    const Eigen::MatrixXd d = random_dist(rng, 6, 3);
    const MedoidSolution all = kmedoids(d, 6);
    CHECK(all.total_deviation == 0.0);
    CHECK(all.medoids.size() == 6);

    // 1-D points {0, 1, 10}: the middle point is the unique 1-medoid.
    Eigen::VectorXd p0(1), p1(1), p2(1);
    p0 << 0;
    p1 << 1;
    p2 << 10;
    const MedoidSolution one = kmedoids(distance_matrix({p0, p1, p2}), 1);
    CHECK(one.medoids == std::vector<int>{1});
    CHECK(one.total_deviation == doctest::Approx(10.0));

    CHECK_THROWS_AS(kmedoids(d, 0), ConfigError);
    CHECK_THROWS_AS(kmedoids(d, 7), ConfigError);
}

TEST_CASE("kmedoids: reported deviation is consistent and medoids are distinct") {
    Rng rng(63);
    const Eigen::MatrixXd d = random_dist(rng, 15, 4);
    const MedoidSolution sol = kmedoids(d, 4);
    CHECK(sol.total_deviation == doctest::Approx(total_deviation(d, sol.medoids)).epsilon(1e-12));
    std::set<int> uniq(sol.medoids.begin(), sol.medoids.end());
    CHECK(uniq.size() == sol.medoids.size());
    CHECK(std::is_sorted(sol.medoids.begin(), sol.medoids.end()));
}

TEST_CASE("kmedoids: matches exhaustive search on small instances") {
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + static_cast<int>(rng.next_below(8));   // 5..12
        const int k = 1 + static_cast<int>(rng.next_below(3));   // 1..3
        const Eigen::MatrixXd d = random_dist(rng, n, 3);
        const MedoidSolution sol = kmedoids(d, k);
        CHECK(sol.total_deviation == doctest::Approx(brute_force_optimum(d, k)).epsilon(1e-12));
    }
}

TEST_CASE("kmedoids: optimal deviation nonincreasing in k") {
    Rng rng(65);
    const Eigen::MatrixXd d = random_dist(rng, 12, 3);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 6; ++k) {
        const double td = kmedoids(d, k).total_deviation;
        CHECK(td <= prev + 1e-12);
        prev = td;
    }
}

TEST_CASE("select_sparse: union structure and provenance audit") {
    const auto dir = testutil::scratch_dir("select");
    CorpusConfig cfg;
    cfg.count = 10;
    cfg.size = 16;
    cfg.seed = 66;
    const auto corpus = generate_corpus(cfg);
    save_corpus(corpus, dir / "reals", cfg);
    std::vector<std::string> real_files;
    for (const auto& p : corpus_files(dir / "reals")) real_files.push_back(p.string());

    const ChannelVariant cont = fit_continuous(corpus, 3);
    const ChannelVariant tok = fit_token(corpus, 8, 4, 2);
    const ChannelVariant den = fit_denoise(corpus, 6);
    std::vector<DatasetManifest> manifests = {
        construct_negatives(cont, corpus, real_files, dir / "cont"),
        construct_negatives(tok, corpus, real_files, dir / "tok"),
        construct_negatives(den, corpus, real_files, dir / "den"),
    };

    const int k = 3;
    const SparseSelection sel = select_sparse(manifests, k, 7, dir / "sparse");
    CHECK(sel.manifest.fakes().size() == 3 * k);
    CHECK(sel.manifest.reals().size() == 3 * k);
    CHECK(sel.manifest.channel_kind == "sparse_union");
    REQUIRE(sel.per_set.size() == 3);

    // Every selected fake comes from its own input set (no cross-set leakage)
    // and each real counterpart shares the fake's source index.
    for (size_t s = 0; s < manifests.size(); ++s) {
        std::set<std::string> set_files;
        for (const auto& e : manifests[s].fakes()) set_files.insert(e.file);
        for (int idx : sel.per_set[s].medoids) {
            CHECK(idx >= 0);
            CHECK(idx < static_cast<int>(manifests[s].fakes().size()));
            CHECK(set_files.count(manifests[s].fakes()[static_cast<size_t>(idx)].file) == 1);
        }
    }
    std::map<int, std::string> real_by_source;
    for (const auto& e : manifests[0].reals()) real_by_source[e.source] = e.file;
    const auto fakes = sel.manifest.fakes();
    const auto reals = sel.manifest.reals();
    std::set<std::pair<int, std::string>> real_set;
    for (const auto& e : reals) real_set.insert({e.source, e.file});
    for (const auto& e : fakes)
        CHECK(real_set.count({e.source, real_by_source[e.source]}) == 1);

    // k = |D_i|: the union is the full input.
    const SparseSelection full = select_sparse(manifests, static_cast<int>(corpus.size()), 7,
                                               dir / "sparse_full");
    CHECK(full.manifest.fakes().size() == 3 * corpus.size());

    // Deterministic re-run: identical manifest bytes.
    const SparseSelection again = select_sparse(manifests, k, 7, dir / "sparse2");
    CHECK(testutil::slurp(dir / "sparse" / "manifest.json") ==
          testutil::slurp(dir / "sparse2" / "manifest.json"));
}

}  // TEST_SUITE
