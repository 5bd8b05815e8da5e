#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tracelab/detector.hpp"
#include "tracelab/errors.hpp"
#include "tracelab/rng.hpp"
#include "test_util.hpp"

using namespace tracelab;

namespace {

std::vector<Eigen::VectorXd> random_features(Rng& rng, int n, int dim, double shift = 0.0) {
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v(dim);
        for (int j = 0; j < dim; ++j) v(j) = rng.normal() + shift;
        out.push_back(v);
    }
    return out;
}

DetectorModel random_model(Rng& rng, Arch arch, int dim) {
    DetectorModel m = DetectorModel::zeros(arch, dim);
    for (Eigen::Index i = 0; i < m.params.size(); ++i) m.params(i) = 0.5 * rng.normal();
    return m;
}

// True when any sample sits at a non-differentiable point of the loss: the
// probability clamp (|score| ~ 16) or a ReLU pre-activation near zero.
bool near_kink(const DetectorModel& m, const std::vector<Eigen::VectorXd>& xs) {
    for (const auto& x : xs) {
        if (std::abs(m.score(x)) > 12.0) return true;
        if (m.arch == Arch::mlp) {
            const int H = DetectorModel::kHidden, F = m.input_dim;
            Eigen::Map<const Eigen::MatrixXd> W1(m.params.data(), H, F);
            Eigen::Map<const Eigen::VectorXd> b1(m.params.data() + H * F, H);
            if (((W1 * x + b1).cwiseAbs().array() < 1e-3).any()) return true;
        }
    }
    return false;
}

// Brute-force AP: precision/recall at every unique descending threshold.
double brute_force_ap(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<double> uniq = scores;
    std::sort(uniq.begin(), uniq.end(), std::greater<double>());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    double ap = 0.0, prev_recall = 0.0;
    for (double thr : uniq) {
        long tp = 0, pp = 0;
        for (size_t i = 0; i < scores.size(); ++i)
            if (scores[i] >= thr) {
                ++pp;
                if (labels[i] == 1) ++tp;
            }
        const double recall = double(tp) / double(n_pos);
        const double precision = double(tp) / double(pp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("predict: zero model, bias monotonicity, hand sigmoid") {
    const int F = 6;
    DetectorModel zero = DetectorModel::zeros(Arch::linear, F);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(F);
    CHECK(zero.predict(x) == doctest::Approx(0.5));

    DetectorModel biased = zero;
    biased.params(F) = 1.0;
    CHECK(biased.predict(x) > zero.predict(x));

    DetectorModel hand = DetectorModel::zeros(Arch::linear, F);
    hand.params(0) = 1.0;
    Eigen::VectorXd feat = Eigen::VectorXd::Zero(F);
    feat(0) = 2.0;
    CHECK(hand.predict(feat) == doctest::Approx(0.880797).epsilon(1e-5));

    Eigen::VectorXd wrong = Eigen::VectorXd::Zero(F + 1);
    CHECK_THROWS_AS(zero.predict(wrong), ShapeError);
}

TEST_CASE("loss: uniform predictor and hand case") {
    const int F = 4;
    Rng rng(71);
    const auto reals = random_features(rng, 5, F);
    const auto fakes = random_features(rng, 7, F);
    const DetectorModel zero = DetectorModel::zeros(Arch::linear, F);
    CHECK(detector_loss(zero, reals, fakes) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

    // theta(real) = 0.9, theta(fake) = 0.1 -> loss = -2 ln 0.9.
    DetectorModel m = DetectorModel::zeros(Arch::linear, F);
    const double s = std::log(9.0);  // sigmoid(s) = 0.9
    m.params(0) = s;
    Eigen::VectorXd plus = Eigen::VectorXd::Zero(F), minus = Eigen::VectorXd::Zero(F);
    plus(0) = 1.0;
    minus(0) = -1.0;
    CHECK(detector_loss(m, {plus}, {minus}) ==
          doctest::Approx(-2.0 * std::log(0.9)).epsilon(1e-10));

    CHECK_THROWS_AS(detector_loss(zero, {}, fakes), ConfigError);
}

TEST_CASE("gradient matches central finite differences on both architectures") {
    Rng rng(72);
    const int F = 5;
    for (Arch arch : {Arch::linear, Arch::mlp}) {
        for (int trial = 0; trial < 10; ++trial) {
            DetectorModel m = random_model(rng, arch, F);
            auto reals = random_features(rng, 4, F, 0.3);
            auto fakes = random_features(rng, 3, F, -0.3);
            // Compare derivatives away from the non-differentiable points.
            while (near_kink(m, reals) || near_kink(m, fakes)) {
                reals = random_features(rng, 4, F, 0.3);
                fakes = random_features(rng, 3, F, -0.3);
            }
            const Eigen::VectorXd g = detector_gradient(m, reals, fakes);

            const double h = 1e-5;
            const double scale = std::max(1e-6, g.cwiseAbs().maxCoeff());
            for (Eigen::Index i = 0; i < m.params.size(); ++i) {
                DetectorModel up = m, dn = m;
                up.params(i) += h;
                dn.params(i) -= h;
                const double fd =
                    (detector_loss(up, reals, fakes) - detector_loss(dn, reals, fakes)) / (2 * h);
                CHECK(std::abs(g(i) - fd) <= 1e-4 * std::max(1.0, scale));
            }
        }
    }
}

TEST_CASE("gradient: duplication invariance and saturation") {
    Rng rng(73);
    const int F = 4;
    DetectorModel m = random_model(rng, Arch::linear, F);
    const auto reals = random_features(rng, 1, F);
    const auto fakes = random_features(rng, 1, F);
    const Eigen::VectorXd g1 = detector_gradient(m, reals, fakes);
    const std::vector<Eigen::VectorXd> reals3 = {reals[0], reals[0], reals[0]};
    const std::vector<Eigen::VectorXd> fakes2 = {fakes[0], fakes[0]};
    const Eigen::VectorXd g2 = detector_gradient(m, reals3, fakes2);
    CHECK((g1 - g2).cwiseAbs().maxCoeff() < 1e-12);

    // Saturated, correctly classified samples contribute vanishing gradient.
    DetectorModel strong = DetectorModel::zeros(Arch::linear, F);
    strong.params(0) = 50.0;
    Eigen::VectorXd pos = Eigen::VectorXd::Zero(F), neg = Eigen::VectorXd::Zero(F);
    pos(0) = 1.0;
    neg(0) = -1.0;
    const Eigen::VectorXd gs = detector_gradient(strong, {pos}, {neg});
    CHECK(gs.norm() < 1e-8);
}

TEST_CASE("training: determinism, descent, full-batch mode equivalence") {
    Rng rng(74);
    const int F = 8;
    const auto reals = random_features(rng, 24, F, 0.8);
    const auto fakes = random_features(rng, 24, F, -0.8);

    TrainConfig cfg;
    cfg.batch = 8;
    cfg.epochs = 15;
    cfg.learning_rate = 0.2;
    cfg.seed = 9;
    const TrainResult a = train_detector(reals, fakes, cfg);
    const TrainResult b = train_detector(reals, fakes, cfg);
    CHECK(a.model.params == b.model.params);
    REQUIRE(a.loss_trace.size() == 15);
    CHECK(a.loss_trace.back() < 2.0 * std::log(2.0));  // below the zero-init loss

    // Full batch: independent and paired sampling take identical steps.
    TrainConfig full = cfg;
    full.batch = 24;
    full.mode = SamplingMode::independent;
    TrainConfig fullp = full;
    fullp.mode = SamplingMode::paired;
    const TrainResult fi = train_detector(reals, fakes, full);
    const TrainResult fp = train_detector(reals, fakes, fullp);
    CHECK(fi.model.params == fp.model.params);

    // Paired mode needs equal sizes.
    TrainConfig paired = cfg;
    paired.mode = SamplingMode::paired;
    const auto fakes_short = random_features(rng, 20, F);
    CHECK_THROWS_AS(train_detector(reals, fakes_short, paired), ConfigError);
    TrainConfig bad = cfg;
    bad.batch = 1000;
    CHECK_THROWS_AS(train_detector(reals, fakes, bad), ConfigError);
}

TEST_CASE("model save/load round-trip") {
    const auto dir = testutil::scratch_dir("detector_io");
    Rng rng(75);
    for (Arch arch : {Arch::linear, Arch::mlp}) {
        const DetectorModel m = random_model(rng, arch, 6);
        m.save(dir / (arch_name(arch) + ".json"));
        const DetectorModel back = DetectorModel::load(dir / (arch_name(arch) + ".json"));
        CHECK(back.arch == m.arch);
        CHECK(back.params == m.params);
    }
}

TEST_CASE("average precision: hand cases") {
    CHECK(average_precision({0.9, 0.8, 0.3}, {1, 0, 1}) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(average_precision({0.9, 0.1}, {0, 1}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(average_precision({0.9, 0.1}, {1, 0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(average_precision({0.5, 0.6}, {1, 1}), ConfigError);
    CHECK_THROWS_AS(average_precision({0.5}, {1, 0}), ShapeError);
}

TEST_CASE("average precision: equals brute-force enumeration on random tied sets") {
    Rng rng(76);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(99));
        std::vector<double> scores;
        std::vector<int> labels;
        bool has_pos = false, has_neg = false;
        for (int i = 0; i < n; ++i) {
            // Quantized scores force plenty of ties.
            scores.push_back(std::floor(rng.uniform() * 8.0) / 8.0);
            const int lab = rng.uniform() < 0.5 ? 1 : 0;
            labels.push_back(lab);
            (lab ? has_pos : has_neg) = true;
        }
        if (!has_pos) labels[0] = 1;
        if (!has_neg) labels[static_cast<size_t>(n - 1)] = 0;
        CHECK(std::abs(average_precision(scores, labels) - brute_force_ap(scores, labels)) < 1e-9);
    }
}

TEST_CASE("evaluate: separated sets and count consistency") {
    const int F = 3;
    DetectorModel m = DetectorModel::zeros(Arch::linear, F);
    m.params(0) = 10.0;
    Rng rng(77);
    std::vector<Eigen::VectorXd> reals, fakes;
    for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(F), f = Eigen::VectorXd::Zero(F);
        r(0) = 1.0 + rng.uniform();
        f(0) = -1.0 - rng.uniform();
        reals.push_back(r);
        fakes.push_back(f);
    }
    const MetricsReport rep = evaluate_detector(m, reals, fakes);
    CHECK(rep.accuracy == doctest::Approx(1.0));
    CHECK(rep.balanced_accuracy == doctest::Approx(1.0));
    CHECK(rep.average_precision == doctest::Approx(1.0));
    CHECK(rep.ap_defined);
    CHECK(rep.total() == 12);
    CHECK(rep.true_pos == 6);
    CHECK(rep.true_neg == 6);
}

TEST_CASE("synthetic variance probe follows 1 + rho") {
    const SyntheticProbeReport r0 = synthetic_variance_probe(0.0, 8, 100000, 5);
    CHECK(r0.ratio == doctest::Approx(1.0).epsilon(0.05));
    const SyntheticProbeReport r9 = synthetic_variance_probe(0.9, 8, 100000, 5);
    CHECK(r9.ratio == doctest::Approx(1.9).epsilon(0.10));
    CHECK_THROWS_AS(synthetic_variance_probe(1.5, 8, 100, 5), ConfigError);
}

TEST_CASE("variance probe: reports consistent fields on a toy pipeline") {
    Rng rng(78);
    const int F = 6;
    const auto reals = random_features(rng, 40, F, 0.4);
    // Correlated fakes: real + small perturbation, mimicking a channel.
    std::vector<Eigen::VectorXd> fakes;
    for (const auto& r : reals) {
        Eigen::VectorXd f = r;
        for (int j = 0; j < F; ++j) f(j) += 0.2 * rng.normal() - 0.8;
        fakes.push_back(f);
    }
    DetectorModel m = random_model(rng, Arch::linear, F);
    const VarianceProbeReport rep = variance_probe(m, reals, fakes, 8, 20000, 3);
    CHECK(rep.var_paired > 0.0);
    CHECK(rep.var_indep > 0.0);
    CHECK(rep.cov_term == doctest::Approx(rep.var_paired - rep.var_indep));
    CHECK_FALSE(rep.low_trials_warning);
    CHECK(variance_probe(m, reals, fakes, 8, 100, 3).low_trials_warning);
}

}  // TEST_SUITE
