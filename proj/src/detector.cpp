#include "tracelab/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "tracelab/channels.hpp"
#include "tracelab/corpus.hpp"
#include "tracelab/embedder.hpp"
#include "tracelab/errors.hpp"
#include "tracelab/rng.hpp"

namespace tracelab {

namespace {

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

struct MlpView {
    Eigen::Map<const Eigen::MatrixXd> W1;  // hidden x F (row-major storage flattened)
    Eigen::Map<const Eigen::VectorXd> b1;
    Eigen::Map<const Eigen::VectorXd> w2;
    const double* b2;
};

MlpView mlp_view(const DetectorModel& m) {
    const int H = DetectorModel::kHidden, F = m.input_dim;
    const double* p = m.params.data();
    return {Eigen::Map<const Eigen::MatrixXd>(p, H, F),
            Eigen::Map<const Eigen::VectorXd>(p + H * F, H),
            Eigen::Map<const Eigen::VectorXd>(p + H * F + H, H), p + H * F + 2 * H};
}

// dL/ds for one sample; zero where the probability clamp is active so the
// analytic gradient matches finite differences of the clamped loss.
double dscore_real(double p) { return (p > kProbFloor && p < 1.0 - kProbFloor) ? p - 1.0 : 0.0; }
double dscore_fake(double p) { return (p > kProbFloor && p < 1.0 - kProbFloor) ? p : 0.0; }

void accumulate_grad(const DetectorModel& m, const Eigen::VectorXd& x, double dscore,
                     Eigen::VectorXd& grad) {
    const int F = m.input_dim;
    if (m.arch == Arch::linear) {
        grad.head(F) += dscore * x;
        grad(F) += dscore;
        return;
    }
    const int H = DetectorModel::kHidden;
    const auto v = mlp_view(m);
    const Eigen::VectorXd pre = v.W1 * x + v.b1;
    const Eigen::VectorXd h = pre.cwiseMax(0.0);
    Eigen::VectorXd dh = dscore * v.w2;
    for (int i = 0; i < H; ++i)
        if (pre(i) <= 0.0) dh(i) = 0.0;
    Eigen::Map<Eigen::MatrixXd>(grad.data(), H, F) += dh * x.transpose();
    grad.segment(H * F, H) += dh;
    grad.segment(H * F + H, H) += dscore * h;
    grad(H * F + 2 * H) += dscore;
}

void check_feature(const DetectorModel& m, const Eigen::VectorXd& x) {
    if (static_cast<int>(x.size()) != m.input_dim)
        throw ShapeError("detector: feature length does not match model input dim");
}

double sample_sd(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::string arch_name(Arch a) { return a == Arch::linear ? "linear" : "mlp"; }

Arch arch_from_name(const std::string& name) {
    if (name == "linear") return Arch::linear;
    if (name == "mlp") return Arch::mlp;
    throw ConfigError("unknown detector architecture: " + name);
}

DetectorModel DetectorModel::zeros(Arch arch, int input_dim) {
    if (input_dim < 1) throw ConfigError("detector: input dim must be >= 1");
    DetectorModel m;
    m.arch = arch;
    m.input_dim = input_dim;
    const int n = arch == Arch::linear ? input_dim + 1
                                       : kHidden * input_dim + 2 * kHidden + 1;
    m.params = Eigen::VectorXd::Zero(n);
    return m;
}

double DetectorModel::score(const Eigen::VectorXd& feature) const {
    check_feature(*this, feature);
    if (arch == Arch::linear) return params.head(input_dim).dot(feature) + params(input_dim);
    const auto v = mlp_view(*this);
    const Eigen::VectorXd h = (v.W1 * feature + v.b1).cwiseMax(0.0);
    return v.w2.dot(h) + *v.b2;
}

double DetectorModel::predict(const Eigen::VectorXd& feature) const {
    return std::clamp(sigmoid(score(feature)), kProbFloor, 1.0 - kProbFloor);
}

void DetectorModel::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["version"] = 1;
    j["arch"] = arch_name(arch);
    j["input_dim"] = input_dim;
    auto arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < params.size(); ++i) arr.push_back(params(i));
    j["params"] = arr;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write model file: " + path.string());
    f << j.dump() << "\n";
}

DetectorModel DetectorModel::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read model file: " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed model file " + path.string() + ": " + e.what());
    }
    DetectorModel m = zeros(arch_from_name(j.at("arch").get<std::string>()),
                            j.at("input_dim").get<int>());
    const auto& arr = j.at("params");
    if (static_cast<Eigen::Index>(arr.size()) != m.params.size())
        throw IoError("model parameter count mismatch: " + path.string());
    for (Eigen::Index i = 0; i < m.params.size(); ++i)
        m.params(i) = arr[static_cast<size_t>(i)].get<double>();
    return m;
}

double detector_loss(const DetectorModel& model, const std::vector<Eigen::VectorXd>& real_features,
                     const std::vector<Eigen::VectorXd>& fake_features) {
    if (real_features.empty() || fake_features.empty())
        throw ConfigError("detector_loss: both sample sets must be nonempty");
    double loss = 0.0;
    for (const auto& x : real_features) loss -= std::log(model.predict(x)) / real_features.size();
    for (const auto& x : fake_features)
        loss -= std::log(1.0 - model.predict(x)) / fake_features.size();
    return loss;
}

Eigen::VectorXd detector_gradient(const DetectorModel& model,
                                  const std::vector<Eigen::VectorXd>& real_features,
                                  const std::vector<Eigen::VectorXd>& fake_features) {
    if (real_features.empty() || fake_features.empty())
        throw ConfigError("detector_gradient: both sample sets must be nonempty");
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.param_count());
    for (const auto& x : real_features)
        accumulate_grad(model, x, dscore_real(model.predict(x)) / real_features.size(), grad);
    for (const auto& x : fake_features)
        accumulate_grad(model, x, dscore_fake(model.predict(x)) / fake_features.size(), grad);
    return grad;
}

Eigen::VectorXd grad_real_term(const DetectorModel& model, const Eigen::VectorXd& feature) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.param_count());
    accumulate_grad(model, feature, dscore_real(model.predict(feature)), grad);
    return grad;
}

Eigen::VectorXd grad_fake_term(const DetectorModel& model, const Eigen::VectorXd& feature) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.param_count());
    accumulate_grad(model, feature, dscore_fake(model.predict(feature)), grad);
    return grad;
}

void TrainConfig::validate() const {
    if (batch < 1) throw ConfigError("train: batch size must be >= 1");
    if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");
}

namespace {

std::vector<int> shuffled_indices(int n, Rng& rng) {
    std::vector<int> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(idx[static_cast<size_t>(i)],
                  idx[rng.next_below(static_cast<std::uint64_t>(i) + 1)]);
    return idx;
}

struct Standardizer {
    Eigen::VectorXd mean, inv_std;

    static Standardizer fit(const std::vector<Eigen::VectorXd>& a,
                            const std::vector<Eigen::VectorXd>& b) {
        const Eigen::Index F = a.front().size();
        const double n = static_cast<double>(a.size() + b.size());
        Standardizer s;
        s.mean = Eigen::VectorXd::Zero(F);
        for (const auto& x : a) s.mean += x;
        for (const auto& x : b) s.mean += x;
        s.mean /= n;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(F);
        for (const auto& x : a) var += (x - s.mean).cwiseAbs2();
        for (const auto& x : b) var += (x - s.mean).cwiseAbs2();
        var /= n;
        s.inv_std = (var.array() > 1e-12).select(var.cwiseSqrt().cwiseInverse(), 1.0);
        return s;
    }

    std::vector<Eigen::VectorXd> apply(const std::vector<Eigen::VectorXd>& xs) const {
        std::vector<Eigen::VectorXd> out;
        out.reserve(xs.size());
        for (const auto& x : xs) out.push_back((x - mean).cwiseProduct(inv_std));
        return out;
    }

    // Fold the affine feature transform into the first layer so the returned
    // model operates on raw features.
    void fold_into(DetectorModel& m) const {
        const int F = m.input_dim;
        if (m.arch == Arch::linear) {
            Eigen::VectorXd w = m.params.head(F).cwiseProduct(inv_std);
            m.params(F) -= w.dot(mean);
            m.params.head(F) = w;
            return;
        }
        const int H = DetectorModel::kHidden;
        Eigen::Map<Eigen::MatrixXd> W1(m.params.data(), H, F);
        const Eigen::MatrixXd scaled = W1 * inv_std.asDiagonal();
        W1 = scaled;
        m.params.segment(H * F, H) -= scaled * mean;
    }
};

}  // namespace

TrainResult train_detector(const std::vector<Eigen::VectorXd>& real_features,
                           const std::vector<Eigen::VectorXd>& fake_features,
                           const TrainConfig& config) {
    config.validate();
    if (real_features.empty() || fake_features.empty())
        throw ConfigError("train: both sample sets must be nonempty");
    if (config.mode == SamplingMode::paired && real_features.size() != fake_features.size())
        throw ConfigError("train: paired mode requires equally sized paired sets");

    const int F = static_cast<int>(real_features.front().size());
    Standardizer stdz;
    std::vector<Eigen::VectorXd> reals = real_features, fakes = fake_features;
    if (config.standardize) {
        stdz = Standardizer::fit(real_features, fake_features);
        reals = stdz.apply(real_features);
        fakes = stdz.apply(fake_features);
    }

    DetectorModel model = DetectorModel::zeros(config.arch, F);
    if (config.arch == Arch::mlp) {
        // Small deterministic init breaks hidden-unit symmetry.
        Rng rng(derive_seed(config.seed, 0x1417));
        const int H = DetectorModel::kHidden;
        for (int i = 0; i < H * F; ++i) model.params(i) = 0.1 * rng.normal() / std::sqrt(F);
    }

    Rng shuffle_rng(derive_seed(config.seed, 0x5481));
    const int n_real = static_cast<int>(reals.size());
    const int n_fake = static_cast<int>(fakes.size());
    const int batches = std::min(n_real, n_fake) / config.batch;
    if (batches < 1) throw ConfigError("train: batch size exceeds dataset size");

    TrainResult result;
    std::vector<Eigen::VectorXd> batch_real(static_cast<size_t>(config.batch));
    std::vector<Eigen::VectorXd> batch_fake(static_cast<size_t>(config.batch));
    std::vector<int> order(static_cast<size_t>(config.batch));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<int> real_idx, fake_idx;
        if (config.mode == SamplingMode::independent) {
            real_idx = shuffled_indices(n_real, shuffle_rng);
            fake_idx = shuffled_indices(n_fake, shuffle_rng);
        } else {
            real_idx = shuffled_indices(n_real, shuffle_rng);
            fake_idx = real_idx;  // pairs move together
        }
        for (int b = 0; b < batches; ++b) {
            // Ascending dataset order inside the batch: canonical reduction.
            std::copy_n(real_idx.begin() + static_cast<std::ptrdiff_t>(b) * config.batch,
                        config.batch, order.begin());
            std::sort(order.begin(), order.end());
            for (int i = 0; i < config.batch; ++i)
                batch_real[static_cast<size_t>(i)] = reals[static_cast<size_t>(order[i])];
            std::copy_n(fake_idx.begin() + static_cast<std::ptrdiff_t>(b) * config.batch,
                        config.batch, order.begin());
            std::sort(order.begin(), order.end());
            for (int i = 0; i < config.batch; ++i)
                batch_fake[static_cast<size_t>(i)] = fakes[static_cast<size_t>(order[i])];

            model.params -= config.learning_rate * detector_gradient(model, batch_real, batch_fake);
        }
        const double epoch_loss = detector_loss(model, reals, fakes);
        if (!std::isfinite(epoch_loss))
            throw IoError("train: non-finite loss at epoch " + std::to_string(epoch));
        result.loss_trace.push_back(epoch_loss);
    }

    if (config.standardize) stdz.fold_into(model);
    result.model = std::move(model);
    return result;
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw ShapeError("average_precision: scores and labels must match and be nonempty");
    long n_pos = std::count(labels.begin(), labels.end(), 1);
    if (n_pos == 0 || n_pos == static_cast<long>(labels.size()))
        throw ConfigError("average_precision: undefined for a single-class set");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    double prev_recall = 0.0;
    long tp = 0, pred_pos = 0;
    size_t i = 0;
    while (i < order.size()) {
        // Group ties: all samples sharing this score enter together.
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] == 1) ++tp;
            ++pred_pos;
            ++i;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(pred_pos);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

MetricsReport evaluate_detector(const DetectorModel& model,
                                const std::vector<Eigen::VectorXd>& real_features,
                                const std::vector<Eigen::VectorXd>& fake_features) {
    MetricsReport r;
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& x : real_features) {
        const double p = model.predict(x);
        scores.push_back(p);
        labels.push_back(1);
        if (p >= r.threshold) ++r.true_pos; else ++r.false_neg;
    }
    for (const auto& x : fake_features) {
        const double p = model.predict(x);
        scores.push_back(p);
        labels.push_back(0);
        if (p >= r.threshold) ++r.false_pos; else ++r.true_neg;
    }
    if (r.total() == 0) throw ConfigError("evaluate: empty test set");
    r.accuracy = static_cast<double>(r.true_pos + r.true_neg) / r.total();
    if (!real_features.empty() && !fake_features.empty()) {
        const double recall_pos = static_cast<double>(r.true_pos) / real_features.size();
        const double recall_neg = static_cast<double>(r.true_neg) / fake_features.size();
        r.balanced_accuracy = 0.5 * (recall_pos + recall_neg);
        r.average_precision = average_precision(scores, labels);
        r.ap_defined = true;
    } else {
        r.balanced_accuracy = r.accuracy;  // single class: flagged via ap_defined=false
    }
    return r;
}

VarianceProbeReport variance_probe(const DetectorModel& model,
                                   const std::vector<Eigen::VectorXd>& real_features,
                                   const std::vector<Eigen::VectorXd>& fake_features, int batch,
                                   int trials, std::uint64_t seed) {
    if (real_features.size() != fake_features.size() || real_features.empty())
        throw ConfigError("variance_probe: requires nonempty paired sets of equal size");
    if (batch < 1 || trials < 2) throw ConfigError("variance_probe: batch >= 1, trials >= 2");

    const size_t n = real_features.size();
    const int P = model.param_count();
    Eigen::MatrixXd G(P, n), Gp(P, n);
    for (size_t i = 0; i < n; ++i) {
        G.col(static_cast<Eigen::Index>(i)) = grad_real_term(model, real_features[i]);
        Gp.col(static_cast<Eigen::Index>(i)) = grad_fake_term(model, fake_features[i]);
    }

    Rng rng(derive_seed(seed, 0x9a0b));
    Eigen::VectorXd sum_p = Eigen::VectorXd::Zero(P), sum2_p = Eigen::VectorXd::Zero(P);
    Eigen::VectorXd sum_i = Eigen::VectorXd::Zero(P), sum2_i = Eigen::VectorXd::Zero(P);
    Eigen::VectorXd vp(P), vi(P);
    for (int t = 0; t < trials; ++t) {
        vp.setZero();
        vi.setZero();
        // Common batch for the paired estimator and the real half of the
        // independent one; the fake half draws fresh indices.
        for (int b = 0; b < batch; ++b) {
            const auto i = static_cast<Eigen::Index>(rng.next_below(n));
            vp += G.col(i) + Gp.col(i);
            vi += G.col(i);
        }
        for (int b = 0; b < batch; ++b)
            vi += Gp.col(static_cast<Eigen::Index>(rng.next_below(n)));
        vp /= batch;
        vi /= batch;
        sum_p += vp;
        sum2_p += vp.cwiseAbs2();
        sum_i += vi;
        sum2_i += vi.cwiseAbs2();
    }

    const double inv_t = 1.0 / trials;
    VarianceProbeReport r;
    r.var_paired = (sum2_p * inv_t - (sum_p * inv_t).cwiseAbs2()).sum();
    r.var_indep = (sum2_i * inv_t - (sum_i * inv_t).cwiseAbs2()).sum();
    r.cov_term = r.var_paired - r.var_indep;

    // Direct estimate: population covariance between paired
    // per-sample gradients, summed over parameters, scaled by 2/B.
    const Eigen::VectorXd mg = G.rowwise().mean();
    const Eigen::VectorXd mgp = Gp.rowwise().mean();
    double cov = 0.0;
    for (size_t i = 0; i < n; ++i)
        cov += (G.col(static_cast<Eigen::Index>(i)) - mg)
                   .dot(Gp.col(static_cast<Eigen::Index>(i)) - mgp);
    cov /= static_cast<double>(n);
    r.cov_direct = 2.0 * cov / batch;
    r.trials = trials;
    r.batch = batch;
    r.low_trials_warning = trials < 10000;
    return r;
}

SyntheticProbeReport synthetic_variance_probe(double rho, int batch, int trials,
                                              std::uint64_t seed, int dim) {
    if (rho < -1.0 || rho > 1.0) throw ConfigError("synthetic probe: rho must be in [-1, 1]");
    if (batch < 1 || trials < 2 || dim < 1)
        throw ConfigError("synthetic probe: batch >= 1, trials >= 2, dim >= 1");
    Rng rng(derive_seed(seed, 0x51f0));
    const double ortho = std::sqrt(1.0 - rho * rho);

    Eigen::VectorXd sum_p = Eigen::VectorXd::Zero(dim), sum2_p = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd sum_i = Eigen::VectorXd::Zero(dim), sum2_i = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd vp(dim), vi(dim);
    for (int t = 0; t < trials; ++t) {
        vp.setZero();
        vi.setZero();
        for (int b = 0; b < batch; ++b)
            for (int k = 0; k < dim; ++k) {
                const double g = rng.normal();
                const double gp = rho * g + ortho * rng.normal();
                vp(k) += g + gp;
            }
        for (int b = 0; b < batch; ++b)
            for (int k = 0; k < dim; ++k) vi(k) += rng.normal();
        for (int b = 0; b < batch; ++b)
            for (int k = 0; k < dim; ++k) vi(k) += rng.normal();
        vp /= batch;
        vi /= batch;
        sum_p += vp;
        sum2_p += vp.cwiseAbs2();
        sum_i += vi;
        sum2_i += vi.cwiseAbs2();
    }
    const double inv_t = 1.0 / trials;
    SyntheticProbeReport r;
    r.var_paired = (sum2_p * inv_t - (sum_p * inv_t).cwiseAbs2()).sum();
    r.var_indep = (sum2_i * inv_t - (sum_i * inv_t).cwiseAbs2()).sum();
    r.ratio = r.var_paired / r.var_indep;
    return r;
}

Property1Result property1_experiment(const std::vector<Image>& corpus, int d,
                                     const TrainConfig& base_config, int n_seeds,
                                     std::uint64_t seed) {
    if (n_seeds < 1) throw ConfigError("property1: need at least one seed");
    if (corpus.size() < 12) throw ConfigError("property1: corpus too small to split three ways");

    // fit / train / test three-way split.
    auto [fit_set, rest] = split_corpus(corpus, 0.5, derive_seed(seed, 1));
    auto [train_set, test_set] = split_corpus(rest, 0.6, derive_seed(seed, 2));

    const ContinuousChannel channel = fit_continuous(fit_set, d);
    const Embedder embedder;

    auto matched_fakes = [&](const std::vector<Image>& xs) {
        std::vector<Eigen::VectorXd> feats;
        for (const auto& x : xs) feats.push_back(embedder.embed(quantize8(roundtrip_continuous(channel, x))));
        return feats;
    };
    auto embed_all = [&](const std::vector<Image>& xs) {
        std::vector<Eigen::VectorXd> feats;
        for (const auto& x : xs) feats.push_back(embedder.embed(quantize8(x)));
        return feats;
    };

    const auto train_real = embed_all(train_set);
    const auto test_real = embed_all(test_set);
    const auto train_fake_matched = matched_fakes(train_set);
    const auto test_fake_matched = matched_fakes(test_set);

    Property1Result result;
    for (int s = 0; s < n_seeds; ++s) {
        TrainConfig cfg = base_config;
        cfg.seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(s));
        const auto matched = train_detector(train_real, train_fake_matched, cfg);
        result.matched_losses.push_back(detector_loss(matched.model, test_real, test_fake_matched));

        const MismatchedEncoder enc = make_mismatched_random(
            channel.height, channel.width, channel.dim(),
            derive_seed(seed, 1000 + static_cast<std::uint64_t>(s)), channel.mean);
        std::vector<Eigen::VectorXd> train_fake_mis;
        for (const auto& x : train_set)
            train_fake_mis.push_back(embedder.embed(quantize8(reconstruct_mismatched(enc, x))));
        const auto mismatched = train_detector(train_real, train_fake_mis, cfg);
        result.mismatched_losses.push_back(
            detector_loss(mismatched.model, test_real, test_fake_matched));
    }

    result.matched_mean = std::accumulate(result.matched_losses.begin(),
                                          result.matched_losses.end(), 0.0) /
                          n_seeds;
    result.mismatched_mean = std::accumulate(result.mismatched_losses.begin(),
                                             result.mismatched_losses.end(), 0.0) /
                             n_seeds;
    result.matched_sd = sample_sd(result.matched_losses, result.matched_mean);
    result.mismatched_sd = sample_sd(result.mismatched_losses, result.mismatched_mean);
    return result;
}

}  // namespace tracelab
