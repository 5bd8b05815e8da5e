#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tracelab/image.hpp"

namespace tracelab {

// Probability floor keeping log() finite.
constexpr double kProbFloor = 1e-7;

enum class Arch { linear, mlp };

std::string arch_name(Arch a);
Arch arch_from_name(const std::string& name);

// Binary head over embedder features. Linear: sigmoid(w.x + b).
// MLP: one hidden layer of 64 rectified units.
struct DetectorModel {
    static constexpr int kHidden = 64;

    Arch arch = Arch::linear;
    int input_dim = 0;
    Eigen::VectorXd params;  // linear: [w(F), b]; mlp: [W1(64*F) col-major, b1(64), w2(64), b2]

    static DetectorModel zeros(Arch arch, int input_dim);
    int param_count() const { return static_cast<int>(params.size()); }

    double score(const Eigen::VectorXd& feature) const;    // pre-sigmoid
    double predict(const Eigen::VectorXd& feature) const;  // in [kProbFloor, 1-kProbFloor]

    void save(const std::filesystem::path& path) const;
    static DetectorModel load(const std::filesystem::path& path);
};

// Eq.-1 batch-mean cross-entropy: -mean log p(real) - mean log(1 - p(fake)).
double detector_loss(const DetectorModel& model, const std::vector<Eigen::VectorXd>& real_features,
                     const std::vector<Eigen::VectorXd>& fake_features);

// Analytic gradient of detector_loss. Samples are accumulated in the order
// given; callers wanting a canonical reduction order pass sorted batches.
Eigen::VectorXd detector_gradient(const DetectorModel& model,
                                  const std::vector<Eigen::VectorXd>& real_features,
                                  const std::vector<Eigen::VectorXd>& fake_features);

// Per-sample gradients of the two loss terms (for the variance probe).
Eigen::VectorXd grad_real_term(const DetectorModel& model, const Eigen::VectorXd& feature);
Eigen::VectorXd grad_fake_term(const DetectorModel& model, const Eigen::VectorXd& feature);

enum class SamplingMode { independent, paired };

struct TrainConfig {
    int batch = 16;
    int epochs = 30;
    double learning_rate = 0.1;
    SamplingMode mode = SamplingMode::independent;
    std::uint64_t seed = 0;
    Arch arch = Arch::linear;
    bool standardize = true;  // fold per-feature scaling back into the weights

    void validate() const;
};

struct TrainResult {
    DetectorModel model;
    std::vector<double> loss_trace;  // per-epoch training loss
};

// Plain SGD. Independent mode reshuffles the two sets separately each epoch;
// paired mode shuffles (x_i, x'_i) pairs. Within a mini-batch samples are
// processed in ascending dataset order, so full-batch updates are identical
// across modes bit for bit.
TrainResult train_detector(const std::vector<Eigen::VectorXd>& real_features,
                           const std::vector<Eigen::VectorXd>& fake_features,
                           const TrainConfig& config);

struct MetricsReport {
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;
    double average_precision = 0.0;
    bool ap_defined = false;
    double threshold = 0.5;
    int true_pos = 0, false_pos = 0, true_neg = 0, false_neg = 0;

    int total() const { return true_pos + false_pos + true_neg + false_neg; }
};

// Step-interpolated AP over descending unique score thresholds, equal scores
// grouped; positive class is label 1. Throws on a single-class set.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

MetricsReport evaluate_detector(const DetectorModel& model,
                                const std::vector<Eigen::VectorXd>& real_features,
                                const std::vector<Eigen::VectorXd>& fake_features);

struct VarianceProbeReport {
    double var_paired = 0.0;   // trace of the estimator covariance
    double var_indep = 0.0;
    double cov_term = 0.0;     // var_paired - var_indep
    double cov_direct = 0.0;   // (2/B) * summed per-pair gradient covariance
    int trials = 0;
    int batch = 0;
    bool low_trials_warning = false;
};

// Empirical variance of the paired vs independent mini-batch gradient
// estimators at a fixed model. Requires paired sets of equal size.
VarianceProbeReport variance_probe(const DetectorModel& model,
                                   const std::vector<Eigen::VectorXd>& real_features,
                                   const std::vector<Eigen::VectorXd>& fake_features, int batch,
                                   int trials, std::uint64_t seed);

struct SyntheticProbeReport {
    double var_paired = 0.0;
    double var_indep = 0.0;
    double ratio = 0.0;  // expected 1 + rho for equal marginal variances
};

// Correlated-Gaussian gradient stand-in for the closed-form check.
SyntheticProbeReport synthetic_variance_probe(double rho, int batch, int trials,
                                              std::uint64_t seed, int dim = 8);

struct Property1Result {
    double matched_mean = 0.0, matched_sd = 0.0;
    double mismatched_mean = 0.0, mismatched_sd = 0.0;
    std::vector<double> matched_losses, mismatched_losses;
};

// Matched vs mismatched-encoder experiment: detectors trained on each
// construction, held-out Eq.-1 loss measured on the matched construction.
Property1Result property1_experiment(const std::vector<Image>& corpus, int d,
                                     const TrainConfig& base_config, int n_seeds,
                                     std::uint64_t seed);

}  // namespace tracelab
