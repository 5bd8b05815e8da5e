#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tracelab/image.hpp"
#include "tracelab/manifest.hpp"

namespace tracelab {

// Linear autoencoder stand-in for a VAE decoder: mean + column-orthonormal
// basis of the top principal directions of the pixel covariance.
struct ContinuousChannel {
    int height = 0;
    int width = 0;
    Eigen::VectorXd mean;   // D = h*w*3
    Eigen::MatrixXd basis;  // D x d', W^T W = I
    int requested_dim = 0;
    bool degenerate = false;  // covariance rank fell short of the requested d

    int dim() const { return static_cast<int>(basis.cols()); }
    std::string params_hash() const;
};

// Patch codebook stand-in for a VQ de-tokenizer.
struct TokenChannel {
    int height = 0;
    int width = 0;
    int patch_size = 8;
    Eigen::MatrixXd codebook;  // K x (patch^2 * 3)
    std::uint64_t seed = 0;

    int K() const { return static_cast<int>(codebook.rows()); }
    std::string params_hash() const;
};

// Noise-then-denoise stand-in: variance-preserving schedule plus per-band
// Wiener shrinkage over 8x8 DCT blocks, statistics fit on the real corpus.
struct DenoiseChannel {
    int height = 0;
    int width = 0;
    int steps = 8;                 // T
    Eigen::VectorXd band_mean;     // 64
    Eigen::VectorXd band_var;      // 64

    double beta(int t) const { return static_cast<double>(t) / steps; }
    double alpha(int t) const {
        const double b = beta(t);
        return std::sqrt(std::max(0.0, 1.0 - b * b));
    }
    // Shrinkage gain toward the band mean at noise level t; in [0, 1].
    double gain(int band, int t) const;
    std::string params_hash() const;
};

enum class MismatchKind { random_orthonormal, foreign_corpus_pca };

struct MismatchedEncoder {
    MismatchKind kind = MismatchKind::random_orthonormal;
    int height = 0;
    int width = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd basis;  // D x d, column-orthonormal
    std::uint64_t seed = 0;
};

using ChannelVariant = std::variant<ContinuousChannel, TokenChannel, DenoiseChannel>;

std::string channel_kind(const ChannelVariant& ch);
std::string channel_taxonomy_category(const ChannelVariant& ch);
std::string channel_params_hash(const ChannelVariant& ch);

ContinuousChannel fit_continuous(const std::vector<Image>& corpus, int d);
Image roundtrip_continuous(const ContinuousChannel& ch, const Image& x);
// Pre-clamp projection, used by tests and the property-1 experiment.
Eigen::VectorXd roundtrip_continuous_raw(const ContinuousChannel& ch, const Image& x);

TokenChannel fit_token(const std::vector<Image>& corpus, int patch_size, int K, std::uint64_t seed);
Image roundtrip_token(const TokenChannel& ch, const Image& x);

DenoiseChannel fit_denoise(const std::vector<Image>& corpus, int T);
Image roundtrip_denoise(const DenoiseChannel& ch, const Image& x, int t_start,
                        std::uint64_t noise_seed);

MismatchedEncoder make_mismatched_random(int height, int width, int d, std::uint64_t seed,
                                         const Eigen::VectorXd& mean);
MismatchedEncoder make_mismatched_foreign(const std::vector<Image>& foreign_corpus, int d);
// Reconstruct x through the encoder's subspace (degenerates to the identity
// when d = D, mirroring the matched channel).
Image reconstruct_mismatched(const MismatchedEncoder& enc, const Image& x);

struct ConstructOptions {
    int t_start = -1;  // denoise channel only; -1 = T/2
    std::uint64_t noise_seed = 99;
};

// Applies the channel roundtrip to every corpus image, writes 8-bit PNGs, and
// returns a manifest pairing each constructed sample (label 0) with its real
// counterpart (label 1).
DatasetManifest construct_negatives(const ChannelVariant& ch, const std::vector<Image>& corpus,
                                    const std::vector<std::string>& real_files,
                                    const std::filesystem::path& out_dir,
                                    const ConstructOptions& opts = {});

Image apply_roundtrip(const ChannelVariant& ch, const Image& x, const ConstructOptions& opts,
                      int image_index);

void save_channel(const ChannelVariant& ch, const std::filesystem::path& path);
ChannelVariant load_channel(const std::filesystem::path& path);

Eigen::VectorXd flatten(const Image& img);
Image unflatten(const Eigen::VectorXd& v, int height, int width);

}  // namespace tracelab
