#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tracelab/image.hpp"

namespace tracelab {

// Deterministic 128-dim forensic embedding: block-DCT band energies,
// high-pass residual histogram, and a seeded random projection of a
// downsampled luminance thumbnail.
class Embedder {
  public:
    static constexpr int kDim = 128;
    static constexpr int kBands = 8;        // radial DCT bands -> 16 dims (mean+std)
    static constexpr int kHistBins = 32;    // Laplacian residual histogram
    static constexpr int kProjDim = 80;     // random projection of 16x16 thumbnail
    static constexpr std::uint64_t kSeed = 42;

    Embedder();

    Eigen::VectorXd embed(const Image& x) const;
    std::vector<Eigen::VectorXd> embed_batch(const std::vector<Image>& images,
                                             int threads = 1) const;

    std::string spec_hash() const;

  private:
    Eigen::MatrixXd projection_;  // kProjDim x 256
};

// PCA to the top three components with a deterministic sign convention
// (largest-magnitude loading positive). Rank below 3 pads with zeros.
struct Projection3d {
    std::vector<std::array<double, 3>> points;
    bool rank_deficient = false;
    std::array<double, 3> explained_variance{};
};

Projection3d project_3d(const std::vector<Eigen::VectorXd>& features);

}  // namespace tracelab
