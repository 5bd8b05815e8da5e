#include "tracelab/embedder.hpp"

#include <cmath>
#include <thread>

#include "tracelab/dct.hpp"
#include "tracelab/errors.hpp"
#include "tracelab/rng.hpp"

namespace tracelab {

Embedder::Embedder() : projection_(kProjDim, 256) {
    Rng rng(derive_seed(kSeed, 0xe3b));
    for (Eigen::Index r = 0; r < projection_.rows(); ++r)
        for (Eigen::Index c = 0; c < projection_.cols(); ++c) projection_(r, c) = rng.normal();
    projection_ /= std::sqrt(256.0);
}

std::string Embedder::spec_hash() const {
    // Canonical description of the layout; stable across runs and platforms.
    char buf[128];
    std::snprintf(buf, sizeof(buf), "tracelab-embedder-v1:F=%d,bands=%d,bins=%d,proj=%d,seed=%llu",
                  kDim, kBands, kHistBins, kProjDim, static_cast<unsigned long long>(kSeed));
    return buf;
}

Eigen::VectorXd Embedder::embed(const Image& x) const {
    if (x.height < 16 || x.width < 16) throw ShapeError("embed: image must be at least 16x16");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(kDim);
    const std::vector<double> lum = x.luminance();
    const int h = x.height, w = x.width;

    // (a) mean + std of energy in radial DCT bands over 8x8 luminance blocks.
    {
        const Dct8& dct = Dct8::instance();
        static const auto band_of = [] {
            std::array<int, 64> map{};
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) {
                    const double r = std::sqrt(static_cast<double>(u * u + v * v));
                    map[u * 8 + v] = std::min(kBands - 1, static_cast<int>(r * kBands / 10.0));
                }
            return map;
        }();
        const int nby = h / 8, nbx = w / 8;
        const int n_blocks = nby * nbx;
        Eigen::MatrixXd energy(n_blocks, kBands);
        double block[64], coef[64];
        int bi = 0;
        for (int by = 0; by + 8 <= h; by += 8)
            for (int bx = 0; bx + 8 <= w; bx += 8, ++bi) {
                for (int y = 0; y < 8; ++y)
                    for (int xx = 0; xx < 8; ++xx)
                        block[y * 8 + xx] = lum[static_cast<size_t>(by + y) * w + (bx + xx)];
                dct.forward(block, coef);
                Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(kBands);
                for (int b = 1; b < 64; ++b) e(band_of[b]) += coef[b] * coef[b];  // DC excluded
                energy.row(bi) = e;
            }
        for (int b = 0; b < kBands; ++b) {
            const double mean = energy.col(b).mean();
            const double var = (energy.col(b).array() - mean).square().mean();
            out(b) = mean;
            out(kBands + b) = std::sqrt(var);
        }
    }

    // (b) normalized histogram of the 3x3 Laplacian high-pass residual,
    // scaled into [-1, 1], over interior pixels.
    {
        long count = 0;
        for (int y = 1; y + 1 < h; ++y)
            for (int xx = 1; xx + 1 < w; ++xx) {
                const double v = (4.0 * lum[static_cast<size_t>(y) * w + xx] -
                                  lum[static_cast<size_t>(y - 1) * w + xx] -
                                  lum[static_cast<size_t>(y + 1) * w + xx] -
                                  lum[static_cast<size_t>(y) * w + xx - 1] -
                                  lum[static_cast<size_t>(y) * w + xx + 1]) /
                                 4.0;
                int bin = static_cast<int>(std::floor((v + 1.0) * 0.5 * kHistBins));
                bin = std::clamp(bin, 0, kHistBins - 1);
                out(2 * kBands + bin) += 1.0;
                ++count;
            }
        out.segment(2 * kBands, kHistBins) /= static_cast<double>(count);
    }

    // (c) seeded Gaussian random projection of the 16x16 bilinear thumbnail.
    {
        Eigen::VectorXd thumb(256);
        for (int ty = 0; ty < 16; ++ty)
            for (int tx = 0; tx < 16; ++tx) {
                const double sy = (ty + 0.5) * h / 16.0 - 0.5;
                const double sx = (tx + 0.5) * w / 16.0 - 0.5;
                const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, h - 1);
                const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, w - 1);
                const int y1 = std::min(y0 + 1, h - 1);
                const int x1 = std::min(x0 + 1, w - 1);
                const double fy = std::clamp(sy - y0, 0.0, 1.0);
                const double fx = std::clamp(sx - x0, 0.0, 1.0);
                thumb(ty * 16 + tx) =
                    (1 - fy) * ((1 - fx) * lum[static_cast<size_t>(y0) * w + x0] +
                                fx * lum[static_cast<size_t>(y0) * w + x1]) +
                    fy * ((1 - fx) * lum[static_cast<size_t>(y1) * w + x0] +
                          fx * lum[static_cast<size_t>(y1) * w + x1]);
            }
        out.segment(2 * kBands + kHistBins, kProjDim) = projection_ * thumb;
    }
    return out;
}

std::vector<Eigen::VectorXd> Embedder::embed_batch(const std::vector<Image>& images,
                                                   int threads) const {
    std::vector<Eigen::VectorXd> out(images.size());
    if (threads <= 1 || images.size() < 2) {
        for (size_t i = 0; i < images.size(); ++i) {
            try {
                out[i] = embed(images[i]);
            } catch (const std::exception& e) {
                throw ShapeError("embed_batch: image " + std::to_string(i) + ": " + e.what());
            }
        }
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::string> errors(static_cast<size_t>(threads));
    const size_t n = images.size();
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (size_t i = static_cast<size_t>(t); i < n; i += static_cast<size_t>(threads)) {
                try {
                    out[i] = embed(images[i]);
                } catch (const std::exception& e) {
                    errors[static_cast<size_t>(t)] =
                        "embed_batch: image " + std::to_string(i) + ": " + e.what();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors)
        if (!err.empty()) throw ShapeError(err);
    return out;
}

Projection3d project_3d(const std::vector<Eigen::VectorXd>& features) {
    if (features.size() < 4) throw ConfigError("project_3d: need at least 4 vectors");
    const Eigen::Index F = features.front().size();
    const Eigen::Index n = static_cast<Eigen::Index>(features.size());
    Eigen::MatrixXd X(n, F);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (features[static_cast<size_t>(i)].size() != F)
            throw ShapeError("project_3d: feature length mismatch");
        X.row(i) = features[static_cast<size_t>(i)].transpose();
    }
    const Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;
    const Eigen::MatrixXd cov = X.transpose() * X / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd evals = es.eigenvalues();

    Projection3d result;
    const double lmax = evals(F - 1);
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(F, 3);
    for (int j = 0; j < 3; ++j) {
        const Eigen::Index idx = F - 1 - j;
        if (idx >= 0 && evals(idx) > 1e-12 * std::max(1.0, lmax)) {
            W.col(j) = es.eigenvectors().col(idx);
            Eigen::Index imax = 0;
            W.col(j).cwiseAbs().maxCoeff(&imax);
            if (W(imax, j) < 0.0) W.col(j) = -W.col(j);
            result.explained_variance[static_cast<size_t>(j)] = evals(idx);
        } else {
            result.rank_deficient = true;  // pad with zeros
        }
    }
    const Eigen::MatrixXd Y = X * W;
    result.points.resize(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        result.points[static_cast<size_t>(i)] = {Y(i, 0), Y(i, 1), Y(i, 2)};
    return result;
}

}  // namespace tracelab
