#include "tracelab/channels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "tracelab/dct.hpp"
#include "tracelab/errors.hpp"
#include "tracelab/png_io.hpp"
#include "tracelab/rng.hpp"

namespace tracelab {

namespace {

constexpr double kRankTol = 1e-12;

Eigen::MatrixXd stack_corpus(const std::vector<Image>& corpus, int& h, int& w) {
    if (corpus.empty()) throw ConfigError("corpus must be nonempty");
    h = corpus.front().height;
    w = corpus.front().width;
    const auto D = static_cast<Eigen::Index>(corpus.front().value_count());
    Eigen::MatrixXd X(static_cast<Eigen::Index>(corpus.size()), D);
    for (size_t i = 0; i < corpus.size(); ++i) {
        if (corpus[i].height != h || corpus[i].width != w)
            throw ShapeError("corpus images must share dimensions");
        X.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXd>(corpus[i].data.data(), D);
    }
    return X;
}

void fix_column_signs(Eigen::MatrixXd& W) {
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
        Eigen::Index imax = 0;
        W.col(c).cwiseAbs().maxCoeff(&imax);
        if (W(imax, c) < 0.0) W.col(c) = -W.col(c);
    }
}

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    auto arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
    auto arr = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        arr.push_back(row);
    }
    return arr;
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<size_t>(i)].get<double>();
    return v;
}

Eigen::MatrixXd mat_from_json(const nlohmann::json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = j[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
    return m;
}

std::string hash_of_json(const nlohmann::json& j) {
    const std::string s = j.dump();
    return hash_hex(fnv1a(s.data(), s.size()));
}

nlohmann::json channel_to_json(const ContinuousChannel& ch) {
    return {{"kind", "continuous"}, {"height", ch.height},   {"width", ch.width},
            {"requested_dim", ch.requested_dim}, {"degenerate", ch.degenerate},
            {"mean", vec_to_json(ch.mean)}, {"basis", mat_to_json(ch.basis)}};
}

nlohmann::json channel_to_json(const TokenChannel& ch) {
    return {{"kind", "token"},     {"height", ch.height}, {"width", ch.width},
            {"patch_size", ch.patch_size}, {"seed", ch.seed},
            {"codebook", mat_to_json(ch.codebook)}};
}

nlohmann::json channel_to_json(const DenoiseChannel& ch) {
    return {{"kind", "denoise"},  {"height", ch.height}, {"width", ch.width},
            {"steps", ch.steps},  {"band_mean", vec_to_json(ch.band_mean)},
            {"band_var", vec_to_json(ch.band_var)}};
}

// Pooled 8x8 DCT band statistics over every block of every channel plane.
void dct_band_stats(const std::vector<Image>& corpus, Eigen::VectorXd& mean,
                    Eigen::VectorXd& var) {
    const Dct8& dct = Dct8::instance();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(64);
    Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(64);
    long count = 0;
    double block[64], coef[64];
    for (const Image& img : corpus) {
        if (img.height % 8 != 0 || img.width % 8 != 0)
            throw ShapeError("denoise channel requires dimensions divisible by 8");
        for (int c = 0; c < 3; ++c)
            for (int by = 0; by < img.height; by += 8)
                for (int bx = 0; bx < img.width; bx += 8) {
                    for (int y = 0; y < 8; ++y)
                        for (int x = 0; x < 8; ++x) block[y * 8 + x] = img.at(by + y, bx + x, c);
                    dct.forward(block, coef);
                    for (int b = 0; b < 64; ++b) {
                        sum(b) += coef[b];
                        sum2(b) += coef[b] * coef[b];
                    }
                    ++count;
                }
    }
    mean = sum / static_cast<double>(count);
    var = (sum2 / static_cast<double>(count) - mean.cwiseProduct(mean)).cwiseMax(0.0);
    // E[x^2] - mean^2 cancellation can leave ~1e-45 residue on constant bands.
    for (int b = 0; b < 64; ++b)
        if (var(b) <= 1e-12 * std::max(1.0, mean(b) * mean(b))) var(b) = 0.0;
}

}  // namespace

Eigen::VectorXd flatten(const Image& img) {
    return Eigen::Map<const Eigen::VectorXd>(img.data.data(),
                                             static_cast<Eigen::Index>(img.value_count()));
}

Image unflatten(const Eigen::VectorXd& v, int height, int width) {
    Image img(height, width);
    Eigen::Map<Eigen::VectorXd>(img.data.data(), v.size()) = v;
    return img;
}

std::string ContinuousChannel::params_hash() const { return hash_of_json(channel_to_json(*this)); }
std::string TokenChannel::params_hash() const { return hash_of_json(channel_to_json(*this)); }
std::string DenoiseChannel::params_hash() const { return hash_of_json(channel_to_json(*this)); }

std::string channel_kind(const ChannelVariant& ch) {
    return std::visit(
        [](const auto& c) -> std::string {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, ContinuousChannel>) return "continuous";
            else if constexpr (std::is_same_v<T, TokenChannel>) return "token";
            else return "denoise";
        },
        ch);
}

std::string channel_taxonomy_category(const ChannelVariant& ch) {
    const std::string kind = channel_kind(ch);
    if (kind == "continuous") return "VAE.decoder";
    if (kind == "token") return "VQ.de-tokenizer";
    return "Diffusion.denoiser";
}

std::string channel_params_hash(const ChannelVariant& ch) {
    return std::visit([](const auto& c) { return c.params_hash(); }, ch);
}

ContinuousChannel fit_continuous(const std::vector<Image>& corpus, int d) {
    int h = 0, w = 0;
    Eigen::MatrixXd X = stack_corpus(corpus, h, w);
    const Eigen::Index n = X.rows(), D = X.cols();
    if (d < 0 || d > D) throw ConfigError("continuous channel: d must be in [0, D]");

    ContinuousChannel ch;
    ch.height = h;
    ch.width = w;
    ch.requested_dim = d;
    ch.mean = X.colwise().mean();
    X.rowwise() -= ch.mean.transpose();

    if (d == 0) {
        ch.basis = Eigen::MatrixXd(D, 0);
        return ch;
    }

    // Gram trick: eigenvectors of (1/n) X X^T map to pixel-covariance
    // eigenvectors as W = X^T v / sqrt(n * lambda).
    const Eigen::MatrixXd G = (X * X.transpose()) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd evals = es.eigenvalues();  // ascending
    const double lmax = evals(n - 1);

    int rank = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (evals(i) > kRankTol * std::max(1.0, lmax)) ++rank;
    const int d_eff = std::min(d, rank);
    ch.degenerate = d_eff < d;

    ch.basis = Eigen::MatrixXd(D, d_eff);
    for (int j = 0; j < d_eff; ++j) {
        const Eigen::Index idx = n - 1 - j;  // descending eigenvalue order
        ch.basis.col(j) =
            X.transpose() * es.eigenvectors().col(idx) / std::sqrt(static_cast<double>(n) * evals(idx));
    }
    fix_column_signs(ch.basis);
    return ch;
}

Eigen::VectorXd roundtrip_continuous_raw(const ContinuousChannel& ch, const Image& x) {
    if (x.height != ch.height || x.width != ch.width)
        throw ShapeError("continuous roundtrip: image dimensions do not match channel");
    const Eigen::VectorXd centered = flatten(x) - ch.mean;
    return ch.mean + ch.basis * (ch.basis.transpose() * centered);
}

Image roundtrip_continuous(const ContinuousChannel& ch, const Image& x) {
    Image out = unflatten(roundtrip_continuous_raw(ch, x), ch.height, ch.width);
    out.clamp01();
    return out;
}

TokenChannel fit_token(const std::vector<Image>& corpus, int patch_size, int K,
                       std::uint64_t seed) {
    if (corpus.empty()) throw ConfigError("corpus must be nonempty");
    const int h = corpus.front().height, w = corpus.front().width;
    if (patch_size < 1 || h % patch_size != 0 || w % patch_size != 0)
        throw ConfigError("token channel: image size must be divisible by patch size");

    const int py = h / patch_size, px = w / patch_size;
    const Eigen::Index dim = static_cast<Eigen::Index>(patch_size) * patch_size * 3;
    const Eigen::Index n_patches = static_cast<Eigen::Index>(corpus.size()) * py * px;
    if (K < 1 || K > n_patches) throw ConfigError("token channel: K must be in [1, patch count]");

    Eigen::MatrixXd P(n_patches, dim);
    Eigen::Index row = 0;
    for (const Image& img : corpus) {
        if (img.height != h || img.width != w) throw ShapeError("corpus images must share dimensions");
        for (int by = 0; by < h; by += patch_size)
            for (int bx = 0; bx < w; bx += patch_size) {
                Eigen::Index k = 0;
                for (int y = 0; y < patch_size; ++y)
                    for (int x = 0; x < patch_size; ++x)
                        for (int c = 0; c < 3; ++c) P(row, k++) = img.at(by + y, bx + x, c);
                ++row;
            }
    }

    // k-means++ seeding.
    Rng rng(derive_seed(seed, 0x706b));
    Eigen::MatrixXd C(K, dim);
    C.row(0) = P.row(static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n_patches))));
    Eigen::VectorXd d2 = (P.rowwise() - C.row(0)).rowwise().squaredNorm();
    for (int k = 1; k < K; ++k) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total, acc = 0.0;
            for (Eigen::Index i = 0; i < n_patches; ++i) {
                acc += d2(i);
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n_patches)));
        }
        C.row(k) = P.row(pick);
        d2 = d2.cwiseMin((P.rowwise() - C.row(k)).rowwise().squaredNorm());
    }

    // Lloyd iterations; assignment via ||p||^2 - 2 p.c + ||c||^2.
    const Eigen::VectorXd p_norms = P.rowwise().squaredNorm();
    std::vector<int> assign(static_cast<size_t>(n_patches), -1);
    for (int iter = 0; iter < 100; ++iter) {
        const Eigen::VectorXd c_norms = C.rowwise().squaredNorm();
        const Eigen::MatrixXd dots = P * C.transpose();  // n_patches x K
        bool changed = false;
        for (Eigen::Index i = 0; i < n_patches; ++i) {
            int best = 0;
            double best_d = p_norms(i) - 2.0 * dots(i, 0) + c_norms(0);
            for (int k = 1; k < K; ++k) {
                const double dd = p_norms(i) - 2.0 * dots(i, k) + c_norms(k);
                if (dd < best_d) {
                    best_d = dd;
                    best = k;
                }
            }
            if (assign[static_cast<size_t>(i)] != best) {
                assign[static_cast<size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        Eigen::MatrixXd newC = Eigen::MatrixXd::Zero(K, dim);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
        for (Eigen::Index i = 0; i < n_patches; ++i) {
            newC.row(assign[static_cast<size_t>(i)]) += P.row(i);
            counts(assign[static_cast<size_t>(i)]) += 1.0;
        }
        for (int k = 0; k < K; ++k) {
            if (counts(k) > 0.0) {
                newC.row(k) /= counts(k);
            } else {
                // Re-seed an empty cluster at the patch farthest from its centroid.
                Eigen::Index far = 0;
                double far_d = -1.0;
                for (Eigen::Index i = 0; i < n_patches; ++i) {
                    const double dd =
                        (P.row(i) - C.row(assign[static_cast<size_t>(i)])).squaredNorm();
                    if (dd > far_d) {
                        far_d = dd;
                        far = i;
                    }
                }
                newC.row(k) = P.row(far);
            }
        }
        const double shift = (newC - C).cwiseAbs().maxCoeff();
        C = newC;
        if (shift < 1e-6) break;
    }

    TokenChannel ch;
    ch.height = h;
    ch.width = w;
    ch.patch_size = patch_size;
    ch.codebook = C;
    ch.seed = seed;
    return ch;
}

Image roundtrip_token(const TokenChannel& ch, const Image& x) {
    if (x.height % ch.patch_size != 0 || x.width % ch.patch_size != 0 ||
        static_cast<Eigen::Index>(ch.patch_size) * ch.patch_size * 3 != ch.codebook.cols())
        throw ShapeError("token roundtrip: image dimensions do not match channel");
    const int p = ch.patch_size;
    const int K = ch.K();
    Image out(x.height, x.width);
    Eigen::VectorXd patch(ch.codebook.cols());
    for (int by = 0; by < x.height; by += p)
        for (int bx = 0; bx < x.width; bx += p) {
            Eigen::Index k = 0;
            for (int y = 0; y < p; ++y)
                for (int xx = 0; xx < p; ++xx)
                    for (int c = 0; c < 3; ++c) patch(k++) = x.at(by + y, bx + xx, c);
            int best = 0;
            double best_d = (ch.codebook.row(0).transpose() - patch).squaredNorm();
            for (int kk = 1; kk < K; ++kk) {
                const double dd = (ch.codebook.row(kk).transpose() - patch).squaredNorm();
                if (dd < best_d) {  // ties keep the lowest centroid index
                    best_d = dd;
                    best = kk;
                }
            }
            k = 0;
            for (int y = 0; y < p; ++y)
                for (int xx = 0; xx < p; ++xx)
                    for (int c = 0; c < 3; ++c) out.at(by + y, bx + xx, c) = ch.codebook(best, k++);
        }
    out.clamp01();
    return out;
}

double DenoiseChannel::gain(int band, int t) const {
    const double a = alpha(t);
    const double v = band_var(band);
    if (a <= 0.0 || v <= 0.0) return 0.0;
    const double noise = (beta(t) / a) * (beta(t) / a);
    return v / (v + noise);
}

DenoiseChannel fit_denoise(const std::vector<Image>& corpus, int T) {
    if (corpus.empty()) throw ConfigError("corpus must be nonempty");
    if (T < 1) throw ConfigError("denoise channel: T must be >= 1");
    DenoiseChannel ch;
    ch.height = corpus.front().height;
    ch.width = corpus.front().width;
    ch.steps = T;
    dct_band_stats(corpus, ch.band_mean, ch.band_var);
    return ch;
}

namespace {

// One MMSE estimate of the clean image from a noisy iterate at level t:
// rescale to unit signal, then shrink each DCT band toward its corpus mean.
std::vector<double> wiener_estimate(const DenoiseChannel& ch, const std::vector<double>& iterate,
                                    int t) {
    const Dct8& dct = Dct8::instance();
    const double a = ch.alpha(t);
    std::vector<double> est(iterate.size());
    double block[64], coef[64];
    const int h = ch.height, w = ch.width;
    for (int c = 0; c < 3; ++c)
        for (int by = 0; by < h; by += 8)
            for (int bx = 0; bx < w; bx += 8) {
                for (int y = 0; y < 8; ++y)
                    for (int x = 0; x < 8; ++x)
                        block[y * 8 + x] =
                            iterate[(static_cast<size_t>(by + y) * w + (bx + x)) * 3 + c];
                dct.forward(block, coef);
                for (int b = 0; b < 64; ++b) {
                    if (a <= 0.0) {
                        coef[b] = ch.band_mean(b);
                    } else {
                        const double unbiased = coef[b] / a;
                        coef[b] = ch.band_mean(b) + ch.gain(b, t) * (unbiased - ch.band_mean(b));
                    }
                }
                dct.inverse(coef, block);
                for (int y = 0; y < 8; ++y)
                    for (int x = 0; x < 8; ++x)
                        est[(static_cast<size_t>(by + y) * w + (bx + x)) * 3 + c] = block[y * 8 + x];
            }
    return est;
}

}  // namespace

Image roundtrip_denoise(const DenoiseChannel& ch, const Image& x, int t_start,
                        std::uint64_t noise_seed) {
    if (x.height != ch.height || x.width != ch.width)
        throw ShapeError("denoise roundtrip: image dimensions do not match channel");
    if (t_start < 0 || t_start > ch.steps)
        throw ConfigError("denoise roundtrip: t_start out of range");
    if (t_start == 0) return x;  // beta_0 = 0: no noise, no steps

    Rng rng(derive_seed(noise_seed, 0xd40));
    const double a0 = ch.alpha(t_start), b0 = ch.beta(t_start);
    std::vector<double> cur(x.data.size());
    for (size_t i = 0; i < cur.size(); ++i) cur[i] = a0 * x.data[i] + b0 * rng.normal();

    std::vector<double> x0;
    for (int t = t_start - 1; t >= 0; --t) {
        x0 = wiener_estimate(ch, cur, t + 1);
        const double a_next = ch.alpha(t + 1), b_next = ch.beta(t + 1);
        const double a_t = ch.alpha(t), b_t = ch.beta(t);
        for (size_t i = 0; i < cur.size(); ++i) {
            const double eps_hat = (cur[i] - a_next * x0[i]) / b_next;
            cur[i] = a_t * x0[i] + b_t * eps_hat;
        }
    }

    Image out(ch.height, ch.width);
    out.data = std::move(x0);
    out.clamp01();
    return out;
}

MismatchedEncoder make_mismatched_random(int height, int width, int d, std::uint64_t seed,
                                         const Eigen::VectorXd& mean) {
    const Eigen::Index D = static_cast<Eigen::Index>(height) * width * 3;
    if (d < 0 || d > D) throw ConfigError("mismatched encoder: d must be in [0, D]");
    if (mean.size() != D) throw ShapeError("mismatched encoder: mean length must equal D");
    Rng rng(derive_seed(seed, 0x3a7));
    Eigen::MatrixXd A(D, d);
    for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index r = 0; r < D; ++r) A(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(D, d);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < d; ++c)
        if (R(c, c) < 0.0) Q.col(c) = -Q.col(c);

    MismatchedEncoder enc;
    enc.kind = MismatchKind::random_orthonormal;
    enc.height = height;
    enc.width = width;
    enc.mean = mean;
    enc.basis = std::move(Q);
    enc.seed = seed;
    return enc;
}

MismatchedEncoder make_mismatched_foreign(const std::vector<Image>& foreign_corpus, int d) {
    const ContinuousChannel pca = fit_continuous(foreign_corpus, d);
    MismatchedEncoder enc;
    enc.kind = MismatchKind::foreign_corpus_pca;
    enc.height = pca.height;
    enc.width = pca.width;
    enc.mean = pca.mean;
    enc.basis = pca.basis;
    return enc;
}

Image reconstruct_mismatched(const MismatchedEncoder& enc, const Image& x) {
    if (x.height != enc.height || x.width != enc.width)
        throw ShapeError("mismatched reconstruction: image dimensions do not match encoder");
    const Eigen::VectorXd centered = flatten(x) - enc.mean;
    Image out = unflatten(enc.mean + enc.basis * (enc.basis.transpose() * centered), enc.height,
                          enc.width);
    out.clamp01();
    return out;
}

Image apply_roundtrip(const ChannelVariant& ch, const Image& x, const ConstructOptions& opts,
                      int image_index) {
    return std::visit(
        [&](const auto& c) -> Image {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, ContinuousChannel>) {
                return roundtrip_continuous(c, x);
            } else if constexpr (std::is_same_v<T, TokenChannel>) {
                return roundtrip_token(c, x);
            } else {
                const int t_start = opts.t_start >= 0 ? opts.t_start : c.steps / 2;
                return roundtrip_denoise(c, x, t_start,
                                         derive_seed(opts.noise_seed,
                                                     static_cast<std::uint64_t>(image_index)));
            }
        },
        ch);
}

DatasetManifest construct_negatives(const ChannelVariant& ch, const std::vector<Image>& corpus,
                                    const std::vector<std::string>& real_files,
                                    const std::filesystem::path& out_dir,
                                    const ConstructOptions& opts) {
    if (real_files.size() != corpus.size())
        throw ConfigError("construct_negatives: real file list must match corpus size");
    std::filesystem::create_directories(out_dir);

    DatasetManifest manifest;
    manifest.channel_kind = channel_kind(ch);
    manifest.params_hash = channel_params_hash(ch);
    manifest.taxonomy_category = channel_taxonomy_category(ch);

    for (size_t i = 0; i < corpus.size(); ++i) {
        Image fake;
        try {
            fake = apply_roundtrip(ch, corpus[i], opts, static_cast<int>(i));
        } catch (const std::exception& e) {
            throw IoError("roundtrip failed at source index " + std::to_string(i) + ": " + e.what());
        }
        char name[32];
        std::snprintf(name, sizeof(name), "fake_%05zu.png", i);
        write_png(out_dir / name, fake);
        manifest.entries.push_back({(out_dir / name).string(), 0, static_cast<int>(i)});
    }
    for (size_t i = 0; i < corpus.size(); ++i)
        manifest.entries.push_back({real_files[i], 1, static_cast<int>(i)});

    manifest.save(out_dir / "manifest.json");
    return manifest;
}

void save_channel(const ChannelVariant& ch, const std::filesystem::path& path) {
    const nlohmann::json j = std::visit([](const auto& c) { return channel_to_json(c); }, ch);
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write channel file: " + path.string());
    f << j.dump() << "\n";
}

ChannelVariant load_channel(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read channel file: " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed channel file " + path.string() + ": " + e.what());
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "continuous") {
        ContinuousChannel ch;
        ch.height = j.at("height").get<int>();
        ch.width = j.at("width").get<int>();
        ch.requested_dim = j.at("requested_dim").get<int>();
        ch.degenerate = j.at("degenerate").get<bool>();
        ch.mean = vec_from_json(j.at("mean"));
        ch.basis = mat_from_json(j.at("basis"));
        if (ch.basis.rows() == 0) ch.basis = Eigen::MatrixXd(ch.mean.size(), 0);
        return ch;
    }
    if (kind == "token") {
        TokenChannel ch;
        ch.height = j.at("height").get<int>();
        ch.width = j.at("width").get<int>();
        ch.patch_size = j.at("patch_size").get<int>();
        ch.seed = j.at("seed").get<std::uint64_t>();
        ch.codebook = mat_from_json(j.at("codebook"));
        return ch;
    }
    if (kind == "denoise") {
        DenoiseChannel ch;
        ch.height = j.at("height").get<int>();
        ch.width = j.at("width").get<int>();
        ch.steps = j.at("steps").get<int>();
        ch.band_mean = vec_from_json(j.at("band_mean"));
        ch.band_var = vec_from_json(j.at("band_var"));
        return ch;
    }
    throw IoError("unknown channel kind in " + path.string() + ": " + kind);
}

}  // namespace tracelab
