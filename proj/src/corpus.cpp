#include "tracelab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "tracelab/errors.hpp"
#include "tracelab/fft.hpp"
#include "tracelab/png_io.hpp"
#include "tracelab/rng.hpp"

namespace tracelab {

namespace {

// Real-valued random field with radially isotropic power spectrum ~ 1/f^gamma:
// white noise shaped in the frequency domain.
std::vector<double> spectral_field(Rng& rng, int n, double gamma) {
    std::vector<Complex> grid(static_cast<size_t>(n) * n);
    for (auto& v : grid) v = Complex(rng.normal(), 0.0);
    fft_2d(grid, n, -1);
    for (int ky = 0; ky < n; ++ky) {
        for (int kx = 0; kx < n; ++kx) {
            const int fy = ky <= n / 2 ? ky : ky - n;
            const int fx = kx <= n / 2 ? kx : kx - n;
            const double f = std::sqrt(static_cast<double>(fy) * fy + static_cast<double>(fx) * fx);
            const double amp = f > 0.0 ? std::pow(f, -gamma / 2.0) : 0.0;
            grid[static_cast<size_t>(ky) * n + kx] *= amp;
        }
    }
    fft_2d(grid, n, +1);
    std::vector<double> field(static_cast<size_t>(n) * n);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (size_t i = 0; i < field.size(); ++i) field[i] = grid[i].real() * scale;

    // Normalize to mean 0, unit std (affine; leaves the spectral slope intact).
    double mean = std::accumulate(field.begin(), field.end(), 0.0) / field.size();
    double var = 0.0;
    for (double v : field) var += (v - mean) * (v - mean);
    var /= static_cast<double>(field.size());
    const double inv_std = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (double& v : field) v = (v - mean) * inv_std;
    return field;
}

void overlay_shapes(Rng& rng, Image& img, double density) {
    const int n_shapes = static_cast<int>(std::lround(density * 6.0));
    for (int s = 0; s < n_shapes; ++s) {
        const bool disc = rng.uniform() < 0.5;
        const double cx = rng.uniform(0.0, img.width);
        const double cy = rng.uniform(0.0, img.height);
        const double rx = rng.uniform(0.05, 0.25) * img.width;
        const double ry = rng.uniform(0.05, 0.25) * img.height;
        double color[3];
        for (double& c : color) c = rng.uniform(0.1, 0.9);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                const double dx = (x - cx) / rx, dy = (y - cy) / ry;
                const bool inside = disc ? (dx * dx + dy * dy <= 1.0)
                                         : (std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0);
                if (inside)
                    for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[c];
            }
        }
    }
}

}  // namespace

void CorpusConfig::validate() const {
    if (count < 1) throw ConfigError("corpus count must be >= 1");
    if (size < 16 || size % 8 != 0) throw ConfigError("corpus size must be >= 16 and a multiple of 8");
    if (!(spectral_exponent > 0.0)) throw ConfigError("spectral exponent must be > 0");
    if (shape_density < 0.0 || shape_density > 1.0) throw ConfigError("shape density must be in [0,1]");
}

Image generate_image(const CorpusConfig& config, int index) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(index)));
    const int n = config.size;

    const auto base = spectral_field(rng, n, config.spectral_exponent);
    Image img(n, n);
    for (int c = 0; c < 3; ++c) {
        const auto chroma = spectral_field(rng, n, config.spectral_exponent);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const size_t p = static_cast<size_t>(y) * n + x;
                img.at(y, x, c) = 0.5 + 0.15 * (0.8 * base[p] + 0.2 * chroma[p]);
            }
    }
    overlay_shapes(rng, img, config.shape_density);
    img.clamp01();
    return img;
}

std::vector<Image> generate_corpus(const CorpusConfig& config) {
    config.validate();
    std::vector<Image> images;
    images.reserve(static_cast<size_t>(config.count));
    for (int i = 0; i < config.count; ++i) images.push_back(generate_image(config, i));
    return images;
}

std::filesystem::path save_corpus(const std::vector<Image>& images,
                                  const std::filesystem::path& directory,
                                  const CorpusConfig& config) {
    std::filesystem::create_directories(directory);
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["seed"] = config.seed;
    manifest["count"] = static_cast<int>(images.size());
    manifest["size"] = config.size;
    manifest["gamma"] = config.spectral_exponent;
    manifest["shape_density"] = config.shape_density;
    auto files = nlohmann::json::array();
    for (size_t i = 0; i < images.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%05zu.png", i);
        write_png(directory / name, images[i]);
        files.push_back(name);
    }
    manifest["files"] = files;
    const auto manifest_path = directory / "corpus.json";
    std::ofstream f(manifest_path, std::ios::trunc);
    if (!f) throw IoError("cannot write corpus manifest: " + manifest_path.string());
    f << manifest.dump(2) << "\n";
    return manifest_path;
}

std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& directory) {
    const auto manifest_path = directory / "corpus.json";
    std::ifstream f(manifest_path);
    if (!f) throw IoError("missing corpus manifest: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        f >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed corpus manifest " + manifest_path.string() + ": " + e.what());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& name : manifest.at("files")) files.push_back(directory / name.get<std::string>());
    return files;
}

std::vector<Image> load_corpus(const std::filesystem::path& directory) {
    const auto manifest_path = directory / "corpus.json";
    std::ifstream f(manifest_path);
    if (!f) throw IoError("missing corpus manifest: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        f >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed corpus manifest " + manifest_path.string() + ": " + e.what());
    }
    const int size = manifest.at("size").get<int>();
    std::vector<Image> images;
    for (const auto& name : manifest.at("files")) {
        const auto path = directory / name.get<std::string>();
        Image img = read_png(path);
        if (img.height != size || img.width != size)
            throw IoError("dimension mismatch with manifest: " + path.string());
        images.push_back(std::move(img));
    }
    return images;
}

std::pair<std::vector<int>, std::vector<int>> split_indices(int n, double train_fraction,
                                                            std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train fraction must be in (0, 1)");
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0x5f17));
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.next_below(static_cast<std::uint64_t>(i) + 1)]);
    const int n_train = static_cast<int>(std::lround(train_fraction * n));
    std::vector<int> train(perm.begin(), perm.begin() + n_train);
    std::vector<int> test(perm.begin() + n_train, perm.end());
    return {std::move(train), std::move(test)};
}

std::pair<std::vector<Image>, std::vector<Image>> split_corpus(const std::vector<Image>& images,
                                                               double train_fraction,
                                                               std::uint64_t seed) {
    const auto [train_idx, test_idx] = split_indices(static_cast<int>(images.size()), train_fraction, seed);
    std::vector<Image> train, test;
    for (int i : train_idx) train.push_back(images[static_cast<size_t>(i)]);
    for (int i : test_idx) test.push_back(images[static_cast<size_t>(i)]);
    return {std::move(train), std::move(test)};
}

}  // namespace tracelab
