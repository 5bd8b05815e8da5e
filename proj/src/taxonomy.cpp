#include "tracelab/taxonomy.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tracelab/errors.hpp"

namespace tracelab {

const std::vector<TaxonomyEntry>& taxonomy_registry() {
    static const std::vector<TaxonomyEntry> registry = {
        // VAE.decoder: continuous latent input space.
        {"Stable Diffusion 2.1", "VAE.decoder", "latent diffusion",
         "stabilityai/stable-diffusion-2-1, vae.decode on the denoised latent"},
        {"Stable Diffusion 3.5", "VAE.decoder", "latent diffusion",
         "Stability-AI/sd3.5 sd3_infer.py, vae_decode(sampled_latent)"},
        {"Stable Diffusion XL", "VAE.decoder", "latent diffusion",
         "diffusers pipeline_stable_diffusion_xl.py, vae.decode(latents)"},
        {"Flux 1-dev", "VAE.decoder", "latent diffusion",
         "diffusers pipeline_flux.py, vae.decode(latents) (latent-space implementation)"},
        {"HiDream-I1", "VAE.decoder", "enhancement",
         "HiDream-ai/HiDream-I1 pipeline, vae.decode(latents) after GAN-refined latent"},
        {"CogView 4", "VAE.decoder", "latent super-resolution",
         "diffusers pipeline_cogview4.py, vae.decode(latents)"},
        {"DeepFloyd IF", "VAE.decoder", "latent super-resolution",
         "deep-floyd/IF stage_III_sd_x4.py, stable-diffusion-x4-upscaler variant"},

        // VQ.de-tokenizer: discrete token input space.
        {"Emu3", "VQ.de-tokenizer", "next-token auto-regression",
         "baaivision/Emu3 processing_emu3.py, tokenizer.decode then multimodal_decode"},
        {"JanusPro", "VQ.de-tokenizer", "next-token auto-regression",
         "deepseek-ai/Janus vq_model.py, quantize.get_codebook_entry then decode"},
        {"LlamaGen", "VQ.de-tokenizer", "next-token auto-regression",
         "FoundationVision/LlamaGen sample_t2i.py, vq_model.decode_code"},
        {"VAR", "VQ.de-tokenizer", "next-scale auto-regression",
         "FoundationVision/VAR models/var.py, vae_proxy fhat_to_img"},
        {"Infinity", "VQ.de-tokenizer", "next-scale auto-regression",
         "FoundationVision/Infinity infinity.py, vae.decode(summed_codes)"},
        {"Kandinsky 3.0", "VQ.de-tokenizer", "latent diffusion hybrid",
         "ai-forever/Kandinsky-3 movq.py, post_quant_conv then decoder"},

        // Diffusion.denoiser: the final step removes noise in pixel space.
        {"MAR", "Diffusion.denoiser", "continuous token",
         "LTH14/mar models/mar.py; decoder network structurally a U-Net denoiser"},
        {"DALL-E 2", "Diffusion.denoiser", "cascade super-resolution",
         "documentation only: two diffusion upsamplers, 64->256 and 256->1024"},
        {"DALL-E 3", "Diffusion.denoiser", "cascade super-resolution",
         "no public source; classified from released documentation"},
        {"GLIDE", "Diffusion.denoiser", "cascade super-resolution",
         "openai/glide-text2im text2im_model.py forward"},
        {"PixelFlow", "Diffusion.denoiser", "end-to-end super-resolution",
         "ShoufaChen/PixelFlow pipeline_pixelflow.py, scheduler.step in pixel space"},
        {"ReflectionFlow", "Diffusion.denoiser", "same-size pixels",
         "Diffusion-CoT/ReflectionFlow sample.py, pixel-space Flux refinement"},
        {"DDPM", "Diffusion.denoiser", "same-size pixels",
         "hojonathanho/diffusion diffusion_utils_2.py, p_sample loop"},
        {"DDIM", "Diffusion.denoiser", "same-size pixels",
         "diffusers pipeline_ddim.py, scheduler.step"},
        {"Flux 1-dev", "Diffusion.denoiser", "same-size pixels",
         "black-forest-labs/flux sampling.py, pixel-space implementation"},
        {"DeepFloyd IF", "Diffusion.denoiser", "cascade super-resolution",
         "deep-floyd/IF stage_III.py, pixel-space p_sample_loop variant"},

        // One-stop.generator: noise vector straight to pixels.
        {"GigaGAN", "One-stop.generator", "adversarial",
         "lucidrains/gigagan-pytorch, generator forward"},
        {"JetFormer", "One-stop.generator", "pixel-wise auto-regression",
         "google-research/big_vision jetformer.py, decoder output"},
    };
    return registry;
}

std::vector<TaxonomyEntry> taxonomy_list(const std::string& category_filter) {
    if (!category_filter.empty()) {
        const auto& cats = taxonomy_categories();
        if (std::find(cats.begin(), cats.end(), category_filter) == cats.end())
            throw ConfigError("unknown taxonomy category: " + category_filter);
    }
    std::vector<TaxonomyEntry> out;
    for (const auto& e : taxonomy_registry())
        if (category_filter.empty() || e.category == category_filter) out.push_back(e);
    return out;
}

void save_taxonomy(const std::vector<TaxonomyEntry>& entries, const std::filesystem::path& path) {
    auto arr = nlohmann::json::array();
    for (const auto& e : entries)
        arr.push_back({{"name", e.name},
                       {"category", e.category},
                       {"subcategory", e.subcategory},
                       {"source_note", e.source_note}});
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write taxonomy file: " + path.string());
    f << nlohmann::json{{"version", 1}, {"entries", arr}}.dump(2) << "\n";
}

std::vector<TaxonomyEntry> load_taxonomy(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read taxonomy file: " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed taxonomy file " + path.string() + ": " + e.what());
    }
    std::vector<TaxonomyEntry> out;
    for (const auto& e : j.at("entries"))
        out.push_back({e.at("name").get<std::string>(), e.at("category").get<std::string>(),
                       e.at("subcategory").get<std::string>(),
                       e.at("source_note").get<std::string>()});
    return out;
}

}  // namespace tracelab
