#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tracelab {

// Closed set of final-component categories, keyed by the input space of the
// generator's last functional module.
inline const std::vector<std::string>& taxonomy_categories() {
    static const std::vector<std::string> cats = {"VAE.decoder", "VQ.de-tokenizer",
                                                  "Diffusion.denoiser", "One-stop.generator"};
    return cats;
}

struct TaxonomyEntry {
    std::string name;
    std::string category;     // one of taxonomy_categories()
    std::string subcategory;  // e.g. "latent diffusion", "next-token auto-regression"
    std::string source_note;  // which implementation/documentation the call was traced to
};

// Bundled registry of widely used generators classified by final component.
// Generators with two official implementations appear once per implementation
// with distinct source notes.
const std::vector<TaxonomyEntry>& taxonomy_registry();

// Filterable view; empty filter returns everything. Unknown category -> error.
std::vector<TaxonomyEntry> taxonomy_list(const std::string& category_filter = "");

void save_taxonomy(const std::vector<TaxonomyEntry>& entries, const std::filesystem::path& path);
std::vector<TaxonomyEntry> load_taxonomy(const std::filesystem::path& path);

}  // namespace tracelab
