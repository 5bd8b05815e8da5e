// tracelab command-line front end: every subcommand is a thin wrapper around
// one library entry point so scripted runs and the config-driven `run` mode
// share the same code paths.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tracelab/channels.hpp"
#include "tracelab/corpus.hpp"
#include "tracelab/detector.hpp"
#include "tracelab/embedder.hpp"
#include "tracelab/errors.hpp"
#include "tracelab/harness.hpp"
#include "tracelab/png_io.hpp"
#include "tracelab/rng.hpp"
#include "tracelab/selection.hpp"
#include "tracelab/taxonomy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tracelab;

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) throw IoError("cannot write file: " + path.string());
    f << text;
}

std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>> embed_manifest_file(
    const fs::path& manifest_path, int threads) {
    const DatasetManifest m = DatasetManifest::load(manifest_path);
    const Embedder embedder;
    std::vector<Image> real_imgs, fake_imgs;
    for (const auto& e : m.entries)
        (e.label == 1 ? real_imgs : fake_imgs).push_back(read_png(e.file));
    return {embedder.embed_batch(real_imgs, threads), embedder.embed_batch(fake_imgs, threads)};
}

void write_metrics(const fs::path& out_dir, const MetricsReport& r, const std::string& subject) {
    fs::create_directories(out_dir);
    std::string csv = "experiment,subject,n_eval,accuracy,balanced_accuracy,average_precision\n";
    csv += "eval," + subject + "," + std::to_string(r.total()) + "," + fixed6(r.accuracy) + "," +
           fixed6(r.balanced_accuracy) + "," + fixed6(r.average_precision) + "\n";
    write_text(out_dir / "metrics.csv", csv);
    write_text(out_dir / "metrics.json",
               json{{"kind", "eval"},
                    {"subject", subject},
                    {"accuracy", r.accuracy},
                    {"balanced_accuracy", r.balanced_accuracy},
                    {"average_precision", r.average_precision},
                    {"ap_defined", r.ap_defined},
                    {"true_pos", r.true_pos},
                    {"false_pos", r.false_pos},
                    {"true_neg", r.true_neg},
                    {"false_neg", r.false_neg}}
                       .dump(2) +
                   "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tracelab: final-component trace construction and detection lab"};
    app.require_subcommand(1);

    std::string last_stage = "cli";
    try {
        // corpus-gen
        auto* cg = app.add_subcommand("corpus-gen", "generate the synthetic real-image corpus");
        CorpusConfig cg_cfg;
        std::string cg_out;
        cg->add_option("--out", cg_out, "output directory")->required();
        cg->add_option("--count", cg_cfg.count, "number of images");
        cg->add_option("--size", cg_cfg.size, "square image size (multiple of 8)");
        cg->add_option("--seed", cg_cfg.seed, "corpus seed");
        cg->add_option("--gamma", cg_cfg.spectral_exponent, "spectral exponent");
        cg->add_option("--shape-density", cg_cfg.shape_density, "overlay shape density");
        cg->callback([&] {
            last_stage = "corpus-gen";
            save_corpus(generate_corpus(cg_cfg), cg_out, cg_cfg);
        });

        // channel-fit
        auto* cf = app.add_subcommand("channel-fit", "fit a construction channel on a corpus");
        std::string cf_corpus, cf_kind = "continuous", cf_out;
        int cf_d = 8, cf_patch = 8, cf_K = 64, cf_T = 8;
        std::uint64_t cf_seed = 1234;
        cf->add_option("--corpus", cf_corpus, "corpus directory")->required();
        cf->add_option("--kind", cf_kind, "continuous | token | denoise");
        cf->add_option("--out", cf_out, "output channel JSON file")->required();
        cf->add_option("--d", cf_d, "continuous: latent dimension");
        cf->add_option("--patch", cf_patch, "token: patch size");
        cf->add_option("--K", cf_K, "token: codebook size");
        cf->add_option("--T", cf_T, "denoise: schedule steps");
        cf->add_option("--seed", cf_seed, "token: codebook init seed");
        cf->callback([&] {
            last_stage = "channel-fit";
            const std::vector<Image> corpus = load_corpus(cf_corpus);
            ChannelVariant ch;
            if (cf_kind == "continuous")
                ch = fit_continuous(corpus, cf_d);
            else if (cf_kind == "token")
                ch = fit_token(corpus, cf_patch, cf_K, cf_seed);
            else if (cf_kind == "denoise")
                ch = fit_denoise(corpus, cf_T);
            else
                throw ConfigError("unknown channel kind: " + cf_kind);
            save_channel(ch, cf_out);
        });

        // construct
        auto* co = app.add_subcommand("construct", "build the negative set from a fitted channel");
        std::string co_channel, co_corpus, co_out;
        ConstructOptions co_opts;
        co->add_option("--channel", co_channel, "channel JSON file")->required();
        co->add_option("--corpus", co_corpus, "corpus directory")->required();
        co->add_option("--out", co_out, "output directory")->required();
        co->add_option("--t-start", co_opts.t_start, "denoise: start step (-1 = T/2)");
        co->add_option("--noise-seed", co_opts.noise_seed, "denoise: noise seed");
        co->callback([&] {
            last_stage = "construct";
            const ChannelVariant ch = load_channel(co_channel);
            const std::vector<Image> corpus = load_corpus(co_corpus);
            std::vector<std::string> real_files;
            for (const auto& p : corpus_files(co_corpus)) real_files.push_back(p.string());
            const DatasetManifest m = construct_negatives(ch, corpus, real_files, co_out, co_opts);
            m.save(fs::path(co_out) / "manifest.json");
        });

        // select
        auto* se = app.add_subcommand("select", "k-medoids sparse selection over constructions");
        std::vector<std::string> se_manifests;
        int se_k = 25;
        std::uint64_t se_seed = 1234;
        std::string se_out;
        se->add_option("--manifest", se_manifests, "input manifest JSON (repeatable)")->required();
        se->add_option("--k", se_k, "medoids per construction set");
        se->add_option("--seed", se_seed, "selection seed (recorded)");
        se->add_option("--out", se_out, "output directory")->required();
        se->callback([&] {
            last_stage = "select";
            std::vector<DatasetManifest> ms;
            for (const auto& p : se_manifests) ms.push_back(DatasetManifest::load(p));
            select_sparse(ms, se_k, se_seed, se_out);
        });

        // train
        auto* tr = app.add_subcommand("train", "train a detector on a manifest");
        std::string tr_manifest, tr_out, tr_mode = "independent", tr_arch = "linear";
        TrainConfig tr_cfg;
        int tr_threads = 1;
        tr->add_option("--manifest", tr_manifest, "training manifest JSON")->required();
        tr->add_option("--out", tr_out, "output model JSON file")->required();
        tr->add_option("--batch", tr_cfg.batch, "mini-batch size per class");
        tr->add_option("--epochs", tr_cfg.epochs, "epochs");
        tr->add_option("--lr", tr_cfg.learning_rate, "learning rate");
        tr->add_option("--mode", tr_mode, "independent | paired");
        tr->add_option("--arch", tr_arch, "linear | mlp");
        tr->add_option("--seed", tr_cfg.seed, "shuffle/init seed");
        tr->add_option("--threads", tr_threads, "embedding threads");
        tr->add_flag("--no-standardize", [&](std::int64_t) { tr_cfg.standardize = false; },
                     "skip per-feature standardization");
        tr->callback([&] {
            last_stage = "train";
            tr_cfg.mode = tr_mode == "paired" ? SamplingMode::paired : SamplingMode::independent;
            if (tr_mode != "paired" && tr_mode != "independent")
                throw ConfigError("unknown sampling mode: " + tr_mode);
            tr_cfg.arch = arch_from_name(tr_arch);
            auto [real_f, fake_f] = embed_manifest_file(tr_manifest, tr_threads);
            const TrainResult res = train_detector(real_f, fake_f, tr_cfg);
            res.model.save(tr_out);
        });

        // eval
        auto* ev = app.add_subcommand("eval", "evaluate a trained detector on a manifest");
        std::string ev_model, ev_manifest, ev_out;
        int ev_threads = 1;
        ev->add_option("--model", ev_model, "model JSON file")->required();
        ev->add_option("--manifest", ev_manifest, "evaluation manifest JSON")->required();
        ev->add_option("--out", ev_out, "output directory")->required();
        ev->add_option("--threads", ev_threads, "embedding threads");
        ev->callback([&] {
            last_stage = "eval";
            const DetectorModel model = DetectorModel::load(ev_model);
            auto [real_f, fake_f] = embed_manifest_file(ev_manifest, ev_threads);
            write_metrics(ev_out, evaluate_detector(model, real_f, fake_f),
                          fs::path(ev_manifest).parent_path().filename().string());
        });

        // probe-variance
        auto* pv = app.add_subcommand("probe-variance",
                                      "paired vs independent mini-batch gradient variance");
        std::string pv_model, pv_manifest, pv_out;
        int pv_batch = 16, pv_trials = 10000, pv_threads = 1, pv_dim = 8;
        std::uint64_t pv_seed = 1234;
        double pv_rho = -1.0;
        pv->add_option("--model", pv_model, "model JSON file (pipeline probe)");
        pv->add_option("--manifest", pv_manifest, "paired manifest JSON (pipeline probe)");
        pv->add_option("--rho", pv_rho, "synthetic probe: pairwise gradient correlation");
        pv->add_option("--dim", pv_dim, "synthetic probe: gradient dimension");
        pv->add_option("--batch", pv_batch, "mini-batch size");
        pv->add_option("--trials", pv_trials, "probe trials");
        pv->add_option("--seed", pv_seed, "probe seed");
        pv->add_option("--threads", pv_threads, "embedding threads");
        pv->add_option("--out", pv_out, "output directory")->required();
        pv->callback([&] {
            last_stage = "probe-variance";
            fs::create_directories(pv_out);
            json j;
            std::string csv = "quantity,value\n";
            if (pv_rho >= 0.0) {
                const SyntheticProbeReport r =
                    synthetic_variance_probe(pv_rho, pv_batch, pv_trials, pv_seed, pv_dim);
                csv += "var_paired," + fixed6(r.var_paired) + "\n";
                csv += "var_indep," + fixed6(r.var_indep) + "\n";
                csv += "ratio," + fixed6(r.ratio) + "\n";
                j = {{"kind", "synthetic_variance_probe"}, {"rho", pv_rho},
                     {"var_paired", r.var_paired}, {"var_indep", r.var_indep},
                     {"ratio", r.ratio}, {"trials", pv_trials}, {"batch", pv_batch}};
            } else {
                if (pv_model.empty() || pv_manifest.empty())
                    throw ConfigError("probe-variance needs --model and --manifest, or --rho");
                const DetectorModel model = DetectorModel::load(pv_model);
                auto [real_f, fake_f] = embed_manifest_file(pv_manifest, pv_threads);
                const VarianceProbeReport r =
                    variance_probe(model, real_f, fake_f, pv_batch, pv_trials, pv_seed);
                csv += "var_paired," + fixed6(r.var_paired) + "\n";
                csv += "var_indep," + fixed6(r.var_indep) + "\n";
                csv += "cov_term," + fixed6(r.cov_term) + "\n";
                csv += "cov_direct," + fixed6(r.cov_direct) + "\n";
                j = {{"kind", "variance_probe"}, {"var_paired", r.var_paired},
                     {"var_indep", r.var_indep}, {"cov_term", r.cov_term},
                     {"cov_direct", r.cov_direct}, {"trials", r.trials}, {"batch", r.batch},
                     {"low_trials_warning", r.low_trials_warning}};
            }
            write_text(fs::path(pv_out) / "metrics.csv", csv);
            write_text(fs::path(pv_out) / "metrics.json", j.dump(2) + "\n");
        });

        // probe-property1
        auto* pp = app.add_subcommand("probe-property1",
                                      "matched vs mismatched encoder held-out loss");
        std::string pp_corpus, pp_out;
        int pp_d = 8, pp_seeds = 5;
        std::uint64_t pp_seed = 1234;
        TrainConfig pp_train;
        pp->add_option("--corpus", pp_corpus, "corpus directory")->required();
        pp->add_option("--d", pp_d, "encoder dimension");
        pp->add_option("--seeds", pp_seeds, "number of repeat seeds");
        pp->add_option("--seed", pp_seed, "base seed");
        pp->add_option("--batch", pp_train.batch, "mini-batch size per class");
        pp->add_option("--epochs", pp_train.epochs, "epochs");
        pp->add_option("--lr", pp_train.learning_rate, "learning rate");
        pp->add_option("--out", pp_out, "output directory")->required();
        pp->callback([&] {
            last_stage = "probe-property1";
            const std::vector<Image> corpus = load_corpus(pp_corpus);
            const Property1Result r =
                property1_experiment(corpus, pp_d, pp_train, pp_seeds, pp_seed);
            fs::create_directories(pp_out);
            std::string csv = "setting,mean_loss,sd_loss\n";
            csv += "matched," + fixed6(r.matched_mean) + "," + fixed6(r.matched_sd) + "\n";
            csv += "mismatched," + fixed6(r.mismatched_mean) + "," + fixed6(r.mismatched_sd) +
                   "\n";
            write_text(fs::path(pp_out) / "metrics.csv", csv);
            write_text(fs::path(pp_out) / "metrics.json",
                       json{{"kind", "property1"}, {"d", pp_d}, {"seeds", pp_seeds},
                            {"matched_mean", r.matched_mean}, {"matched_sd", r.matched_sd},
                            {"matched_losses", r.matched_losses},
                            {"mismatched_mean", r.mismatched_mean},
                            {"mismatched_sd", r.mismatched_sd},
                            {"mismatched_losses", r.mismatched_losses}}
                               .dump(2) +
                           "\n");
        });

        // viz
        auto* vz = app.add_subcommand("viz", "project a feature CSV to a 3-D scatter CSV");
        std::string vz_features, vz_out;
        vz->add_option("--features", vz_features, "input feature CSV")->required();
        vz->add_option("--out", vz_out, "output scatter CSV")->required();
        vz->callback([&] {
            last_stage = "viz";
            emit_viz(vz_features, vz_out);
        });

        // taxonomy
        auto* tx = app.add_subcommand("taxonomy", "list the generator registry");
        std::string tx_filter, tx_out;
        tx->add_option("--filter", tx_filter, "category filter");
        tx->add_option("--out", tx_out, "optional JSON output file");
        tx->callback([&] {
            last_stage = "taxonomy";
            const auto entries = taxonomy_list(tx_filter);
            for (const auto& e : entries)
                std::cout << e.category << "\t" << e.name << "\t" << e.subcategory << "\n";
            if (!tx_out.empty()) save_taxonomy(entries, tx_out);
        });

        // run (config-driven composite)
        auto* rn = app.add_subcommand("run", "execute a config-driven experiment");
        std::string rn_config, rn_out;
        std::uint64_t rn_seed = 0;
        bool rn_seed_set = false;
        int rn_threads = 0;
        rn->add_option("--config", rn_config, "experiment config JSON")->required();
        rn->add_option("--seed", rn_seed, "override experiment and corpus seed")
            ->each([&](const std::string&) { rn_seed_set = true; });
        rn->add_option("--out", rn_out, "override output directory");
        rn->add_option("--threads", rn_threads, "override thread count");
        rn->callback([&] {
            last_stage = "run";
            ExperimentConfig cfg = ExperimentConfig::from_json_file(rn_config);
            if (rn_seed_set) {
                cfg.seed = rn_seed;
                cfg.corpus.seed = rn_seed;
            }
            if (!rn_out.empty()) cfg.out_dir = rn_out;
            if (rn_threads > 0) cfg.threads = rn_threads;
            run_experiment(cfg);
        });

        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"stage", last_stage},
                          {"tool_version", kToolVersion}}.dump() << "\n";
        return 1;
    }
    return 0;
}
