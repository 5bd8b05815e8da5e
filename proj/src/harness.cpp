#include "tracelab/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tracelab/channels.hpp"
#include "tracelab/embedder.hpp"
#include "tracelab/errors.hpp"
#include "tracelab/manifest.hpp"
#include "tracelab/png_io.hpp"
#include "tracelab/rng.hpp"
#include "tracelab/selection.hpp"

namespace tracelab {

namespace fs = std::filesystem;
using nlohmann::json;

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

json metrics_to_json(const MetricsReport& r) {
    return {{"accuracy", r.accuracy},
            {"balanced_accuracy", r.balanced_accuracy},
            {"average_precision", r.average_precision},
            {"ap_defined", r.ap_defined},
            {"threshold", r.threshold},
            {"true_pos", r.true_pos},
            {"false_pos", r.false_pos},
            {"true_neg", r.true_neg},
            {"false_neg", r.false_neg}};
}

std::string metrics_csv_header() {
    return "experiment,subject,n_eval,accuracy,balanced_accuracy,average_precision\n";
}

std::string metrics_csv_row(const std::string& experiment, const std::string& subject,
                            const MetricsReport& r) {
    return experiment + "," + subject + "," + std::to_string(r.total()) + "," +
           fixed6(r.accuracy) + "," + fixed6(r.balanced_accuracy) + "," +
           fixed6(r.average_precision) + "\n";
}

SamplingMode mode_from_name(const std::string& name) {
    if (name == "independent") return SamplingMode::independent;
    if (name == "paired") return SamplingMode::paired;
    throw ConfigError("unknown sampling mode: " + name);
}

std::string mode_name(SamplingMode m) {
    return m == SamplingMode::independent ? "independent" : "paired";
}

// Everything downstream of corpus generation works off this snapshot.
struct Prepared {
    fs::path corpus_dir;
    std::vector<Image> train_imgs, test_imgs;
    std::vector<std::string> train_files, test_files;  // real PNG paths
};

Prepared prepare_corpus(const ExperimentConfig& config) {
    Prepared p;
    p.corpus_dir = config.out_dir / "corpus";
    const std::vector<Image> corpus = generate_corpus(config.corpus);
    save_corpus(corpus, p.corpus_dir, config.corpus);

    const auto [train_idx, test_idx] =
        split_indices(static_cast<int>(corpus.size()), config.train_fraction, config.seed);
    auto gather = [&](const std::vector<int>& idx, std::vector<Image>& imgs,
                      std::vector<std::string>& files) {
        for (int i : idx) {
            imgs.push_back(corpus[static_cast<size_t>(i)]);
            char name[32];
            std::snprintf(name, sizeof(name), "img_%05d.png", i);
            files.push_back((p.corpus_dir / name).string());
        }
    };
    gather(train_idx, p.train_imgs, p.train_files);
    gather(test_idx, p.test_imgs, p.test_files);
    return p;
}

ChannelVariant fit_channel(const ExperimentConfig& config, const std::string& name,
                           const std::vector<Image>& fit_set) {
    if (name == "continuous") return fit_continuous(fit_set, config.continuous_d);
    if (name == "token")
        return fit_token(fit_set, config.token_patch, config.token_K,
                         derive_seed(config.seed, 0x701));
    if (name == "denoise") return fit_denoise(fit_set, config.denoise_T);
    throw ConfigError("unknown channel kind: " + name);
}

ConstructOptions construct_options(const ExperimentConfig& config) {
    ConstructOptions opts;
    opts.t_start = config.denoise_t_start;
    opts.noise_seed = derive_seed(config.seed, 0x99);
    return opts;
}

// (real features, fake features) read back from the files the manifest names,
// so every model sees the quantized at-rest pixels.
std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>> embed_manifest(
    const DatasetManifest& manifest, const Embedder& embedder, int threads) {
    std::vector<Image> real_imgs, fake_imgs;
    for (const auto& e : manifest.entries) {
        Image img;
        try {
            img = read_png(e.file);
        } catch (const std::exception& err) {
            throw IoError("embed: manifest entry " + e.file + ": " + err.what());
        }
        (e.label == 1 ? real_imgs : fake_imgs).push_back(std::move(img));
    }
    return {embedder.embed_batch(real_imgs, threads), embedder.embed_batch(fake_imgs, threads)};
}

std::uint64_t effective_train_seed(const ExperimentConfig& config) {
    // A zero train seed means "derive from the experiment seed".
    return config.train.seed != 0 ? config.train.seed : derive_seed(config.seed, 0x7e41);
}

struct ChannelRun {
    std::string name;
    DatasetManifest train_manifest, test_manifest;
    std::vector<Eigen::VectorXd> train_real, train_fake, test_real, test_fake;
};

ChannelRun build_channel_run(const ExperimentConfig& config, const Prepared& p,
                             const std::string& name, const Embedder& embedder) {
    ChannelRun run;
    run.name = name;
    const ChannelVariant ch = fit_channel(config, name, p.train_imgs);
    save_channel(ch, config.out_dir / (name + "_channel.json"));
    const ConstructOptions opts = construct_options(config);
    run.train_manifest = construct_negatives(ch, p.train_imgs, p.train_files,
                                             config.out_dir / (name + "_train"), opts);
    run.test_manifest = construct_negatives(ch, p.test_imgs, p.test_files,
                                            config.out_dir / (name + "_test"), opts);
    std::tie(run.train_real, run.train_fake) =
        embed_manifest(run.train_manifest, embedder, config.threads);
    std::tie(run.test_real, run.test_fake) =
        embed_manifest(run.test_manifest, embedder, config.threads);
    return run;
}

void run_within_channel(const ExperimentConfig& config) {
    const Prepared p = prepare_corpus(config);
    const Embedder embedder;
    TrainConfig tc = config.train;
    tc.seed = effective_train_seed(config);

    std::string csv = metrics_csv_header();
    json jreports = json::object();
    for (const auto& name : config.channel_list) {
        const ChannelRun run = build_channel_run(config, p, name, embedder);
        const TrainResult tr = train_detector(run.train_real, run.train_fake, tc);
        tr.model.save(config.out_dir / (name + "_model.json"));
        const MetricsReport rep = evaluate_detector(tr.model, run.test_real, run.test_fake);
        csv += metrics_csv_row("within_channel", name, rep);
        jreports[name] = metrics_to_json(rep);
        jreports[name]["final_train_loss"] = tr.loss_trace.empty() ? 0.0 : tr.loss_trace.back();
    }
    write_text(config.out_dir / "metrics.csv", csv);
    write_text(config.out_dir / "metrics.json", json{{"kind", "within_channel"},
                                                     {"reports", jreports}}.dump(2) + "\n");
}

void run_cross_channel(const ExperimentConfig& config) {
    const Prepared p = prepare_corpus(config);
    const Embedder embedder;
    TrainConfig tc = config.train;
    tc.seed = effective_train_seed(config);

    std::vector<ChannelRun> runs;
    for (const auto& name : config.channel_list)
        runs.push_back(build_channel_run(config, p, name, embedder));

    std::string matrix = "train_channel";
    for (const auto& r : runs) matrix += "," + r.name;
    matrix += "\n";

    std::string csv = metrics_csv_header();
    json jmatrix = json::object();
    for (const auto& train_run : runs) {
        const TrainResult tr = train_detector(train_run.train_real, train_run.train_fake, tc);
        matrix += train_run.name;
        json row = json::object();
        for (const auto& test_run : runs) {
            const MetricsReport rep =
                evaluate_detector(tr.model, test_run.test_real, test_run.test_fake);
            matrix += "," + fixed6(rep.accuracy);
            csv += metrics_csv_row("cross_channel", train_run.name + ">" + test_run.name, rep);
            row[test_run.name] = metrics_to_json(rep);
        }
        matrix += "\n";
        jmatrix[train_run.name] = row;
    }
    write_text(config.out_dir / "cross_matrix.csv", matrix);
    write_text(config.out_dir / "metrics.csv", csv);
    write_text(config.out_dir / "metrics.json",
               json{{"kind", "cross_channel"}, {"matrix", jmatrix}}.dump(2) + "\n");
}

void run_sparse_vs_full(const ExperimentConfig& config) {
    const Prepared p = prepare_corpus(config);
    const Embedder embedder;
    TrainConfig tc = config.train;
    tc.seed = effective_train_seed(config);

    std::vector<ChannelRun> runs;
    for (const auto& name : config.channel_list)
        runs.push_back(build_channel_run(config, p, name, embedder));

    // Full training set: train reals once, every channel's constructed fakes.
    std::vector<Eigen::VectorXd> full_real = runs.front().train_real;
    std::vector<Eigen::VectorXd> full_fake;
    std::vector<DatasetManifest> train_manifests;
    for (const auto& r : runs) {
        full_fake.insert(full_fake.end(), r.train_fake.begin(), r.train_fake.end());
        train_manifests.push_back(r.train_manifest);
    }

    const SparseSelection sparse = select_sparse(train_manifests, config.selection_k, config.seed,
                                                 config.out_dir / "sparse");
    auto [sparse_real, sparse_fake] = embed_manifest(sparse.manifest, embedder, config.threads);

    // Shared held-out set: test reals once, every channel's test fakes.
    std::vector<Eigen::VectorXd> test_real = runs.front().test_real;
    std::vector<Eigen::VectorXd> test_fake;
    for (const auto& r : runs)
        test_fake.insert(test_fake.end(), r.test_fake.begin(), r.test_fake.end());

    const TrainResult full_tr = train_detector(full_real, full_fake, tc);
    const TrainResult sparse_tr = train_detector(sparse_real, sparse_fake, tc);
    full_tr.model.save(config.out_dir / "full_model.json");
    sparse_tr.model.save(config.out_dir / "sparse_model.json");

    const MetricsReport full_rep = evaluate_detector(full_tr.model, test_real, test_fake);
    const MetricsReport sparse_rep = evaluate_detector(sparse_tr.model, test_real, test_fake);

    std::string csv = metrics_csv_header();
    csv += metrics_csv_row("sparse_vs_full", "full", full_rep);
    csv += metrics_csv_row("sparse_vs_full", "sparse", sparse_rep);
    write_text(config.out_dir / "metrics.csv", csv);
    write_text(config.out_dir / "metrics.json",
               json{{"kind", "sparse_vs_full"},
                    {"full", metrics_to_json(full_rep)},
                    {"sparse", metrics_to_json(sparse_rep)},
                    {"selection_k", config.selection_k},
                    {"accuracy_gap", full_rep.accuracy - sparse_rep.accuracy}}
                       .dump(2) +
                   "\n");
}

void run_property1(const ExperimentConfig& config) {
    const std::vector<Image> corpus = generate_corpus(config.corpus);
    TrainConfig tc = config.train;
    tc.seed = effective_train_seed(config);
    const Property1Result res =
        property1_experiment(corpus, config.property1_d, tc, config.property1_seeds, config.seed);

    std::string csv = "setting,mean_loss,sd_loss\n";
    csv += "matched," + fixed6(res.matched_mean) + "," + fixed6(res.matched_sd) + "\n";
    csv += "mismatched," + fixed6(res.mismatched_mean) + "," + fixed6(res.mismatched_sd) + "\n";
    write_text(config.out_dir / "metrics.csv", csv);
    write_text(config.out_dir / "metrics.json",
               json{{"kind", "property1"},
                    {"d", config.property1_d},
                    {"seeds", config.property1_seeds},
                    {"matched_mean", res.matched_mean},
                    {"matched_sd", res.matched_sd},
                    {"matched_losses", res.matched_losses},
                    {"mismatched_mean", res.mismatched_mean},
                    {"mismatched_sd", res.mismatched_sd},
                    {"mismatched_losses", res.mismatched_losses}}
                       .dump(2) +
                   "\n");
}

void run_variance_probe(const ExperimentConfig& config) {
    const Prepared p = prepare_corpus(config);
    const Embedder embedder;
    ExperimentConfig cont = config;
    cont.channel_list = {"continuous"};
    const ChannelRun run = build_channel_run(cont, p, "continuous", embedder);

    // Probe at a lightly trained model so the per-sample gradients are neither
    // the structured zero-init ones nor fully saturated.
    TrainConfig tc = config.train;
    tc.seed = effective_train_seed(config);
    tc.epochs = std::min(tc.epochs, 2);
    const TrainResult tr = train_detector(run.train_real, run.train_fake, tc);

    const VarianceProbeReport rep =
        variance_probe(tr.model, run.train_real, run.train_fake, config.probe_batch,
                       config.probe_trials, derive_seed(config.seed, 0xab));

    std::string csv = "quantity,value\n";
    csv += "var_paired," + fixed6(rep.var_paired) + "\n";
    csv += "var_indep," + fixed6(rep.var_indep) + "\n";
    csv += "cov_term," + fixed6(rep.cov_term) + "\n";
    csv += "cov_direct," + fixed6(rep.cov_direct) + "\n";
    write_text(config.out_dir / "metrics.csv", csv);
    write_text(config.out_dir / "metrics.json",
               json{{"kind", "variance_probe"},
                    {"var_paired", rep.var_paired},
                    {"var_indep", rep.var_indep},
                    {"cov_term", rep.cov_term},
                    {"cov_direct", rep.cov_direct},
                    {"trials", rep.trials},
                    {"batch", rep.batch},
                    {"low_trials_warning", rep.low_trials_warning}}
                       .dump(2) +
                   "\n");
}

void run_visualize(const ExperimentConfig& config) {
    const Prepared p = prepare_corpus(config);
    const Embedder embedder;

    std::string features = "tag,source";
    for (int i = 0; i < Embedder::kDim; ++i) features += ",f" + std::to_string(i);
    features += "\n";
    auto append_rows = [&](const std::string& tag, const std::vector<ManifestEntry>& entries) {
        for (const auto& e : entries) {
            const Eigen::VectorXd f = embedder.embed(read_png(e.file));
            features += tag + "," + std::to_string(e.source);
            for (int i = 0; i < f.size(); ++i) features += "," + fixed6(f[i]);
            features += "\n";
        }
    };
    bool reals_done = false;
    for (const auto& name : config.channel_list) {
        const ChannelVariant ch = fit_channel(config, name, p.train_imgs);
        const DatasetManifest m = construct_negatives(ch, p.train_imgs, p.train_files,
                                                      config.out_dir / (name + "_train"),
                                                      construct_options(config));
        append_rows(name, m.fakes());
        if (!reals_done) {
            append_rows("real", m.reals());
            reals_done = true;
        }
    }
    const fs::path features_csv = config.out_dir / "features.csv";
    write_text(features_csv, features);
    emit_viz(features_csv, config.out_dir / "scatter.csv");
    write_text(config.out_dir / "metrics.json",
               json{{"kind", "visualize"}, {"features", "features.csv"},
                    {"scatter", "scatter.csv"}}.dump(2) + "\n");
}

}  // namespace

void ExperimentConfig::validate() const {
    static const std::set<std::string> kinds = {"within_channel", "cross_channel",
                                                "sparse_vs_full", "property1",
                                                "variance_probe", "visualize"};
    if (!kinds.count(kind)) throw ConfigError("unknown experiment kind: " + kind);
    corpus.validate();
    train.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must lie strictly between 0 and 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (channel_list.empty()) throw ConfigError("channel_list must not be empty");
    for (const auto& c : channel_list)
        if (c != "continuous" && c != "token" && c != "denoise")
            throw ConfigError("unknown channel kind: " + c);
    if (continuous_d < 1) throw ConfigError("continuous_d must be >= 1");
    if (token_patch < 1 || token_K < 1) throw ConfigError("token_patch and token_K must be >= 1");
    if (denoise_T < 1) throw ConfigError("denoise_T must be >= 1");
    if (denoise_t_start != -1 && (denoise_t_start < 0 || denoise_t_start > denoise_T))
        throw ConfigError("denoise_t_start must be -1 or in [0, T]");
    if (selection_k < 1) throw ConfigError("selection_k must be >= 1");
    if (probe_batch < 1 || probe_trials < 1)
        throw ConfigError("probe_batch and probe_trials must be >= 1");
    if (property1_d < 1 || property1_seeds < 1)
        throw ConfigError("property1_d and property1_seeds must be >= 1");
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

std::string ExperimentConfig::to_json_string() const {
    const json j = {
        {"kind", kind},
        {"seed", seed},
        {"threads", threads},
        {"out_dir", out_dir.string()},
        {"corpus",
         {{"count", corpus.count},
          {"size", corpus.size},
          {"seed", corpus.seed},
          {"spectral_exponent", corpus.spectral_exponent},
          {"shape_density", corpus.shape_density}}},
        {"train_fraction", train_fraction},
        {"channels", channel_list},
        {"continuous_d", continuous_d},
        {"token_patch", token_patch},
        {"token_K", token_K},
        {"denoise_T", denoise_T},
        {"denoise_t_start", denoise_t_start},
        {"selection_k", selection_k},
        {"train",
         {{"batch", train.batch},
          {"epochs", train.epochs},
          {"learning_rate", train.learning_rate},
          {"mode", mode_name(train.mode)},
          {"seed", train.seed},
          {"arch", arch_name(train.arch)},
          {"standardize", train.standardize}}},
        {"probe_batch", probe_batch},
        {"probe_trials", probe_trials},
        {"property1_d", property1_d},
        {"property1_seeds", property1_seeds},
    };
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    }
    ExperimentConfig c;
    try {
        if (j.contains("kind")) c.kind = j["kind"].get<std::string>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("threads")) c.threads = j["threads"].get<int>();
        if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("corpus")) {
            const auto& jc = j["corpus"];
            if (jc.contains("count")) c.corpus.count = jc["count"].get<int>();
            if (jc.contains("size")) c.corpus.size = jc["size"].get<int>();
            if (jc.contains("seed")) c.corpus.seed = jc["seed"].get<std::uint64_t>();
            if (jc.contains("spectral_exponent"))
                c.corpus.spectral_exponent = jc["spectral_exponent"].get<double>();
            if (jc.contains("shape_density"))
                c.corpus.shape_density = jc["shape_density"].get<double>();
        }
        if (j.contains("train_fraction")) c.train_fraction = j["train_fraction"].get<double>();
        if (j.contains("channels")) c.channel_list = j["channels"].get<std::vector<std::string>>();
        if (j.contains("continuous_d")) c.continuous_d = j["continuous_d"].get<int>();
        if (j.contains("token_patch")) c.token_patch = j["token_patch"].get<int>();
        if (j.contains("token_K")) c.token_K = j["token_K"].get<int>();
        if (j.contains("denoise_T")) c.denoise_T = j["denoise_T"].get<int>();
        if (j.contains("denoise_t_start")) c.denoise_t_start = j["denoise_t_start"].get<int>();
        if (j.contains("selection_k")) c.selection_k = j["selection_k"].get<int>();
        if (j.contains("train")) {
            const auto& jt = j["train"];
            if (jt.contains("batch")) c.train.batch = jt["batch"].get<int>();
            if (jt.contains("epochs")) c.train.epochs = jt["epochs"].get<int>();
            if (jt.contains("learning_rate"))
                c.train.learning_rate = jt["learning_rate"].get<double>();
            if (jt.contains("mode")) c.train.mode = mode_from_name(jt["mode"].get<std::string>());
            if (jt.contains("seed")) c.train.seed = jt["seed"].get<std::uint64_t>();
            if (jt.contains("arch")) c.train.arch = arch_from_name(jt["arch"].get<std::string>());
            if (jt.contains("standardize")) c.train.standardize = jt["standardize"].get<bool>();
        }
        if (j.contains("probe_batch")) c.probe_batch = j["probe_batch"].get<int>();
        if (j.contains("probe_trials")) c.probe_trials = j["probe_trials"].get<int>();
        if (j.contains("property1_d")) c.property1_d = j["property1_d"].get<int>();
        if (j.contains("property1_seeds")) c.property1_seeds = j["property1_seeds"].get<int>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad experiment config field: ") + e.what());
    }
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return from_json_string(ss.str());
}

void write_error_record(const fs::path& out_dir, const std::string& stage,
                        const std::string& message) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream f(out_dir / "error.json", std::ios::trunc);
    if (!f) return;  // best effort: the original error matters more
    f << json{{"stage", stage}, {"message", message}, {"tool_version", kToolVersion}}.dump(2)
      << "\n";
}

void run_experiment(const ExperimentConfig& config) {
    config.validate();
    fs::create_directories(config.out_dir);

    // The echoed config plus version stamp make the run re-executable as-is.
    const std::string resolved = config.to_json_string();
    write_text(config.out_dir / "resolved_config.json", resolved);
    write_text(config.out_dir / "version.txt",
               std::string("tracelab ") + kToolVersion + "\nconfig_hash " +
                   hash_hex(fnv1a(resolved.data(), resolved.size())) + "\n");

    try {
        if (config.kind == "within_channel")
            run_within_channel(config);
        else if (config.kind == "cross_channel")
            run_cross_channel(config);
        else if (config.kind == "sparse_vs_full")
            run_sparse_vs_full(config);
        else if (config.kind == "property1")
            run_property1(config);
        else if (config.kind == "variance_probe")
            run_variance_probe(config);
        else if (config.kind == "visualize")
            run_visualize(config);
    } catch (const std::exception& e) {
        write_error_record(config.out_dir, config.kind, e.what());
        throw;
    }
}

void emit_viz(const fs::path& features_csv, const fs::path& out_csv) {
    std::ifstream f(features_csv);
    if (!f) throw IoError("cannot read feature CSV: " + features_csv.string());

    std::string line;
    size_t lineno = 0;
    std::vector<std::string> tags;
    std::vector<Eigen::VectorXd> features;
    bool header = true;
    int expected_cols = -1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (header) {
            if (cols.size() < 3 || cols[0] != "tag")
                throw IoError("feature CSV line " + std::to_string(lineno) +
                              ": expected header starting with tag,source,f0,...");
            expected_cols = static_cast<int>(cols.size());
            header = false;
            continue;
        }
        if (static_cast<int>(cols.size()) != expected_cols)
            throw IoError("feature CSV line " + std::to_string(lineno) + ": expected " +
                          std::to_string(expected_cols) + " columns, got " +
                          std::to_string(cols.size()));
        Eigen::VectorXd v(expected_cols - 2);
        for (int i = 2; i < expected_cols; ++i) {
            try {
                v[i - 2] = std::stod(cols[static_cast<size_t>(i)]);
            } catch (const std::exception&) {
                throw IoError("feature CSV line " + std::to_string(lineno) +
                              ": non-numeric feature value '" + cols[static_cast<size_t>(i)] +
                              "'");
            }
        }
        tags.push_back(cols[0]);
        features.push_back(std::move(v));
    }
    if (features.empty()) throw IoError("feature CSV has no data rows: " + features_csv.string());

    const Projection3d proj = project_3d(features);
    std::string out = "x,y,z,tag\n";
    for (size_t i = 0; i < proj.points.size(); ++i)
        out += fixed6(proj.points[i][0]) + "," + fixed6(proj.points[i][1]) + "," +
               fixed6(proj.points[i][2]) + "," + tags[i] + "\n";
    write_text(out_csv, out);
}

}  // namespace tracelab
