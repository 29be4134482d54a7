// stfall: one-class fall detection via adversarially trained autoencoders.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stfall/evalkit.hpp"
#include "stfall/ingest.hpp"
#include "stfall/nn/builders.hpp"
#include "stfall/scoring.hpp"
#include "stfall/synthgen.hpp"
#include "stfall/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stfall;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 2 bad config/input, 3 I/O or missing artifact
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct ManifestWriter {
    json j;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    ManifestWriter(const std::string& command, int argc, char** argv) {
        j["tool"] = std::string("stfall ") + kVersion;
        j["command"] = command;
        std::string line;
        for (int i = 0; i < argc; ++i) {
            if (i) line += ' ';
            line += argv[i];
        }
        j["command_line"] = line;
        j["outputs"] = json::array();
    }

    void add_output(const std::string& path) { j["outputs"].push_back(path); }

    // write-temp-then-rename so a crashed run never leaves a partial manifest
    void write(const fs::path& dir) {
        j["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& out : j["outputs"])
            if (!fs::exists(out.get<std::string>()))
                throw IoError("manifest names a missing output: " + out.get<std::string>());
        fs::create_directories(dir);
        const fs::path tmp = dir / "run_manifest.json.tmp";
        std::ofstream f(tmp);
        if (!f) throw IoError("cannot write " + tmp.string());
        f << j.dump(2) << '\n';
        f.close();
        fs::rename(tmp, dir / "run_manifest.json");
    }
};

std::uint64_t seed_override(std::uint64_t cfg_seed) {
    if (const char* env = std::getenv("STFALL_SEED")) return std::stoull(env);
    return cfg_seed;
}

void require_artifact(const std::string& path) {
    if (!fs::exists(path)) throw IoError("missing artifact: " + path);
}

std::string model_fingerprint(const std::string& model_dir) {
    Fnv1a h;
    for (const char* name : {"model.json", "gen.bin", "disc.bin"})
        h.update(hash_file((fs::path(model_dir) / name).string()));
    return h.hex();
}

int cmd_gen_synth(const std::string& cfg_path, const std::string& out_root, int argc, char** argv) {
    SynthConfig cfg = synth_config_from_file(cfg_path);
    cfg.seed = seed_override(cfg.seed);
    cfg.validate();

    ManifestWriter mw("gen-synth", argc, argv);
    SynthManifest manifest = gen_dataset(cfg, out_root);
    mw.j["seed"] = cfg.seed;
    mw.j["config_file"] = cfg_path;
    mw.j["dataset_hash"] = manifest.dataset_hash;
    mw.add_output((fs::path(out_root) / "manifest.json").string());
    mw.add_output((fs::path(out_root) / "labels.csv").string());
    mw.write(out_root);
    std::cout << "generated " << manifest.videos.size() << " videos under " << out_root
              << " (dataset hash " << manifest.dataset_hash << ")\n";
    return 0;
}

int cmd_train(const std::string& family, const std::string& data_root, const std::string& cfg_path,
              const std::string& out_dir, bool adl_only, const std::vector<std::string>& exclude,
              int argc, char** argv) {
    require_artifact(data_root);
    TrainConfig cfg = train_config_from_file(cfg_path);
    if (!family.empty()) cfg.family = family;
    cfg.seed = seed_override(cfg.seed);
    cfg.validate();

    ManifestWriter mw("train", argc, argv);
    std::vector<FrameSequence> train_set;
    for (auto& raw : load_dataset(data_root)) {
        if (std::find(exclude.begin(), exclude.end(), raw.video_id) != exclude.end()) continue;
        if (adl_only && raw.has_fall()) continue;
        train_set.push_back(preprocess(raw, cfg.input_size));
    }
    if (train_set.empty()) throw InputError("no training videos left after filtering");

    TrainResult result = train(train_set, cfg, out_dir);

    mw.j["seed"] = cfg.seed;
    mw.j["config_file"] = cfg_path;
    mw.j["resolved_config"] = cfg.canonical_text();
    mw.j["config_hash"] = cfg.hash();
    mw.j["dataset_hash"] = hash_directory(data_root);
    json tv = json::array();
    for (const auto& s : train_set) tv.push_back(s.video_id);
    mw.j["train_videos"] = tv;
    for (const char* name : {"model.json", "gen.bin", "disc.bin", "history.csv"})
        mw.add_output((fs::path(out_dir) / name).string());
    mw.write(out_dir);

    const auto& last = result.history.epochs.back();
    std::cout << "trained " << cfg.family << " for " << last.epoch
              << " epochs; final mean reconstruction loss " << format_real(last.mean_recon)
              << '\n';
    return 0;
}

int cmd_score(const std::string& model_dir, const std::string& data_root,
              const std::string& out_path, double lambda_flag, bool lambda_set,
              const std::vector<std::string>& exclude, int argc, char** argv) {
    require_artifact((fs::path(model_dir) / "model.json").string());
    require_artifact(data_root);

    ManifestWriter mw("score", argc, argv);
    TrainedPair pair = load_model(model_dir);
    const double lambda = lambda_set ? lambda_flag : pair.lambda;

    std::vector<FrameSequence> videos;
    for (auto& raw : load_dataset(data_root)) {
        if (std::find(exclude.begin(), exclude.end(), raw.video_id) != exclude.end()) continue;
        videos.push_back(preprocess(raw, pair.input_size));
    }

    std::vector<FrameScoreSeries> frame_series;
    std::vector<WindowScoreTable> window_tables;
    for (auto& seq : videos) {
        if (pair.family == "3dcae-an") {
            WindowSet ws = make_windows(seq, pair.t, 1);
            ReconErrorMatrix r = recon_errors(pair.generator.net, ws);
            frame_series.push_back(frame_scores(r));
            window_tables.push_back(
                window_scores(r, pair.generator.net, pair.discriminator.net, ws, lambda));
        } else {
            // frame-based families: per-frame reconstruction error as c_mu
            TensorF frames = frames_tensor(seq);
            FrameScoreSeries s;
            s.video_id = seq.video_id;
            s.c_mu = frame_recon_errors(pair.generator.net, frames);
            s.c_sigma.assign(s.c_mu.size(), 0.0);
            frame_series.push_back(std::move(s));
        }
    }

    const fs::path out_file(out_path);
    const fs::path out_dir = out_file.has_parent_path() ? out_file.parent_path() : fs::path(".");
    fs::create_directories(out_dir);
    write_scores_csv(frame_series, out_file.string());
    mw.add_output(out_file.string());
    if (!window_tables.empty()) {
        write_window_scores_csv(window_tables, (out_dir / "window_scores.csv").string());
        mw.add_output((out_dir / "window_scores.csv").string());
    }

    json meta;
    meta["family"] = pair.family;
    meta["T"] = pair.t;
    meta["input_size"] = pair.input_size;
    meta["lambda"] = lambda;
    meta["seed"] = pair.seed;
    meta["model_hash"] = model_fingerprint(model_dir);
    meta["dataset_hash"] = hash_directory(data_root);
    meta["protocol"] = "train on ADL-only videos; score the videos under --data";
    {
        std::ofstream f(out_dir / "scores_meta.json");
        if (!f) throw IoError("cannot write scores_meta.json under " + out_dir.string());
        f << meta.dump(2) << '\n';
    }
    mw.add_output((out_dir / "scores_meta.json").string());

    mw.j["seed"] = pair.seed;
    mw.j["model_hash"] = meta["model_hash"];
    mw.j["dataset_hash"] = meta["dataset_hash"];
    mw.write(out_dir);
    std::cout << "scored " << frame_series.size() << " videos -> " << out_file.string() << '\n';
    return 0;
}

json read_scores_meta(const fs::path& dir) {
    json meta;
    std::ifstream f(dir / "scores_meta.json");
    if (f) f >> meta;
    return meta;
}

int cmd_evaluate(const std::string& scores_dir, const std::string& labels_path,
                 const std::string& out_path, int argc, char** argv) {
    require_artifact((fs::path(scores_dir) / "scores.csv").string());
    require_artifact(labels_path);

    ManifestWriter mw("evaluate", argc, argv);
    auto scores = read_scores_csv((fs::path(scores_dir) / "scores.csv").string());
    auto labels = load_labels_csv(labels_path);
    const json meta = read_scores_meta(scores_dir);

    EvalReport report;
    report.frame_level = evaluate_frame_level(scores, labels);
    report.per_video = evaluate_frame_level_per_video(scores, labels);
    report.model_hash = meta.value("model_hash", "");
    report.dataset_hash = meta.value("dataset_hash", "");
    report.seed = meta.value("seed", std::uint64_t{0});
    report.protocol = meta.value("protocol", "");

    const int t = meta.value("T", 8);
    const double lambda = meta.value("lambda", 1.0);
    const fs::path wpath = fs::path(scores_dir) / "window_scores.csv";
    if (fs::exists(wpath)) {
        auto tables = read_window_scores_csv(wpath.string(), t, lambda);
        report.window_level = sweep_alpha(tables, labels, t);
    }

    const fs::path out_file(out_path);
    const fs::path out_dir = out_file.has_parent_path() ? out_file.parent_path() : fs::path(".");
    fs::create_directories(out_dir);
    {
        std::ofstream f(out_file);
        if (!f) throw IoError("cannot write " + out_file.string());
        f << report_to_json(report).dump(2) << '\n';
    }
    mw.add_output(out_file.string());
    mw.j["seed"] = report.seed;
    mw.write(out_dir);

    std::cout << "frame-level AUC:";
    for (const auto& [name, auc] : report.frame_level)
        std::cout << ' ' << name << '=' << format_real(auc);
    std::cout << '\n';
    return 0;
}

int cmd_sweep_alpha(const std::string& scores_dir, const std::string& labels_path,
                    const std::string& out_path, const std::string& plot_path, int argc,
                    char** argv) {
    const fs::path wpath = fs::path(scores_dir) / "window_scores.csv";
    require_artifact(wpath.string());
    require_artifact(labels_path);

    ManifestWriter mw("sweep-alpha", argc, argv);
    const json meta = read_scores_meta(scores_dir);
    const int t = meta.value("T", 8);
    auto tables = read_window_scores_csv(wpath.string(), t, meta.value("lambda", 1.0));
    auto labels = load_labels_csv(labels_path);
    auto cells = sweep_alpha(tables, labels, t);

    const fs::path out_file(out_path);
    const fs::path out_dir = out_file.has_parent_path() ? out_file.parent_path() : fs::path(".");
    fs::create_directories(out_dir);
    write_sweep_csv(cells, out_file.string());
    mw.add_output(out_file.string());
    if (!plot_path.empty()) {
        render_sweep_png(cells, plot_path);
        mw.add_output(plot_path);
    }
    mw.write(out_dir);
    std::cout << "wrote " << cells.size() << " sweep cells -> " << out_file.string() << '\n';
    return 0;
}

int cmd_inspect(const std::string& family) {
    using nn::NetworkSpec;
    std::vector<NetworkSpec> specs;
    if (family == "3dcae-an") {
        specs = {nn::make_3dcae_spec(), nn::make_3d_discriminator_spec()};
    } else if (family == "dae-an") {
        specs = {nn::make_dae_spec(), nn::make_dae_discriminator_spec()};
    } else if (family == "cae-an") {
        specs = {nn::make_cae_spec(), nn::make_cae_discriminator_spec()};
    } else {
        throw InputError("unknown family: " + family);
    }
    for (const auto& spec : specs) {
        std::cout << spec.name << "  input (";
        for (std::size_t i = 0; i < spec.input_shape.size(); ++i)
            std::cout << (i ? ", " : "") << spec.input_shape[i];
        std::cout << ")\n";
        for (const auto& [name, shape] : nn::shape_report(spec)) {
            std::cout << "  " << name << " -> (";
            for (std::size_t i = 0; i < shape.size(); ++i) std::cout << (i ? ", " : "") << shape[i];
            std::cout << ")\n";
        }
    }
    return 0;
}

int cmd_plot(const std::string& sweep_path, const std::string& out_path, int argc, char** argv) {
    require_artifact(sweep_path);
    ManifestWriter mw("plot", argc, argv);
    auto cells = read_sweep_csv(sweep_path);
    render_sweep_png(cells, out_path);
    mw.add_output(out_path);
    const fs::path out_file(out_path);
    mw.write(out_file.has_parent_path() ? out_file.parent_path() : fs::path("."));
    std::cout << "rendered " << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-class video fall detection via adversarial autoencoders"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string cfg_path, out_path, data_root, family, model_dir, scores_dir, labels_path,
        plot_path, sweep_path;
    std::vector<std::string> exclude;
    bool adl_only = false;
    double lambda_flag = 1.0;

    auto* gen = app.add_subcommand("gen-synth", "generate a synthetic labeled dataset");
    gen->add_option("--config", cfg_path, "synth config file")->required();
    gen->add_option("--out", out_path, "output dataset root")->required();

    auto* tr = app.add_subcommand("train", "train a generator/discriminator pair");
    tr->add_option("--family", family, "3dcae-an | dae-an | cae-an");
    tr->add_option("--data", data_root, "dataset root")->required();
    tr->add_option("--config", cfg_path, "train config file")->required();
    tr->add_option("--out", out_path, "model output directory")->required();
    tr->add_flag("--adl-only", adl_only, "drop videos with any fall-labeled frame");
    tr->add_option("--exclude", exclude, "video ids to hold out");

    auto* sc = app.add_subcommand("score", "compute anomaly scores for a dataset");
    sc->add_option("--model", model_dir, "trained model directory")->required();
    sc->add_option("--data", data_root, "dataset root")->required();
    sc->add_option("--out", out_path, "scores.csv output path")->required();
    auto* lam = sc->add_option("--lambda", lambda_flag, "combined-score weight (default: training lambda)");
    sc->add_option("--exclude", exclude, "video ids to skip");

    auto* ev = app.add_subcommand("evaluate", "frame- and window-level AUC report");
    ev->add_option("--scores", scores_dir, "directory holding scores.csv")->required();
    ev->add_option("--labels", labels_path, "labels.csv")->required();
    ev->add_option("--out", out_path, "report.json output path")->required();

    auto* sw = app.add_subcommand("sweep-alpha", "window-level AUC grid over alpha");
    sw->add_option("--scores", scores_dir, "directory holding window_scores.csv")->required();
    sw->add_option("--labels", labels_path, "labels.csv")->required();
    sw->add_option("--out", out_path, "sweep.csv output path")->required();
    sw->add_option("--plot", plot_path, "optional sweep.png output path");

    auto* ins = app.add_subcommand("inspect", "print per-layer output shapes");
    ins->add_option("--family", family, "3dcae-an | dae-an | cae-an")->required();

    auto* pl = app.add_subcommand("plot", "render a sweep.csv into a line chart");
    pl->add_option("--sweep", sweep_path, "sweep.csv path")->required();
    pl->add_option("--out", out_path, "output image path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitConfig : 0;
    }

    try {
        if (gen->parsed()) return cmd_gen_synth(cfg_path, out_path, argc, argv);
        if (tr->parsed())
            return cmd_train(family, data_root, cfg_path, out_path, adl_only, exclude, argc, argv);
        if (sc->parsed())
            return cmd_score(model_dir, data_root, out_path, lambda_flag, lam->count() > 0,
                             exclude, argc, argv);
        if (ev->parsed()) return cmd_evaluate(scores_dir, labels_path, out_path, argc, argv);
        if (sw->parsed())
            return cmd_sweep_alpha(scores_dir, labels_path, out_path, plot_path, argc, argv);
        if (ins->parsed()) return cmd_inspect(family);
        if (pl->parsed()) return cmd_plot(sweep_path, out_path, argc, argv);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
