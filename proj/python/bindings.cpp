#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

#include "stfall/evalkit.hpp"
#include "stfall/ingest.hpp"
#include "stfall/nn/builders.hpp"
#include "stfall/scoring.hpp"
#include "stfall/synthgen.hpp"
#include "stfall/trainer.hpp"

namespace py = pybind11;
using namespace stfall;

namespace {

nn::NetworkSpec spec_for(const std::string& family, bool discriminator) {
    if (family == "3dcae-an")
        return discriminator ? nn::make_3d_discriminator_spec() : nn::make_3dcae_spec();
    if (family == "dae-an")
        return discriminator ? nn::make_dae_discriminator_spec() : nn::make_dae_spec();
    if (family == "cae-an")
        return discriminator ? nn::make_cae_discriminator_spec() : nn::make_cae_spec();
    throw InputError("unknown family: " + family);
}

// (N, H, W) uint8 frames -> preprocessed (N, 64, 64) float32
py::array_t<float> preprocess_frames(py::array_t<std::uint8_t, py::array::c_style> frames,
                                     int size) {
    if (frames.ndim() != 3) throw InputError("expected a (N, H, W) uint8 array");
    const auto n = frames.shape(0), h = frames.shape(1), w = frames.shape(2);
    FrameSequence raw;
    raw.video_id = "array";
    for (py::ssize_t i = 0; i < n; ++i) {
        cv::Mat m(static_cast<int>(h), static_cast<int>(w), CV_8U);
        std::memcpy(m.data, frames.data(i, 0, 0), static_cast<std::size_t>(h * w));
        raw.frames.push_back(m);
    }
    FrameSequence pre = preprocess(raw, size);
    py::array_t<float> out({n, static_cast<py::ssize_t>(size), static_cast<py::ssize_t>(size)});
    for (py::ssize_t i = 0; i < n; ++i)
        for (int r = 0; r < size; ++r)
            std::memcpy(out.mutable_data(i, r, 0),
                        pre.frames[static_cast<std::size_t>(i)].ptr<float>(r),
                        sizeof(float) * static_cast<std::size_t>(size));
    return out;
}

py::object json_to_py(const nlohmann::json& j) {
    auto json_mod = py::module_::import("json");
    return json_mod.attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "one-class video fall detection via adversarial autoencoders";
    m.attr("__version__") = "0.1.0";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
    py::register_exception<EvalError>(m, "EvalError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    m.def("shape_report",
          [](const std::string& family, bool discriminator) {
              return nn::shape_report(spec_for(family, discriminator));
          },
          py::arg("family"), py::arg("discriminator") = false,
          "per-layer (name, output shape) rows for a network family");

    m.def("preprocess_frames", &preprocess_frames, py::arg("frames"), py::arg("size") = 64,
          "resize, scale to [0,1] and subtract each frame's mean");

    m.def("roc_auc", &roc_auc, py::arg("scores"), py::arg("labels"),
          "ROC-AUC via the Mann-Whitney statistic with midrank ties");

    m.def("window_labels",
          [](const std::vector<int>& frame_labels, const std::vector<int>& window_start, int t,
             int alpha) { return window_labels(frame_labels, window_start, t, alpha); },
          py::arg("frame_labels"), py::arg("window_start"), py::arg("t"), py::arg("alpha"));

    m.def("gen_dataset",
          [](const std::string& out_root, std::uint64_t seed, int num_adl_videos,
             int num_fall_videos, int frames_per_video, double noise_sigma) {
              SynthConfig cfg;
              cfg.seed = seed;
              cfg.num_adl_videos = num_adl_videos;
              cfg.num_fall_videos = num_fall_videos;
              cfg.frames_per_video = frames_per_video;
              cfg.noise_sigma = noise_sigma;
              cfg.validate();
              SynthManifest man = gen_dataset(cfg, out_root);
              py::dict d;
              d["seed"] = man.seed;
              d["dataset_hash"] = man.dataset_hash;
              py::list vids;
              for (const auto& v : man.videos) {
                  py::dict vd;
                  vd["video_id"] = v.video_id;
                  vd["n_frames"] = v.n_frames;
                  vd["fall_start"] = v.fall_start;
                  vd["fall_len"] = v.fall_len;
                  vids.append(vd);
              }
              d["videos"] = vids;
              return d;
          },
          py::arg("out_root"), py::arg("seed") = 1, py::arg("num_adl_videos") = 9,
          py::arg("num_fall_videos") = 6, py::arg("frames_per_video") = 48,
          py::arg("noise_sigma") = 2.0,
          "write a synthetic labeled dataset in the ingest layout");

    m.def("train",
          [](const std::string& data_root, const std::string& out_dir, const std::string& family,
             int max_epochs, int stride, double lambda, std::uint64_t seed, int batch_size,
             bool adl_only, int input_size) {
              TrainConfig cfg;
              cfg.family = family;
              cfg.max_epochs = max_epochs;
              cfg.stride = stride;
              cfg.lambda = lambda;
              cfg.seed = seed;
              cfg.batch_size = batch_size;
              cfg.input_size = input_size;
              cfg.validate();
              std::vector<FrameSequence> data;
              for (auto& raw : load_dataset(data_root)) {
                  if (adl_only && raw.has_fall()) continue;
                  data.push_back(preprocess(raw, cfg.input_size));
              }
              TrainResult result;
              {
                  py::gil_scoped_release release;
                  result = train(data, cfg, out_dir);
              }
              py::list hist;
              for (const auto& r : result.history.epochs) {
                  py::dict e;
                  e["epoch"] = r.epoch;
                  e["mean_recon"] = r.mean_recon;
                  e["mean_gen_adv"] = r.mean_gen_adv;
                  e["mean_disc"] = r.mean_disc;
                  e["d_real"] = r.d_real;
                  e["d_fake"] = r.d_fake;
                  hist.append(e);
              }
              return hist;
          },
          py::arg("data_root"), py::arg("out_dir"), py::arg("family") = "3dcae-an",
          py::arg("max_epochs") = 5, py::arg("stride") = 1, py::arg("lambda_") = 1.0,
          py::arg("seed") = 1, py::arg("batch_size") = 32, py::arg("adl_only") = true,
          py::arg("input_size") = 64,
          "adversarial one-class training; returns the per-epoch history");

    m.def("score",
          [](const std::string& model_dir, const std::string& data_root,
             const std::string& out_dir) {
              TrainedPair pair = load_model(model_dir);
              std::vector<FrameScoreSeries> frame_series;
              std::vector<WindowScoreTable> tables;
              {
                  py::gil_scoped_release release;
                  for (auto& raw : load_dataset(data_root)) {
                      FrameSequence seq = preprocess(raw, pair.input_size);
                      if (pair.family == "3dcae-an") {
                          WindowSet ws = make_windows(seq, pair.t, 1);
                          ReconErrorMatrix r = recon_errors(pair.generator.net, ws);
                          frame_series.push_back(frame_scores(r));
                          tables.push_back(window_scores(r, pair.generator.net,
                                                         pair.discriminator.net, ws, pair.lambda));
                      } else {
                          TensorF frames = frames_tensor(seq);
                          FrameScoreSeries s;
                          s.video_id = seq.video_id;
                          s.c_mu = frame_recon_errors(pair.generator.net, frames);
                          s.c_sigma.assign(s.c_mu.size(), 0.0);
                          frame_series.push_back(std::move(s));
                      }
                  }
                  std::filesystem::create_directories(out_dir);
                  write_scores_csv(frame_series, out_dir + "/scores.csv");
                  if (!tables.empty())
                      write_window_scores_csv(tables, out_dir + "/window_scores.csv");
              }
              return frame_series.size();
          },
          py::arg("model_dir"), py::arg("data_root"), py::arg("out_dir"),
          "score a dataset; writes scores.csv (and window_scores.csv for 3dcae-an)");

    m.def("evaluate",
          [](const std::string& scores_dir, const std::string& labels_csv, int t, double lambda) {
              auto scores = read_scores_csv(scores_dir + "/scores.csv");
              auto labels = load_labels_csv(labels_csv);
              EvalReport report;
              report.frame_level = evaluate_frame_level(scores, labels);
              report.per_video = evaluate_frame_level_per_video(scores, labels);
              if (std::filesystem::exists(scores_dir + "/window_scores.csv")) {
                  auto tables = read_window_scores_csv(scores_dir + "/window_scores.csv", t, lambda);
                  report.window_level = sweep_alpha(tables, labels, t);
              }
              return json_to_py(report_to_json(report));
          },
          py::arg("scores_dir"), py::arg("labels_csv"), py::arg("t") = 8, py::arg("lambda_") = 1.0,
          "frame- and window-level AUC report as a dict");
}
