#include "stfall/synthgen.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <random>

namespace fs = std::filesystem;

namespace stfall {

void SynthConfig::validate() const {
    if (num_adl_videos < 0 || num_fall_videos < 0)
        throw InputError("synth config: video counts must be >= 0");
    if (frames_per_video < 32) throw InputError("synth config: frames_per_video must be >= 32");
    if (fall_duration < 3 || fall_duration > 13)
        throw InputError("synth config: fall_duration must be in [3, 13]");
    if (lying_tail < 0) throw InputError("synth config: lying_tail must be >= 0");
    if (noise_sigma < 0) throw InputError("synth config: noise_sigma must be >= 0");
    if (blob_width < 2 || blob_height < blob_width)
        throw InputError("synth config: blob must be taller than wide");
    if (canvas < 16 || blob_height >= canvas)
        throw InputError("synth config: blob does not fit the canvas");
    if (walk_speed <= 0) throw InputError("synth config: walk_speed must be > 0");
}

SynthConfig synth_config_from_file(const std::string& path) {
    SynthConfig cfg;
    for (const auto& [key, value] : parse_kv_file(path)) {
        try {
            if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "num_adl_videos") cfg.num_adl_videos = std::stoi(value);
            else if (key == "num_fall_videos") cfg.num_fall_videos = std::stoi(value);
            else if (key == "frames_per_video") cfg.frames_per_video = std::stoi(value);
            else if (key == "canvas") cfg.canvas = std::stoi(value);
            else if (key == "blob_width") cfg.blob_width = std::stoi(value);
            else if (key == "blob_height") cfg.blob_height = std::stoi(value);
            else if (key == "walk_speed") cfg.walk_speed = std::stod(value);
            else if (key == "fall_duration") cfg.fall_duration = std::stoi(value);
            else if (key == "lying_tail") cfg.lying_tail = std::stoi(value);
            else if (key == "noise_sigma") cfg.noise_sigma = std::stod(value);
            else if (key == "furniture") cfg.furniture = (value == "true" || value == "1");
            else throw InputError("unknown synth config key: " + key);
        } catch (const std::invalid_argument&) {
            throw InputError("bad value for synth config key: " + key);
        }
    }
    cfg.validate();
    return cfg;
}

namespace {

constexpr float kBackground = 40.0f;
constexpr float kFurniture = 90.0f;
constexpr float kPerson = 220.0f;

std::uint64_t video_seed(const SynthConfig& cfg, bool fall, int index) {
    Fnv1a h;
    const std::uint64_t s = cfg.seed;
    h.update(&s, sizeof(s));
    const int kind = fall ? 1 : 0;
    h.update(&kind, sizeof(kind));
    h.update(&index, sizeof(index));
    return h.digest();
}

struct Scene {
    cv::Mat background;  // CV_32F canvas with furniture baked in

    explicit Scene(const SynthConfig& cfg, std::mt19937_64& rng) {
        background = cv::Mat(cfg.canvas, cfg.canvas, CV_32F, cv::Scalar(kBackground));
        if (cfg.furniture) {
            std::uniform_int_distribution<int> xs(2, cfg.canvas / 2 - 4);
            // two static blocks against the back wall
            for (int i = 0; i < 2; ++i) {
                const int w = 6 + static_cast<int>(rng() % 5);
                const int h = 6 + static_cast<int>(rng() % 7);
                const int x = (i == 0) ? xs(rng) : cfg.canvas / 2 + xs(rng);
                const int y = cfg.canvas - 2 - h;
                cv::rectangle(background, cv::Rect(x, y, w, h), cv::Scalar(kFurniture), cv::FILLED);
            }
        }
    }
};

// Person blob at angle theta from vertical (radians), centered at (cx, cy).
void draw_person(cv::Mat& img, double cx, double cy, double theta, const SynthConfig& cfg) {
    const double hw = cfg.blob_width / 2.0;
    const double hh = cfg.blob_height / 2.0;
    const double c = std::cos(theta), s = std::sin(theta);
    // local rect corners (x along width, y along height), rotated by theta
    const cv::Point2d corners[4] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
    cv::Point pts[4];
    for (int i = 0; i < 4; ++i) {
        const double x = corners[i].x * c - corners[i].y * s;
        const double y = corners[i].x * s + corners[i].y * c;
        pts[i] = cv::Point(static_cast<int>(std::lround(cx + x)), static_cast<int>(std::lround(cy + y)));
    }
    cv::fillConvexPoly(img, pts, 4, cv::Scalar(kPerson));
}

cv::Mat finish_frame(const cv::Mat& f32, const SynthConfig& cfg, std::mt19937_64& noise_rng) {
    cv::Mat noisy = f32.clone();
    if (cfg.noise_sigma > 0) {
        std::normal_distribution<float> n(0.0f, static_cast<float>(cfg.noise_sigma));
        for (int r = 0; r < noisy.rows; ++r) {
            float* p = noisy.ptr<float>(r);
            for (int c = 0; c < noisy.cols; ++c) p[c] += n(noise_rng);
        }
    }
    cv::Mat out;
    cv::min(cv::max(noisy, 0.0f), 255.0f, noisy);
    noisy.convertTo(out, CV_8U);
    return out;
}

struct Walk {
    double x;        // person center x
    int dir;         // +1 rightward, -1 leftward
    int lead_empty;  // frames before the person enters
    int pause_at;    // step count at which the person pauses
    int pause_len;
};

Walk plan_walk(const SynthConfig& cfg, std::mt19937_64& rng) {
    Walk w;
    w.dir = (rng() % 2 == 0) ? 1 : -1;
    w.x = (w.dir > 0) ? -cfg.blob_height / 2.0 : cfg.canvas + cfg.blob_height / 2.0;
    w.lead_empty = 3 + static_cast<int>(rng() % 5);
    w.pause_at = 6 + static_cast<int>(rng() % 8);
    w.pause_len = 3 + static_cast<int>(rng() % 5);
    return w;
}

}  // namespace

FrameSequence gen_adl_video(const SynthConfig& cfg, int index) {
    cfg.validate();
    std::mt19937_64 rng(video_seed(cfg, false, index));
    Scene scene(cfg, rng);
    Walk walk = plan_walk(cfg, rng);
    std::mt19937_64 noise_rng(video_seed(cfg, false, index) ^ 0x9e3779b97f4a7c15ULL);

    FrameSequence seq;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "adl_%02d", index);
    seq.video_id = idbuf;
    const double floor_y = cfg.canvas - 2.0;
    const double cy = floor_y - cfg.blob_height / 2.0;
    int steps = 0;
    int paused = 0;
    for (int f = 0; f < cfg.frames_per_video; ++f) {
        cv::Mat frame = scene.background.clone();
        const bool entered = f >= walk.lead_empty;
        const bool on_canvas = walk.x > -cfg.blob_height && walk.x < cfg.canvas + cfg.blob_height;
        if (entered && on_canvas) {
            draw_person(frame, walk.x, cy, 0.0, cfg);
            if (steps >= walk.pause_at && paused < walk.pause_len) {
                ++paused;  // standing still
            } else {
                walk.x += walk.dir * cfg.walk_speed;
                ++steps;
            }
        }
        seq.frames.push_back(finish_frame(frame, cfg, noise_rng));
        seq.labels.push_back(0);
    }
    return seq;
}

FrameSequence gen_fall_video(const SynthConfig& cfg, int index) {
    cfg.validate();
    std::mt19937_64 rng(video_seed(cfg, true, index));
    Scene scene(cfg, rng);
    Walk walk = plan_walk(cfg, rng);
    std::mt19937_64 noise_rng(video_seed(cfg, true, index) ^ 0x9e3779b97f4a7c15ULL);

    FrameSequence seq;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "fall_%02d", index);
    seq.video_id = idbuf;

    const int n = cfg.frames_per_video;
    // Only the collapse itself carries the fall label; the person then lies
    // on the floor (label 0) through the last frame, like a real recording.
    // lying_tail is the minimum time spent down before the clip can end.
    const int min_onset = 6;
    const int max_onset = n - cfg.fall_duration - cfg.lying_tail;
    if (max_onset < min_onset)
        throw InputError("synth config: video too short for a fall event");
    std::uniform_int_distribution<int> onset_d(min_onset, max_onset);
    const int onset = onset_d(rng);

    const double floor_y = cfg.canvas - 2.0;
    const double cy_stand = floor_y - cfg.blob_height / 2.0;
    const double cy_lying = floor_y - cfg.blob_width / 2.0;

    // the person is in view the whole clip, pacing between the walls
    const double margin = cfg.blob_height / 2.0 + 2.0;
    std::uniform_real_distribution<double> x0(margin, cfg.canvas - margin);
    walk.x = x0(rng);

    for (int f = 0; f < n; ++f) {
        cv::Mat frame = scene.background.clone();
        int label = 0;
        if (f < onset) {
            draw_person(frame, walk.x, cy_stand, 0.0, cfg);
            walk.x += walk.dir * cfg.walk_speed;
            if (walk.x < margin || walk.x > cfg.canvas - margin) {
                walk.x = std::clamp(walk.x, margin, cfg.canvas - margin);
                walk.dir = -walk.dir;
            }
        } else if (f < onset + cfg.fall_duration) {
            // collapse from vertical to horizontal
            const double u = static_cast<double>(f - onset + 1) / cfg.fall_duration;
            const double theta = u * CV_PI / 2.0;
            const double cy = cy_stand + u * (cy_lying - cy_stand);
            const double cx = std::clamp(walk.x + walk.dir * u * cfg.blob_height * 0.6,
                                         margin, cfg.canvas - margin);
            draw_person(frame, cx, cy, theta, cfg);
            label = 1;
        } else {
            // lying still through the end of the clip (not a fall label)
            const double cx = std::clamp(walk.x + walk.dir * cfg.blob_height * 0.6,
                                         margin, cfg.canvas - margin);
            draw_person(frame, cx, cy_lying, CV_PI / 2.0, cfg);
        }
        seq.frames.push_back(finish_frame(frame, cfg, noise_rng));
        seq.labels.push_back(label);
    }
    return seq;
}

SynthManifest gen_dataset(const SynthConfig& cfg, const std::string& out_root) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(out_root, ec);
    if (ec || !fs::is_directory(out_root)) throw IoError("cannot create output root: " + out_root);

    SynthManifest manifest;
    manifest.seed = cfg.seed;

    auto write_video = [&](const FrameSequence& seq) {
        const fs::path dir = fs::path(out_root) / seq.video_id;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create video directory: " + dir.string());
        for (int f = 0; f < seq.n(); ++f) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%06d.png", f + 1);
            if (!cv::imwrite((dir / name).string(), seq.frames[static_cast<std::size_t>(f)]))
                throw IoError("cannot write frame: " + (dir / name).string());
        }
        SynthVideoInfo info;
        info.video_id = seq.video_id;
        info.n_frames = seq.n();
        for (int f = 0; f < seq.n(); ++f) {
            if (seq.labels[static_cast<std::size_t>(f)] == 1) {
                if (info.fall_start < 0) info.fall_start = f;
                ++info.fall_len;
            }
        }
        manifest.videos.push_back(info);
        return seq.labels;
    };

    std::vector<std::pair<std::string, std::vector<int>>> all_labels;
    for (int i = 0; i < cfg.num_adl_videos; ++i) {
        FrameSequence seq = gen_adl_video(cfg, i);
        all_labels.emplace_back(seq.video_id, write_video(seq));
    }
    for (int i = 0; i < cfg.num_fall_videos; ++i) {
        FrameSequence seq = gen_fall_video(cfg, i);
        all_labels.emplace_back(seq.video_id, write_video(seq));
    }

    {
        std::ofstream f(fs::path(out_root) / "labels.csv");
        if (!f) throw IoError("cannot write labels.csv under " + out_root);
        f << "video_id,frame_index,label\n";
        for (const auto& [vid, labels] : all_labels)
            for (std::size_t i = 0; i < labels.size(); ++i)
                f << vid << ',' << (i + 1) << ',' << labels[i] << '\n';
    }

    // hash only the dataset payload (frames + labels), not manifest files
    // from this or earlier runs
    {
        Fnv1a h;
        h.update(hash_file((fs::path(out_root) / "labels.csv").string()));
        for (const auto& v : manifest.videos) {
            h.update(v.video_id);
            h.update(hash_directory((fs::path(out_root) / v.video_id).string()));
        }
        manifest.dataset_hash = h.hex();
    }

    nlohmann::json j;
    j["seed"] = manifest.seed;
    j["dataset_hash"] = manifest.dataset_hash;
    j["videos"] = nlohmann::json::array();
    for (const auto& v : manifest.videos) {
        j["videos"].push_back({{"video_id", v.video_id},
                               {"n_frames", v.n_frames},
                               {"fall_start", v.fall_start},
                               {"fall_len", v.fall_len}});
    }
    std::ofstream mf(fs::path(out_root) / "manifest.json");
    if (!mf) throw IoError("cannot write manifest.json under " + out_root);
    mf << j.dump(2) << '\n';

    return manifest;
}

}  // namespace stfall
