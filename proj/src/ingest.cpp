#include "stfall/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <sstream>

namespace fs = std::filesystem;

namespace stfall {

namespace {

cv::Mat to_intensity(const cv::Mat& img, const std::string& file) {
    if (img.empty()) throw InputError("undecodable frame: " + file);
    cv::Mat gray;
    if (img.channels() == 1) {
        gray = img;
    } else {
        // plain channel average, not perceptual luminance
        std::vector<cv::Mat> ch;
        cv::split(img, ch);
        cv::Mat acc = cv::Mat::zeros(img.size(), CV_32F);
        for (auto& c : ch) {
            cv::Mat f;
            c.convertTo(f, CV_32F);
            acc += f;
        }
        acc /= static_cast<float>(ch.size());
        acc.convertTo(gray, CV_8U);
    }
    if (gray.depth() == CV_16U) {
        cv::Mat g8;
        gray.convertTo(g8, CV_8U, 1.0 / 257.0);
        return g8;
    }
    if (gray.depth() != CV_8U) {
        cv::Mat g8;
        gray.convertTo(g8, CV_8U);
        return g8;
    }
    return gray.clone();
}

bool looks_like_image(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".pgm" ||
           ext == ".tif" || ext == ".tiff";
}

}  // namespace

FrameSequence load_video(const std::string& dir, const std::string& video_id) {
    if (!fs::is_directory(dir)) throw InputError("missing video directory: " + dir);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && looks_like_image(e.path())) files.push_back(e.path().string());
    if (files.empty()) throw InputError("no image frames in directory: " + dir);
    std::sort(files.begin(), files.end());

    FrameSequence seq;
    seq.video_id = video_id;
    seq.frames.reserve(files.size());
    for (const auto& f : files) {
        cv::Mat img = cv::imread(f, cv::IMREAD_UNCHANGED);
        seq.frames.push_back(to_intensity(img, f));
    }
    return seq;
}

FrameSequence preprocess(const FrameSequence& raw, int size) {
    FrameSequence out;
    out.video_id = raw.video_id;
    out.labels = raw.labels;
    out.fps = raw.fps;
    out.preprocessed = true;
    out.frames.reserve(raw.frames.size());
    for (const auto& frame : raw.frames) {
        cv::Mat f;
        frame.convertTo(f, CV_32F);
        cv::Mat resized;
        cv::resize(f, resized, cv::Size(size, size), 0, 0, cv::INTER_LINEAR);
        resized /= 255.0f;
        const double mean = cv::mean(resized)[0];
        resized -= static_cast<float>(mean);
        out.frames.push_back(resized);
    }
    return out;
}

WindowSet make_windows(const FrameSequence& seq, int t, int stride) {
    const int n = seq.n();
    if (t < 1 || stride < 1) throw InputError("make_windows: t and stride must be >= 1");
    if (n < t) throw InputError("sequence shorter than window: N=" + std::to_string(n) +
                                " T=" + std::to_string(t));
    if (!seq.preprocessed) throw InputError("make_windows: sequence must be preprocessed");
    const int h = seq.frames[0].rows;
    const int w = seq.frames[0].cols;
    const int m = (n - t) / stride + 1;

    WindowSet ws;
    ws.source = seq.video_id;
    ws.t = t;
    ws.stride = stride;
    ws.n_frames = n;
    ws.windows = TensorF({m, t, h, w, 1});
    ws.window_start.resize(static_cast<std::size_t>(m));
    const std::int64_t frame_sz = static_cast<std::int64_t>(h) * w;
    for (int i = 0; i < m; ++i) {
        ws.window_start[static_cast<std::size_t>(i)] = i * stride;
        for (int p = 0; p < t; ++p) {
            const cv::Mat& fr = seq.frames[static_cast<std::size_t>(i * stride + p)];
            float* dst = ws.windows.data() + (static_cast<std::int64_t>(i) * t + p) * frame_sz;
            for (int r = 0; r < h; ++r)
                std::copy_n(fr.ptr<float>(r), w, dst + static_cast<std::int64_t>(r) * w);
        }
    }
    return ws;
}

std::vector<std::pair<int, int>> frame_coverage(const WindowSet& ws, int j) {
    if (ws.stride != 1) throw InputError("frame_coverage requires stride 1");
    if (j < 0 || j >= ws.n_frames)
        throw InputError("frame index out of range: " + std::to_string(j));
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < ws.m(); ++i) {
        const int start = ws.window_start[static_cast<std::size_t>(i)];
        if (j >= start && j < start + ws.t) out.emplace_back(i, j - start);
    }
    return out;
}

TensorF frames_tensor(const FrameSequence& seq) {
    if (!seq.preprocessed) throw InputError("frames_tensor: sequence must be preprocessed");
    const int n = seq.n();
    const int h = seq.frames[0].rows;
    const int w = seq.frames[0].cols;
    TensorF out({n, h, w, 1});
    const std::int64_t frame_sz = static_cast<std::int64_t>(h) * w;
    for (int i = 0; i < n; ++i) {
        const cv::Mat& fr = seq.frames[static_cast<std::size_t>(i)];
        float* dst = out.data() + i * frame_sz;
        for (int r = 0; r < h; ++r)
            std::copy_n(fr.ptr<float>(r), w, dst + static_cast<std::int64_t>(r) * w);
    }
    return out;
}

std::map<std::string, std::vector<int>> load_labels_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open labels file: " + path);
    std::map<std::string, std::vector<int>> labels;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("video_id", 0) == 0) continue;  // header
        }
        std::istringstream ss(line);
        std::string vid, idx_s, lab_s;
        if (!std::getline(ss, vid, ',') || !std::getline(ss, idx_s, ',') ||
            !std::getline(ss, lab_s))
            throw InputError("malformed labels row: " + line);
        const int idx = std::stoi(idx_s);  // 1-based on disk
        const int lab = std::stoi(lab_s);
        if (idx < 1) throw InputError("labels frame_index must be 1-based: " + line);
        if (lab != 0 && lab != 1) throw InputError("label must be 0 or 1: " + line);
        auto& v = labels[vid];
        if (static_cast<int>(v.size()) < idx) v.resize(static_cast<std::size_t>(idx), 0);
        v[static_cast<std::size_t>(idx - 1)] = lab;
    }
    return labels;
}

std::vector<FrameSequence> load_dataset(const std::string& root) {
    if (!fs::is_directory(root)) throw InputError("missing dataset root: " + root);
    std::map<std::string, std::vector<int>> labels;
    const auto labels_path = fs::path(root) / "labels.csv";
    if (fs::exists(labels_path)) labels = load_labels_csv(labels_path.string());

    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) ids.push_back(e.path().filename().string());
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) throw InputError("dataset root has no video directories: " + root);

    std::vector<FrameSequence> out;
    for (const auto& id : ids) {
        FrameSequence seq = load_video((fs::path(root) / id).string(), id);
        auto it = labels.find(id);
        if (it != labels.end()) {
            if (static_cast<int>(it->second.size()) != seq.n())
                throw InputError("labels length mismatch for video " + id);
            seq.labels = it->second;
        }
        out.push_back(std::move(seq));
    }
    return out;
}

}  // namespace stfall
