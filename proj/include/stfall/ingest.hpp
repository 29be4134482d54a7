#pragma once

#include <map>
#include <opencv2/core.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stfall/tensor.hpp"

namespace stfall {

// One video: ordered grayscale frames plus optional per-frame fall labels
// (0 = ADL, 1 = fall). Raw sequences hold 8-bit frames at native resolution;
// preprocessed ones hold 32-bit 64x64 frames with zero per-frame mean.
struct FrameSequence {
    std::string video_id;
    std::vector<cv::Mat> frames;
    std::vector<int> labels;  // empty => unlabeled (treated as all-ADL)
    double fps = 0.0;         // 0 => unknown, metadata only
    bool preprocessed = false;

    int n() const { return static_cast<int>(frames.size()); }
    bool has_fall() const {
        for (int l : labels)
            if (l == 1) return true;
        return false;
    }
};

// All length-T windows of one preprocessed sequence, materialized as a
// (M, T, H, W, 1) tensor with window -> first-frame bookkeeping (0-based).
struct WindowSet {
    std::string source;
    int t = 8;
    int stride = 1;
    int n_frames = 0;
    TensorF windows;
    std::vector<int> window_start;

    int m() const { return static_cast<int>(window_start.size()); }
};

// Decodes `<dir>/frame_*.png` (any image format OpenCV reads) in
// lexicographic order into single-channel intensity in [0, 255].
FrameSequence load_video(const std::string& dir, const std::string& video_id);

// Resize to size x size (bilinear), divide by 255, subtract the per-frame
// scalar mean. Resulting values lie in (-1, 1) with per-frame mean ~0.
FrameSequence preprocess(const FrameSequence& raw, int size = 64);

WindowSet make_windows(const FrameSequence& seq, int t, int stride);

// Windows containing global frame j (0-based), as (window index, in-window
// position) pairs. Stride-1 window sets only.
std::vector<std::pair<int, int>> frame_coverage(const WindowSet& ws, int j);

// Stack preprocessed frames into an (N, H, W, 1) tensor (2-D net input).
TensorF frames_tensor(const FrameSequence& seq);

// labels.csv: video_id,frame_index,label with 1-based frame_index.
std::map<std::string, std::vector<int>> load_labels_csv(const std::string& path);

// Loads every video directory under root, attaching labels.csv if present.
std::vector<FrameSequence> load_dataset(const std::string& root);

}  // namespace stfall
