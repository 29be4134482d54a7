#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stfall/ingest.hpp"

namespace stfall {

// Deterministic synthetic "privacy-preserving" video generator: a bright
// person-blob walking through a dim room, with fall videos collapsing the
// blob from vertical to horizontal.
struct SynthConfig {
    std::uint64_t seed = 1;
    int num_adl_videos = 9;
    int num_fall_videos = 6;
    int frames_per_video = 48;  // >= 32
    int canvas = 64;            // square frame edge, pre-resize
    int blob_width = 6;
    int blob_height = 18;
    double walk_speed = 1.0;   // pixels/frame
    int fall_duration = 10;   // frames, in [3, 13]
    int lying_tail = 10;      // minimum frames spent lying after the collapse
    double noise_sigma = 2.0; // additive Gaussian pixel noise, pre-quantization
    bool furniture = true;

    void validate() const;
};

SynthConfig synth_config_from_file(const std::string& path);

struct SynthVideoInfo {
    std::string video_id;
    int n_frames = 0;
    int fall_start = -1;  // 0-based first fall-labeled frame, -1 for ADL
    int fall_len = 0;
};

struct SynthManifest {
    std::uint64_t seed = 0;
    std::vector<SynthVideoInfo> videos;
    std::string dataset_hash;
};

FrameSequence gen_adl_video(const SynthConfig& cfg, int index);
FrameSequence gen_fall_video(const SynthConfig& cfg, int index);

// Writes the ingest layout (frame dirs + labels.csv) plus manifest.json.
SynthManifest gen_dataset(const SynthConfig& cfg, const std::string& out_root);

}  // namespace stfall
