#pragma once

#include <string>
#include <vector>

#include "stfall/ingest.hpp"
#include "stfall/nn/network.hpp"

namespace stfall {

// Per-(window, frame) reconstruction errors R_{i,j}: squared L2 distance
// between frame j of window i and its reconstruction. Entry (i, p) covers
// global frame window_start[i] + p.
struct ReconErrorMatrix {
    std::string video_id;
    int t = 8;
    int n_frames = 0;
    std::vector<int> window_start;
    std::vector<std::vector<double>> errors;  // [window][in-window position]

    int m() const { return static_cast<int>(window_start.size()); }
    double at(int window, int global_frame) const;
};

struct FrameScoreSeries {
    std::string video_id;
    std::vector<double> c_mu;
    std::vector<double> c_sigma;
};

struct WindowScoreRow {
    int window_start = 0;
    double w_mu = 0, w_sigma = 0;
    double d_x = 0, d_rx = 0;          // raw discriminator probabilities
    double anom_dx = 0, anom_drx = 0;  // oriented: 1 - probability
    double wmu_comb_x = 0, wsig_comb_x = 0;
    double wmu_comb_rx = 0, wsig_comb_rx = 0;
};

struct WindowScoreTable {
    std::string video_id;
    int t = 8;
    double lambda = 1.0;
    std::vector<WindowScoreRow> rows;
};

// Names of the eight window-level anomaly scores, in export order.
const std::vector<std::string>& window_score_names();
double window_score_value(const WindowScoreRow& row, const std::string& name);

// Reconstruction errors from a generator run in evaluation mode.
ReconErrorMatrix recon_errors(nn::NetworkF& gen, const WindowSet& ws, int batch_size = 16);

// C_mu / C_sigma per frame, averaging over the windows that actually cover
// the frame (both video boundaries treated symmetrically). The sigma is the
// population standard deviation.
FrameScoreSeries frame_scores(const ReconErrorMatrix& r);

// W_mu / W_sigma plus discriminator and combined scores per window. All
// exported anomaly scores are oriented higher = more anomalous.
WindowScoreTable window_scores(const ReconErrorMatrix& r, nn::NetworkF& gen, nn::NetworkF& disc,
                               const WindowSet& ws, double lambda, int batch_size = 16);

// Per-frame reconstruction errors for the 2-D (frame-based) families.
std::vector<double> frame_recon_errors(nn::NetworkF& gen, const TensorF& frames,
                                       int batch_size = 64);

void write_scores_csv(const std::vector<FrameScoreSeries>& scores, const std::string& path);
std::vector<FrameScoreSeries> read_scores_csv(const std::string& path);

void write_window_scores_csv(const std::vector<WindowScoreTable>& tables, const std::string& path);
std::vector<WindowScoreTable> read_window_scores_csv(const std::string& path, int t, double lambda);

}  // namespace stfall
