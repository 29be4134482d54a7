#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stfall/ingest.hpp"
#include "stfall/scoring.hpp"

namespace stfall {

// ROC-AUC as the Mann-Whitney statistic with midrank tie handling; higher
// score = more anomalous = positive class. Throws EvalError on a
// single-class label set.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Window ground truth under the alpha rule: a window is a fall iff it
// contains at least alpha fall-labeled frames (alpha in [1, T]).
std::vector<int> window_labels(const std::vector<int>& frame_labels,
                               const std::vector<int>& window_start, int t, int alpha);
std::vector<int> window_labels(const std::vector<int>& frame_labels, const WindowSet& ws, int alpha);

// Frame-level AUC per score type, pooled over all videos. Labels are keyed
// by video_id; videos absent from the map count as all-ADL.
std::map<std::string, double> evaluate_frame_level(
    const std::vector<FrameScoreSeries>& scores,
    const std::map<std::string, std::vector<int>>& labels);

// Per-video frame-level AUCs for diagnostics; single-class videos are skipped.
std::map<std::string, std::map<std::string, double>> evaluate_frame_level_per_video(
    const std::vector<FrameScoreSeries>& scores,
    const std::map<std::string, std::vector<int>>& labels);

struct SweepCell {
    std::string score_name;
    int alpha = 1;
    bool defined = false;  // false when the window labels are single-class
    double auc = 0;
    int n_pos = 0;
    int n_neg = 0;
};

// Full grid over the eight window-level scores and alpha in 1..T, pooled
// over all videos. Undefined cells are recorded, not errors.
std::vector<SweepCell> sweep_alpha(const std::vector<WindowScoreTable>& tables,
                                   const std::map<std::string, std::vector<int>>& labels, int t);

struct EvalReport {
    std::map<std::string, double> frame_level;
    std::vector<SweepCell> window_level;
    std::map<std::string, std::map<std::string, double>> per_video;
    std::string model_hash;
    std::string dataset_hash;
    std::uint64_t seed = 0;
    std::string protocol;
};

nlohmann::json report_to_json(const EvalReport& report);

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path);
std::vector<SweepCell> read_sweep_csv(const std::string& path);

// Line chart of AUC vs alpha, one line per score, rendered to a PNG.
void render_sweep_png(const std::vector<SweepCell>& cells, const std::string& path);

}  // namespace stfall
