#include "stfall/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <sstream>

namespace stfall {

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw InputError("roc_auc: scores/labels size mismatch");
    std::size_t n_pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw InputError("roc_auc: labels must be 0 or 1");
        n_pos += static_cast<std::size_t>(l);
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw EvalError("degenerate label set");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // midranks over tie groups
    double rank_sum_pos = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += midrank;
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<int> window_labels(const std::vector<int>& frame_labels,
                               const std::vector<int>& window_start, int t, int alpha) {
    if (alpha < 1 || alpha > t)
        throw InputError("alpha must be in [1, T], got " + std::to_string(alpha));
    std::vector<int> out;
    out.reserve(window_start.size());
    for (int start : window_start) {
        if (start < 0 || start + t > static_cast<int>(frame_labels.size()))
            throw InputError("window extends past the label sequence");
        int falls = 0;
        for (int p = 0; p < t; ++p) falls += frame_labels[static_cast<std::size_t>(start + p)];
        out.push_back(falls >= alpha ? 1 : 0);
    }
    return out;
}

std::vector<int> window_labels(const std::vector<int>& frame_labels, const WindowSet& ws, int alpha) {
    if (static_cast<int>(frame_labels.size()) != ws.n_frames)
        throw InputError("window_labels: labels length mismatch");
    return window_labels(frame_labels, ws.window_start, ws.t, alpha);
}

namespace {

const std::vector<int>& labels_for(const std::map<std::string, std::vector<int>>& labels,
                                   const std::string& video_id, std::size_t n,
                                   std::vector<int>& scratch) {
    auto it = labels.find(video_id);
    if (it != labels.end()) {
        if (it->second.size() != n)
            throw InputError("label length mismatch for video " + video_id);
        return it->second;
    }
    scratch.assign(n, 0);  // absent from labels.csv => all ADL
    return scratch;
}

}  // namespace

std::map<std::string, double> evaluate_frame_level(
    const std::vector<FrameScoreSeries>& scores,
    const std::map<std::string, std::vector<int>>& labels) {
    std::vector<double> mu, sigma;
    std::vector<int> pooled;
    std::vector<int> scratch;
    for (const auto& s : scores) {
        const auto& lab = labels_for(labels, s.video_id, s.c_mu.size(), scratch);
        mu.insert(mu.end(), s.c_mu.begin(), s.c_mu.end());
        sigma.insert(sigma.end(), s.c_sigma.begin(), s.c_sigma.end());
        pooled.insert(pooled.end(), lab.begin(), lab.end());
    }
    return {{"c_mu", roc_auc(mu, pooled)}, {"c_sigma", roc_auc(sigma, pooled)}};
}

std::map<std::string, std::map<std::string, double>> evaluate_frame_level_per_video(
    const std::vector<FrameScoreSeries>& scores,
    const std::map<std::string, std::vector<int>>& labels) {
    std::map<std::string, std::map<std::string, double>> out;
    std::vector<int> scratch;
    for (const auto& s : scores) {
        const auto& lab = labels_for(labels, s.video_id, s.c_mu.size(), scratch);
        const bool has_pos = std::find(lab.begin(), lab.end(), 1) != lab.end();
        const bool has_neg = std::find(lab.begin(), lab.end(), 0) != lab.end();
        if (!has_pos || !has_neg) continue;
        out[s.video_id] = {{"c_mu", roc_auc(s.c_mu, lab)}, {"c_sigma", roc_auc(s.c_sigma, lab)}};
    }
    return out;
}

std::vector<SweepCell> sweep_alpha(const std::vector<WindowScoreTable>& tables,
                                   const std::map<std::string, std::vector<int>>& labels, int t) {
    std::vector<SweepCell> cells;
    std::vector<int> scratch;
    for (const auto& name : window_score_names()) {
        for (int alpha = 1; alpha <= t; ++alpha) {
            std::vector<double> pooled_scores;
            std::vector<int> pooled_labels;
            for (const auto& table : tables) {
                std::vector<int> starts;
                starts.reserve(table.rows.size());
                std::size_t n_frames = 0;
                for (const auto& r : table.rows) {
                    starts.push_back(r.window_start);
                    n_frames = std::max(n_frames, static_cast<std::size_t>(r.window_start + t));
                }
                const auto& lab = labels_for(labels, table.video_id, n_frames, scratch);
                auto wl = window_labels(lab, starts, t, alpha);
                for (std::size_t i = 0; i < table.rows.size(); ++i) {
                    pooled_scores.push_back(window_score_value(table.rows[i], name));
                    pooled_labels.push_back(wl[i]);
                }
            }
            SweepCell cell;
            cell.score_name = name;
            cell.alpha = alpha;
            for (int l : pooled_labels) (l ? cell.n_pos : cell.n_neg)++;
            if (cell.n_pos > 0 && cell.n_neg > 0) {
                cell.defined = true;
                cell.auc = roc_auc(pooled_scores, pooled_labels);
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["frame_level"] = report.frame_level;
    j["window_level"] = nlohmann::json::array();
    for (const auto& c : report.window_level) {
        nlohmann::json cell;
        cell["score_name"] = c.score_name;
        cell["alpha"] = c.alpha;
        if (c.defined) cell["auc"] = c.auc;
        else cell["auc"] = nullptr;
        cell["n_pos"] = c.n_pos;
        cell["n_neg"] = c.n_neg;
        j["window_level"].push_back(cell);
    }
    j["per_video"] = report.per_video;
    j["metadata"] = {{"model_hash", report.model_hash},
                     {"dataset_hash", report.dataset_hash},
                     {"seed", report.seed},
                     {"protocol", report.protocol}};
    return j;
}

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "score_name,alpha,auc,n_pos,n_neg\n";
    for (const auto& c : cells) {
        f << c.score_name << ',' << c.alpha << ',';
        if (c.defined) f << format_real(c.auc);
        f << ',' << c.n_pos << ',' << c.n_neg << '\n';
    }
}

std::vector<SweepCell> read_sweep_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    std::vector<SweepCell> out;
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string name, alpha_s, auc_s, pos_s, neg_s;
        if (!std::getline(ss, name, ',') || !std::getline(ss, alpha_s, ',') ||
            !std::getline(ss, auc_s, ',') || !std::getline(ss, pos_s, ',') ||
            !std::getline(ss, neg_s))
            throw InputError("malformed sweep row: " + line);
        SweepCell c;
        c.score_name = name;
        c.alpha = std::stoi(alpha_s);
        c.defined = !auc_s.empty();
        if (c.defined) c.auc = std::stod(auc_s);
        c.n_pos = std::stoi(pos_s);
        c.n_neg = std::stoi(neg_s);
        out.push_back(c);
    }
    return out;
}

void render_sweep_png(const std::vector<SweepCell>& cells, const std::string& path) {
    const int w = 880, h = 560;
    const int ml = 70, mr = 220, mt = 40, mb = 60;
    cv::Mat img(h, w, CV_8UC3, cv::Scalar(255, 255, 255));

    int max_alpha = 1;
    for (const auto& c : cells) max_alpha = std::max(max_alpha, c.alpha);

    auto px = [&](double alpha) {
        return ml + static_cast<int>((alpha - 1.0) / std::max(1, max_alpha - 1) * (w - ml - mr));
    };
    auto py = [&](double auc) { return mt + static_cast<int>((1.0 - auc) * (h - mt - mb)); };

    // axes and grid
    cv::line(img, {ml, mt}, {ml, h - mb}, {0, 0, 0}, 1);
    cv::line(img, {ml, h - mb}, {w - mr, h - mb}, {0, 0, 0}, 1);
    for (int g = 0; g <= 10; g += 2) {
        const double auc = g / 10.0;
        cv::line(img, {ml - 4, py(auc)}, {w - mr, py(auc)}, {230, 230, 230}, 1);
        cv::putText(img, format_real(auc), {8, py(auc) + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                    {0, 0, 0}, 1, cv::LINE_AA);
    }
    for (int a = 1; a <= max_alpha; ++a)
        cv::putText(img, std::to_string(a), {px(a) - 4, h - mb + 22}, cv::FONT_HERSHEY_SIMPLEX,
                    0.45, {0, 0, 0}, 1, cv::LINE_AA);
    cv::putText(img, "alpha (fall frames per window)", {ml + 120, h - 18},
                cv::FONT_HERSHEY_SIMPLEX, 0.5, {0, 0, 0}, 1, cv::LINE_AA);
    cv::putText(img, "AUC", {10, mt - 14}, cv::FONT_HERSHEY_SIMPLEX, 0.5, {0, 0, 0}, 1,
                cv::LINE_AA);

    const std::vector<cv::Scalar> palette = {
        {180, 119, 31},  {14, 127, 255},  {44, 160, 44},  {40, 39, 214},
        {189, 103, 148}, {75, 86, 140},   {194, 119, 227}, {127, 127, 127},
    };
    const auto& names = window_score_names();
    for (std::size_t s = 0; s < names.size(); ++s) {
        const cv::Scalar color = palette[s % palette.size()];
        cv::Point prev(-1, -1);
        for (const auto& c : cells) {
            if (c.score_name != names[s] || !c.defined) continue;
            const cv::Point pt(px(c.alpha), py(c.auc));
            cv::circle(img, pt, 3, color, cv::FILLED, cv::LINE_AA);
            if (prev.x >= 0) cv::line(img, prev, pt, color, 2, cv::LINE_AA);
            prev = pt;
        }
        const int ly = mt + 20 * static_cast<int>(s);
        cv::line(img, {w - mr + 16, ly}, {w - mr + 46, ly}, color, 2);
        cv::putText(img, names[s], {w - mr + 54, ly + 5}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                    {0, 0, 0}, 1, cv::LINE_AA);
    }

    if (!cv::imwrite(path, img)) throw IoError("cannot write plot: " + path);
}

}  // namespace stfall
