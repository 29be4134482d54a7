#include "stfall/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stfall {

namespace {

TensorF slice_rows(const TensorF& pool, std::int64_t begin, std::int64_t end) {
    std::vector<std::int64_t> shape = pool.shape();
    const std::int64_t row = pool.size() / pool.dim(0);
    shape[0] = end - begin;
    TensorF out(shape);
    std::copy_n(pool.data() + begin * row, (end - begin) * row, out.data());
    return out;
}

std::vector<double> disc_probs(nn::NetworkF& disc, const TensorF& pool, int batch_size) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(pool.dim(0)));
    for (std::int64_t at = 0; at < pool.dim(0); at += batch_size) {
        const std::int64_t end = std::min<std::int64_t>(pool.dim(0), at + batch_size);
        TensorF p = disc.forward(slice_rows(pool, at, end), false);
        for (std::int64_t i = 0; i < p.size(); ++i) out.push_back(p[i]);
    }
    return out;
}

std::pair<double, double> mean_and_pop_std(const std::vector<double>& v) {
    double mu = 0;
    for (double x : v) mu += x;
    mu /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return {mu, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

double ReconErrorMatrix::at(int window, int global_frame) const {
    const int p = global_frame - window_start[static_cast<std::size_t>(window)];
    if (p < 0 || p >= t) throw InputError("R entry undefined: window does not contain frame");
    return errors[static_cast<std::size_t>(window)][static_cast<std::size_t>(p)];
}

const std::vector<std::string>& window_score_names() {
    static const std::vector<std::string> names = {
        "w_mu",         "w_sigma",      "anom_dx",      "anom_drx",
        "wmu_comb_x",   "wsig_comb_x",  "wmu_comb_rx",  "wsig_comb_rx",
    };
    return names;
}

double window_score_value(const WindowScoreRow& row, const std::string& name) {
    if (name == "w_mu") return row.w_mu;
    if (name == "w_sigma") return row.w_sigma;
    if (name == "anom_dx") return row.anom_dx;
    if (name == "anom_drx") return row.anom_drx;
    if (name == "wmu_comb_x") return row.wmu_comb_x;
    if (name == "wsig_comb_x") return row.wsig_comb_x;
    if (name == "wmu_comb_rx") return row.wmu_comb_rx;
    if (name == "wsig_comb_rx") return row.wsig_comb_rx;
    throw InputError("unknown window score: " + name);
}

ReconErrorMatrix recon_errors(nn::NetworkF& gen, const WindowSet& ws, int batch_size) {
    if (ws.windows.empty()) throw InputError("recon_errors: empty window set");
    const std::int64_t frame_px = ws.windows.size() / (ws.windows.dim(0) * ws.t);

    ReconErrorMatrix out;
    out.video_id = ws.source;
    out.t = ws.t;
    out.n_frames = ws.n_frames;
    out.window_start = ws.window_start;
    out.errors.resize(static_cast<std::size_t>(ws.m()));

    for (std::int64_t at = 0; at < ws.windows.dim(0); at += batch_size) {
        const std::int64_t end = std::min<std::int64_t>(ws.windows.dim(0), at + batch_size);
        TensorF in = slice_rows(ws.windows, at, end);
        TensorF rec = gen.forward(in, false);
        if (!rec.same_shape(in)) throw InputError("recon_errors: generator output shape mismatch");
        for (std::int64_t i = 0; i < end - at; ++i) {
            auto& row = out.errors[static_cast<std::size_t>(at + i)];
            row.resize(static_cast<std::size_t>(ws.t));
            for (int p = 0; p < ws.t; ++p) {
                const std::int64_t off = (i * ws.t + p) * frame_px;
                double s = 0;
                for (std::int64_t k = 0; k < frame_px; ++k) {
                    const double d = static_cast<double>(in[off + k]) - static_cast<double>(rec[off + k]);
                    s += d * d;
                }
                row[static_cast<std::size_t>(p)] = s;
            }
        }
    }
    return out;
}

FrameScoreSeries frame_scores(const ReconErrorMatrix& r) {
    FrameScoreSeries out;
    out.video_id = r.video_id;
    out.c_mu.resize(static_cast<std::size_t>(r.n_frames));
    out.c_sigma.resize(static_cast<std::size_t>(r.n_frames));

    std::vector<std::vector<double>> per_frame(static_cast<std::size_t>(r.n_frames));
    for (int i = 0; i < r.m(); ++i) {
        const int start = r.window_start[static_cast<std::size_t>(i)];
        for (int p = 0; p < r.t; ++p)
            per_frame[static_cast<std::size_t>(start + p)].push_back(
                r.errors[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)]);
    }
    for (int j = 0; j < r.n_frames; ++j) {
        const auto& v = per_frame[static_cast<std::size_t>(j)];
        if (v.empty()) throw InputError("frame_scores: frame not covered by any window");
        auto [mu, sigma] = mean_and_pop_std(v);
        out.c_mu[static_cast<std::size_t>(j)] = mu;
        out.c_sigma[static_cast<std::size_t>(j)] = sigma;
    }
    return out;
}

WindowScoreTable window_scores(const ReconErrorMatrix& r, nn::NetworkF& gen, nn::NetworkF& disc,
                               const WindowSet& ws, double lambda, int batch_size) {
    if (r.m() != ws.m()) throw InputError("window_scores: R matrix / window set mismatch");
    WindowScoreTable out;
    out.video_id = ws.source;
    out.t = ws.t;
    out.lambda = lambda;

    std::vector<double> d_x = disc_probs(disc, ws.windows, batch_size);

    // reconstructions for D(R(x)), batched to bound memory
    std::vector<double> d_rx;
    d_rx.reserve(static_cast<std::size_t>(ws.m()));
    for (std::int64_t at = 0; at < ws.windows.dim(0); at += batch_size) {
        const std::int64_t end = std::min<std::int64_t>(ws.windows.dim(0), at + batch_size);
        TensorF rec = gen.forward(slice_rows(ws.windows, at, end), false);
        TensorF p = disc.forward(rec, false);
        for (std::int64_t i = 0; i < p.size(); ++i) d_rx.push_back(p[i]);
    }

    for (int i = 0; i < r.m(); ++i) {
        auto [mu, sigma] = mean_and_pop_std(r.errors[static_cast<std::size_t>(i)]);
        WindowScoreRow row;
        row.window_start = r.window_start[static_cast<std::size_t>(i)];
        row.w_mu = mu;
        row.w_sigma = sigma;
        row.d_x = d_x[static_cast<std::size_t>(i)];
        row.d_rx = d_rx[static_cast<std::size_t>(i)];
        row.anom_dx = 1.0 - row.d_x;
        row.anom_drx = 1.0 - row.d_rx;
        row.wmu_comb_x = lambda * mu + row.anom_dx;
        row.wsig_comb_x = lambda * sigma + row.anom_dx;
        row.wmu_comb_rx = lambda * mu + row.anom_drx;
        row.wsig_comb_rx = lambda * sigma + row.anom_drx;
        out.rows.push_back(row);
    }
    return out;
}

std::vector<double> frame_recon_errors(nn::NetworkF& gen, const TensorF& frames, int batch_size) {
    const std::int64_t frame_px = frames.size() / frames.dim(0);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(frames.dim(0)));
    for (std::int64_t at = 0; at < frames.dim(0); at += batch_size) {
        const std::int64_t end = std::min<std::int64_t>(frames.dim(0), at + batch_size);
        TensorF in = slice_rows(frames, at, end);
        TensorF rec = gen.forward(in, false);
        for (std::int64_t i = 0; i < end - at; ++i) {
            double s = 0;
            for (std::int64_t k = 0; k < frame_px; ++k) {
                const double d = static_cast<double>(in[i * frame_px + k]) -
                                 static_cast<double>(rec[i * frame_px + k]);
                s += d * d;
            }
            out.push_back(s);
        }
    }
    return out;
}

void write_scores_csv(const std::vector<FrameScoreSeries>& scores, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "video_id,frame_index,c_mu,c_sigma\n";
    for (const auto& s : scores)
        for (std::size_t j = 0; j < s.c_mu.size(); ++j)
            f << s.video_id << ',' << (j + 1) << ',' << format_real(s.c_mu[j]) << ','
              << format_real(s.c_sigma[j]) << '\n';
}

std::vector<FrameScoreSeries> read_scores_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    std::vector<FrameScoreSeries> out;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string vid, idx_s, mu_s, sig_s;
        if (!std::getline(ss, vid, ',') || !std::getline(ss, idx_s, ',') ||
            !std::getline(ss, mu_s, ',') || !std::getline(ss, sig_s))
            throw InputError("malformed scores row: " + line);
        if (out.empty() || out.back().video_id != vid) {
            out.push_back(FrameScoreSeries{vid, {}, {}});
        }
        out.back().c_mu.push_back(std::stod(mu_s));
        out.back().c_sigma.push_back(std::stod(sig_s));
    }
    return out;
}

void write_window_scores_csv(const std::vector<WindowScoreTable>& tables, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "video_id,window_start,w_mu,w_sigma,d_x,d_rx,anom_dx,anom_drx,"
         "wmu_comb_x,wsig_comb_x,wmu_comb_rx,wsig_comb_rx\n";
    for (const auto& t : tables)
        for (const auto& r : t.rows)
            f << t.video_id << ',' << (r.window_start + 1) << ',' << format_real(r.w_mu) << ','
              << format_real(r.w_sigma) << ',' << format_real(r.d_x) << ',' << format_real(r.d_rx)
              << ',' << format_real(r.anom_dx) << ',' << format_real(r.anom_drx) << ','
              << format_real(r.wmu_comb_x) << ',' << format_real(r.wsig_comb_x) << ','
              << format_real(r.wmu_comb_rx) << ',' << format_real(r.wsig_comb_rx) << '\n';
}

std::vector<WindowScoreTable> read_window_scores_csv(const std::string& path, int t, double lambda) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    std::vector<WindowScoreTable> out;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 12) throw InputError("malformed window scores row: " + line);
        if (out.empty() || out.back().video_id != cells[0]) {
            WindowScoreTable table;
            table.video_id = cells[0];
            table.t = t;
            table.lambda = lambda;
            out.push_back(std::move(table));
        }
        WindowScoreRow r;
        r.window_start = std::stoi(cells[1]) - 1;
        r.w_mu = std::stod(cells[2]);
        r.w_sigma = std::stod(cells[3]);
        r.d_x = std::stod(cells[4]);
        r.d_rx = std::stod(cells[5]);
        r.anom_dx = std::stod(cells[6]);
        r.anom_drx = std::stod(cells[7]);
        r.wmu_comb_x = std::stod(cells[8]);
        r.wsig_comb_x = std::stod(cells[9]);
        r.wmu_comb_rx = std::stod(cells[10]);
        r.wsig_comb_rx = std::stod(cells[11]);
        out.back().rows.push_back(r);
    }
    return out;
}

}  // namespace stfall
