#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "stfall/evalkit.hpp"

using namespace stfall;

namespace {

// O(n^2) pairwise Mann-Whitney count with half credit for ties
double auc_pairwise(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0;
    std::int64_t pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            ++pairs;
            if (s[i] > s[j]) wins += 1.0;
            else if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("roc_auc matches hand examples") {
    CHECK(roc_auc({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
    CHECK(roc_auc({0.1, 0.2, 0.9, 0.8}, {1, 1, 0, 0}) == 0.0);
    CHECK(roc_auc({0.3, 0.3, 0.3, 0.3}, {1, 1, 0, 0}) == 0.5);
}

TEST_CASE("roc_auc rejects degenerate inputs") {
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), EvalError);
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {0, 0}), EvalError);
    CHECK_THROWS_AS(roc_auc({0.1}, {0, 1}), InputError);
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {0, 2}), InputError);
}

TEST_CASE("roc_auc equals the pairwise count on random instances") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 20 + static_cast<int>(rng() % 60);
        std::vector<double> s;
        std::vector<int> y;
        bool heavy_ties = rep % 3 == 0;
        for (int i = 0; i < n; ++i) {
            double v = u(rng);
            if (heavy_ties) v = std::round(v * 4) / 4;  // only 5 distinct values
            s.push_back(v);
            y.push_back(static_cast<int>(rng() % 2));
        }
        y[0] = 1;
        y[1] = 0;
        CHECK(std::abs(roc_auc(s, y) - auc_pairwise(s, y)) <= 1e-12);

        // complement identity holds exactly under midrank ties
        std::vector<double> neg(s.size());
        std::transform(s.begin(), s.end(), neg.begin(), [](double v) { return -v; });
        CHECK(roc_auc(s, y) + roc_auc(neg, y) == 1.0);
    }
}

TEST_CASE("roc_auc is invariant to strictly increasing transforms") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        s.push_back(u(rng));
        y.push_back(static_cast<int>(rng() % 2));
    }
    y[0] = 1;
    y[1] = 0;
    std::vector<double> t(s.size());
    std::transform(s.begin(), s.end(), t.begin(), [](double v) { return std::exp(3 * v) - 7; });
    CHECK(std::abs(roc_auc(s, y) - roc_auc(t, y)) <= 1e-12);
}

TEST_CASE("window_labels implements the alpha rule") {
    const int t = 8;
    std::vector<int> labels(40, 0);
    std::fill(labels.begin() + 16, labels.begin() + 24, 1);  // one run of 8 falls
    std::vector<int> starts;
    for (int i = 0; i + t <= 40; ++i) starts.push_back(i);

    auto wl8 = window_labels(labels, starts, t, 8);
    CHECK(std::count(wl8.begin(), wl8.end(), 1) == 1);
    CHECK(wl8[16] == 1);

    auto wl1 = window_labels(labels, starts, t, 1);
    CHECK(std::count(wl1.begin(), wl1.end(), 1) == 15);  // 8 + 8 - 1 windows touch the run

    std::vector<int> adl(40, 0);
    for (int alpha = 1; alpha <= t; ++alpha) {
        auto wl = window_labels(adl, starts, t, alpha);
        CHECK(std::count(wl.begin(), wl.end(), 1) == 0);
    }

    CHECK_THROWS_AS(window_labels(labels, starts, t, 0), InputError);
    CHECK_THROWS_AS(window_labels(labels, starts, t, 9), InputError);
}

TEST_CASE("positive windows shrink monotonically in alpha") {
    std::mt19937_64 rng(17);
    const int t = 8;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<int> labels(50, 0);
        const int start = 5 + static_cast<int>(rng() % 25);
        const int len = 3 + static_cast<int>(rng() % 11);
        std::fill(labels.begin() + start, labels.begin() + start + len, 1);
        std::vector<int> starts;
        for (int i = 0; i + t <= 50; ++i) starts.push_back(i);
        for (int alpha = 1; alpha < t; ++alpha) {
            auto lo = window_labels(labels, starts, t, alpha);
            auto hi = window_labels(labels, starts, t, alpha + 1);
            for (std::size_t i = 0; i < lo.size(); ++i)
                CHECK(hi[i] <= lo[i]);  // subset property
        }
    }
}

TEST_CASE("frame-level pooling equals concatenated evaluation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<FrameScoreSeries> scores;
    std::map<std::string, std::vector<int>> labels;
    std::vector<double> all_mu;
    std::vector<int> all_lab;
    for (int v = 0; v < 3; ++v) {
        FrameScoreSeries s;
        s.video_id = "v" + std::to_string(v);
        std::vector<int> lab;
        for (int i = 0; i < 30; ++i) {
            s.c_mu.push_back(u(rng));
            s.c_sigma.push_back(u(rng));
            lab.push_back(static_cast<int>(rng() % 2));
            all_mu.push_back(s.c_mu.back());
            all_lab.push_back(lab.back());
        }
        labels[s.video_id] = lab;
        scores.push_back(s);
    }
    auto fl = evaluate_frame_level(scores, labels);
    CHECK(std::abs(fl.at("c_mu") - roc_auc(all_mu, all_lab)) <= 1e-12);
    CHECK(fl.at("c_mu") >= 0.0);
    CHECK(fl.at("c_mu") <= 1.0);
}

TEST_CASE("unlabeled videos count as all-ADL in evaluation") {
    FrameScoreSeries pos{"fall", {2, 3}, {1, 1}};
    FrameScoreSeries neg{"adl", {0, 1}, {0, 0}};
    std::map<std::string, std::vector<int>> labels{{"fall", {1, 1}}};  // adl absent
    auto fl = evaluate_frame_level({pos, neg}, labels);
    CHECK(fl.at("c_mu") == 1.0);
}

TEST_CASE("sweep_alpha records undefined cells instead of failing") {
    WindowScoreTable table;
    table.video_id = "adl";
    table.t = 8;
    for (int i = 0; i < 10; ++i) {
        WindowScoreRow r;
        r.window_start = i;
        r.w_mu = 0.1 * i;
        table.rows.push_back(r);
    }
    std::map<std::string, std::vector<int>> labels{{"adl", std::vector<int>(17, 0)}};
    auto cells = sweep_alpha({table}, labels, 8);
    CHECK(cells.size() == 64);
    for (const auto& c : cells) {
        CHECK_FALSE(c.defined);
        CHECK(c.n_pos == 0);
        CHECK(c.n_neg == 10);
    }
}

TEST_CASE("sweep cells with alpha below the fixed fall count share labels and AUC") {
    // every fall window contains exactly 4 fall frames
    WindowScoreTable table;
    table.video_id = "v";
    table.t = 8;
    std::vector<int> labels(38, 0);  // windows at 0 and 30, t=8 -> 38 frames
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 20; ++i) {
        WindowScoreRow r;
        r.window_start = (i % 2 == 0) ? 0 : 30;  // two label contexts
        r.w_mu = u(rng);
        table.rows.push_back(r);
    }
    std::fill(labels.begin() + 30, labels.begin() + 34, 1);
    std::map<std::string, std::vector<int>> lm{{"v", labels}};
    auto cells = sweep_alpha({table}, lm, 8);
    double auc1 = -1, auc4 = -1;
    for (const auto& c : cells) {
        if (c.score_name != "w_mu") continue;
        if (c.alpha == 1) auc1 = c.auc;
        if (c.alpha == 4) auc4 = c.auc;
        if (c.alpha <= 4) CHECK(c.defined);
        else CHECK_FALSE(c.defined);
    }
    CHECK(auc1 == auc4);
}

TEST_CASE("sweep csv round-trips including undefined cells") {
    std::vector<SweepCell> cells;
    for (int a = 1; a <= 3; ++a) {
        SweepCell c;
        c.score_name = "w_mu";
        c.alpha = a;
        c.defined = a != 2;
        c.auc = 0.25 * a;
        c.n_pos = a;
        c.n_neg = 10 - a;
        cells.push_back(c);
    }
    const std::string path = "/tmp/stfall_test_sweep.csv";
    write_sweep_csv(cells, path);
    auto back = read_sweep_csv(path);
    REQUIRE(back.size() == cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CHECK(back[i].score_name == cells[i].score_name);
        CHECK(back[i].alpha == cells[i].alpha);
        CHECK(back[i].defined == cells[i].defined);
        if (cells[i].defined) CHECK(back[i].auc == cells[i].auc);
        CHECK(back[i].n_pos == cells[i].n_pos);
        CHECK(back[i].n_neg == cells[i].n_neg);
    }

    render_sweep_png(back, "/tmp/stfall_test_sweep.png");
    CHECK(std::filesystem::exists("/tmp/stfall_test_sweep.png"));
}
