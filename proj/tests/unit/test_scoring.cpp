#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stfall/nn/builders.hpp"
#include "stfall/scoring.hpp"

using namespace stfall;

namespace {

ReconErrorMatrix random_matrix(std::mt19937_64& rng, int n, int t) {
    std::uniform_real_distribution<double> u(0, 5);
    ReconErrorMatrix r;
    r.video_id = "rand";
    r.t = t;
    r.n_frames = n;
    for (int s = 0; s + t <= n; ++s) {
        r.window_start.push_back(s);
        std::vector<double> row(static_cast<std::size_t>(t));
        for (auto& v : row) v = u(rng);
        r.errors.push_back(row);
    }
    return r;
}

std::pair<double, double> brute_mean_std(const std::vector<double>& v) {
    double mu = 0;
    for (double x : v) mu += x;
    mu /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return {mu, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

TEST_CASE("frame_scores hand example at a start-boundary frame") {
    // frame index 2 (0-based), covered by windows starting at 0, 1, 2
    ReconErrorMatrix r;
    r.video_id = "ex";
    r.t = 8;
    r.n_frames = 20;
    for (int s = 0; s + 8 <= 20; ++s) {
        r.window_start.push_back(s);
        r.errors.emplace_back(8, 0.0);
    }
    r.errors[0][2] = 0.1;
    r.errors[1][1] = 0.2;
    r.errors[2][0] = 0.3;
    FrameScoreSeries fs = frame_scores(r);
    CHECK(fs.c_mu[2] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(fs.c_sigma[2] == doctest::Approx(std::sqrt((0.01 + 0.0 + 0.01) / 3.0)).epsilon(1e-9));
    CHECK(fs.c_sigma[2] == doctest::Approx(0.0816496580927726).epsilon(1e-9));

    // first and last frames sit in exactly one window, so sigma is 0 there
    CHECK(fs.c_sigma[0] == 0.0);
    CHECK(fs.c_sigma[19] == 0.0);
    CHECK(fs.c_mu[0] == r.errors[0][0]);
    CHECK(fs.c_mu[19] == r.errors.back()[7]);
}

TEST_CASE("frame and window scores match a brute-force recomputation") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        const int t = 2 + static_cast<int>(rng() % 8);
        const int n = t + static_cast<int>(rng() % 30);
        ReconErrorMatrix r = random_matrix(rng, n, t);

        FrameScoreSeries fs = frame_scores(r);
        for (int j = 0; j < n; ++j) {
            // brute force: re-enumerate every window containing frame j
            std::vector<double> vals;
            for (std::size_t i = 0; i < r.window_start.size(); ++i) {
                const int s = r.window_start[i];
                if (j >= s && j < s + t) vals.push_back(r.errors[i][static_cast<std::size_t>(j - s)]);
            }
            REQUIRE_FALSE(vals.empty());
            auto [mu, sigma] = brute_mean_std(vals);
            CHECK(fs.c_mu[static_cast<std::size_t>(j)] ==
                  doctest::Approx(mu).epsilon(1e-9));
            CHECK(fs.c_sigma[static_cast<std::size_t>(j)] ==
                  doctest::Approx(sigma).epsilon(1e-9).scale(std::max(1.0, sigma)));
        }

        // W_mu / W_sigma per window, plus the grand-mean consistency check
        double grand_r = 0, grand_w = 0;
        for (std::size_t i = 0; i < r.errors.size(); ++i) {
            auto [mu, sigma] = brute_mean_std(r.errors[i]);
            grand_w += mu;
            for (double v : r.errors[i]) grand_r += v;
        }
        grand_r /= static_cast<double>(r.errors.size() * static_cast<std::size_t>(t));
        grand_w /= static_cast<double>(r.errors.size());
        CHECK(grand_r == doctest::Approx(grand_w).epsilon(1e-9));
    }
}

TEST_CASE("scores scale linearly with the error matrix") {
    std::mt19937_64 rng(7);
    ReconErrorMatrix r = random_matrix(rng, 25, 8);
    ReconErrorMatrix r3 = r;
    for (auto& row : r3.errors)
        for (auto& v : row) v *= 3.0;
    FrameScoreSeries a = frame_scores(r), b = frame_scores(r3);
    for (std::size_t j = 0; j < a.c_mu.size(); ++j) {
        CHECK(b.c_mu[j] == doctest::Approx(3.0 * a.c_mu[j]).epsilon(1e-12));
        CHECK(b.c_sigma[j] == doctest::Approx(3.0 * a.c_sigma[j]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("ReconErrorMatrix::at rejects non-covering frames") {
    std::mt19937_64 rng(9);
    ReconErrorMatrix r = random_matrix(rng, 20, 8);
    CHECK(r.at(0, 0) == r.errors[0][0]);
    CHECK(r.at(2, 5) == r.errors[2][3]);
    CHECK_THROWS_AS(r.at(0, 8), InputError);
    CHECK_THROWS_AS(r.at(3, 0), InputError);
}

TEST_CASE("recon_errors agrees with a manual generator pass") {
    // miniature 3DCAE so the test stays fast
    nn::NetworkSpec spec = nn::make_3dcae_spec(4, 8, 8, 4, 2);
    nn::Network<float> gen(spec, 77);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<float> u(-1, 1);
    WindowSet ws;
    ws.source = "mini";
    ws.t = 4;
    ws.stride = 1;
    ws.n_frames = 9;
    ws.windows = TensorF({6, 4, 8, 8, 1});
    for (std::int64_t i = 0; i < ws.windows.size(); ++i) ws.windows[i] = u(rng);
    // overlapping windows must share frame content for the bookkeeping to mean anything
    for (int i = 1; i < 6; ++i)
        for (int p = 0; p < 3; ++p)
            std::copy_n(ws.windows.data() + ((i - 1) * 4 + p + 1) * 64, 64,
                        ws.windows.data() + (static_cast<std::int64_t>(i) * 4 + p) * 64);
    for (int i = 0; i < 6; ++i) ws.window_start.push_back(i);

    ReconErrorMatrix r = recon_errors(gen, ws, 4);
    TensorF rec = gen.forward(ws.windows, false);
    for (int i = 0; i < 6; ++i) {
        for (int p = 0; p < 4; ++p) {
            double expect = 0;
            for (int k = 0; k < 64; ++k) {
                const std::int64_t off = (static_cast<std::int64_t>(i) * 4 + p) * 64 + k;
                const double d = static_cast<double>(ws.windows[off]) - static_cast<double>(rec[off]);
                expect += d * d;
            }
            CHECK(r.errors[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)] ==
                  doctest::Approx(expect).epsilon(1e-9).scale(std::max(1.0, expect)));
            CHECK(r.errors[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)] >= 0.0);
        }
    }
}

TEST_CASE("window_scores composes discriminator and reconstruction terms") {
    nn::NetworkSpec gspec = nn::make_3dcae_spec(4, 8, 8, 4, 2);
    nn::NetworkSpec dspec = nn::make_3d_discriminator_spec(4, 8, 8, 4, 2);
    nn::Network<float> gen(gspec, 5);
    nn::Network<float> disc(dspec, 6);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> u(-1, 1);
    WindowSet ws;
    ws.source = "mini";
    ws.t = 4;
    ws.stride = 1;
    ws.n_frames = 8;
    ws.windows = TensorF({5, 4, 8, 8, 1});
    for (std::int64_t i = 0; i < ws.windows.size(); ++i) ws.windows[i] = u(rng);
    for (int i = 0; i < 5; ++i) ws.window_start.push_back(i);

    const double lambda = 2.5;
    ReconErrorMatrix r = recon_errors(gen, ws, 3);
    WindowScoreTable table = window_scores(r, gen, disc, ws, lambda, 3);
    REQUIRE(table.rows.size() == 5);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        auto [mu, sigma] = brute_mean_std(r.errors[i]);
        CHECK(row.w_mu == doctest::Approx(mu).epsilon(1e-9));
        CHECK(row.w_sigma == doctest::Approx(sigma).epsilon(1e-9).scale(1.0));
        CHECK(row.d_x > 0.0);
        CHECK(row.d_x < 1.0);
        CHECK(row.d_rx > 0.0);
        CHECK(row.d_rx < 1.0);
        CHECK(row.anom_dx == doctest::Approx(1.0 - row.d_x).epsilon(1e-12));
        CHECK(row.wmu_comb_x == doctest::Approx(lambda * row.w_mu + 1.0 - row.d_x).epsilon(1e-12));
        CHECK(row.wsig_comb_rx ==
              doctest::Approx(lambda * row.w_sigma + 1.0 - row.d_rx).epsilon(1e-12));
    }

    // ranking by the combined score is unchanged when d_x shifts by a constant
    auto rank_of = [&](double shift) {
        std::vector<std::size_t> order(table.rows.size());
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double sa = lambda * table.rows[a].w_mu + 1.0 - (table.rows[a].d_x + shift);
            const double sb = lambda * table.rows[b].w_mu + 1.0 - (table.rows[b].d_x + shift);
            return sa < sb;
        });
        return order;
    };
    CHECK(rank_of(0.0) == rank_of(0.17));
}

TEST_CASE("scores csv round-trips") {
    std::vector<FrameScoreSeries> scores;
    scores.push_back({"v1", {0.5, 1.25}, {0.0, 0.125}});
    scores.push_back({"v2", {2.0}, {0.0}});
    write_scores_csv(scores, "/tmp/stfall_test_scores.csv");
    auto back = read_scores_csv("/tmp/stfall_test_scores.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].video_id == "v1");
    CHECK(back[0].c_mu == scores[0].c_mu);
    CHECK(back[0].c_sigma == scores[0].c_sigma);
    CHECK(back[1].c_mu == scores[1].c_mu);
}
