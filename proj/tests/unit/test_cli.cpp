#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("STFALL_BIN");
    REQUIRE(b != nullptr);
    return b;
}

int run(const std::string& args, const std::string& log) {
    const std::string cmd = bin() + " " + args + " >" + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const std::string kRoot = "/tmp/stfall_test_cli";

}  // namespace

TEST_CASE("cli end-to-end pipeline and exit codes") {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    const char* cfg_dir = std::getenv("STFALL_CONFIG_DIR");
    REQUIRE(cfg_dir != nullptr);
    fs::copy_file(fs::path(cfg_dir) / "smoke_synth.cfg", kRoot + "/synth.cfg");
    fs::copy_file(fs::path(cfg_dir) / "smoke_train.cfg", kRoot + "/train.cfg");

    SUBCASE("malformed config key exits 2 naming the key") {
        std::ofstream(kRoot + "/bad.cfg") << "frames_per_vido = 48\n";
        CHECK(run("gen-synth --config " + kRoot + "/bad.cfg --out " + kRoot + "/bad_data",
                  kRoot + "/bad.log") == 2);
        CHECK(slurp(kRoot + "/bad.log").find("frames_per_vido") != std::string::npos);
    }

    SUBCASE("missing artifacts exit 3 naming the path") {
        CHECK(run("evaluate --scores " + kRoot + "/nowhere --labels " + kRoot +
                      "/nowhere/labels.csv --out " + kRoot + "/r.json",
                  kRoot + "/missing.log") == 3);
        CHECK(slurp(kRoot + "/missing.log").find("nowhere") != std::string::npos);
        CHECK(run("train --data " + kRoot + "/nowhere --config " + kRoot +
                      "/train.cfg --out " + kRoot + "/m",
                  kRoot + "/missing2.log") == 3);
    }

    SUBCASE("full pipeline runs with exit 0 at each stage") {
        REQUIRE(run("gen-synth --config " + kRoot + "/synth.cfg --out " + kRoot + "/data",
                    kRoot + "/gen.log") == 0);
        CHECK(fs::exists(kRoot + "/data/manifest.json"));
        CHECK(fs::exists(kRoot + "/data/run_manifest.json"));

        // rerun reproduces the same dataset hash
        nlohmann::json m1, m2;
        std::ifstream(kRoot + "/data/manifest.json") >> m1;
        REQUIRE(run("gen-synth --config " + kRoot + "/synth.cfg --out " + kRoot + "/data",
                    kRoot + "/gen2.log") == 0);
        std::ifstream(kRoot + "/data/manifest.json") >> m2;
        CHECK(m1.at("dataset_hash") == m2.at("dataset_hash"));

        REQUIRE(run("train --family 3dcae-an --data " + kRoot + "/data --config " + kRoot +
                        "/train.cfg --out " + kRoot + "/model --adl-only",
                    kRoot + "/train.log") == 0);
        CHECK(fs::exists(kRoot + "/model/model.json"));
        CHECK(fs::exists(kRoot + "/model/history.csv"));
        CHECK(fs::exists(kRoot + "/model/run_manifest.json"));

        REQUIRE(run("score --model " + kRoot + "/model --data " + kRoot + "/data --out " +
                        kRoot + "/scores/scores.csv",
                    kRoot + "/score.log") == 0);
        CHECK(fs::exists(kRoot + "/scores/scores.csv"));
        CHECK(fs::exists(kRoot + "/scores/window_scores.csv"));
        CHECK(fs::exists(kRoot + "/scores/scores_meta.json"));

        REQUIRE(run("evaluate --scores " + kRoot + "/scores --labels " + kRoot +
                        "/data/labels.csv --out " + kRoot + "/report.json",
                    kRoot + "/eval.log") == 0);
        nlohmann::json report;
        std::ifstream(kRoot + "/report.json") >> report;
        CHECK(report.at("frame_level").contains("c_mu"));
        CHECK(report.at("frame_level").contains("c_sigma"));
        CHECK(report.at("window_level").size() == 8 * 4);  // 8 scores x alpha 1..T

        REQUIRE(run("sweep-alpha --scores " + kRoot + "/scores --labels " + kRoot +
                        "/data/labels.csv --out " + kRoot + "/sweep.csv --plot " + kRoot +
                        "/sweep.png",
                    kRoot + "/sweep.log") == 0);
        CHECK(fs::exists(kRoot + "/sweep.csv"));
        CHECK(fs::exists(kRoot + "/sweep.png"));

        REQUIRE(run("plot --sweep " + kRoot + "/sweep.csv --out " + kRoot + "/sweep2.png",
                    kRoot + "/plot.log") == 0);
        CHECK(fs::exists(kRoot + "/sweep2.png"));
    }

    SUBCASE("inspect prints the eight generator shape rows") {
        REQUIRE(run("inspect --family 3dcae-an", kRoot + "/inspect.log") == 0);
        const std::string out = slurp(kRoot + "/inspect.log");
        for (const char* row : {"(8, 64, 64, 16)", "(8, 32, 32, 8)", "(4, 16, 16, 8)",
                                "(2, 8, 8, 8)", "(8, 64, 64, 1)"})
            CHECK(out.find(row) != std::string::npos);
        // encoder + decoder + output = 8 generator rows
        std::size_t rows = 0;
        for (const char* name : {"enc1", "enc2", "enc3", "enc4", "dec1", "dec2", "dec3", "out"})
            if (out.find(std::string("  ") + name + " ->") != std::string::npos) ++rows;
        CHECK(rows == 8);
        CHECK(run("inspect --family nope", kRoot + "/inspect2.log") == 2);
    }

    SUBCASE("STFALL_SEED overrides the config seed") {
        const std::string cmd = "STFALL_SEED=77 " + bin() + " gen-synth --config " + kRoot +
                                "/synth.cfg --out " + kRoot + "/data77 >" + kRoot +
                                "/seed.log 2>&1";
        REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
        nlohmann::json m;
        std::ifstream(kRoot + "/data77/run_manifest.json") >> m;
        CHECK(m.at("seed").get<std::uint64_t>() == 77);
    }
}
