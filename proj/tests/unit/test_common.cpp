#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "stfall/common.hpp"

using namespace stfall;

TEST_CASE("format_real round-trips float values") {
    for (double v : {0.0, 1.0, 0.5, 1.0 / 3.0, 1e-7, 12345.678, -3.25e10}) {
        const float f = static_cast<float>(v);
        CHECK(std::stof(format_real(f)) == f);
    }
    CHECK(format_real(0.5) == "0.5");
    CHECK(format_real(2.0) == "2");
}

TEST_CASE("kv parser handles comments, blanks and errors") {
    auto kv = parse_kv_text("# comment\nseed = 42\n\nfamily = 3dcae-an  \n");
    REQUIRE(kv.size() == 2);
    CHECK(kv[0].first == "seed");
    CHECK(kv[0].second == "42");
    CHECK(kv[1].second == "3dcae-an");

    CHECK_THROWS_AS(parse_kv_text("no_equals_here\n"), InputError);
    CHECK_THROWS_AS(parse_kv_text(" = value\n"), InputError);
}

TEST_CASE("fnv1a is stable and order-sensitive") {
    Fnv1a a, b;
    a.update(std::string("abc"));
    b.update(std::string("acb"));
    CHECK(a.hex() != b.hex());

    Fnv1a c;
    c.update(std::string("abc"));
    CHECK(a.hex() == c.hex());
    CHECK(a.hex().size() == 16);
}

TEST_CASE("hash_file and hash_directory detect content changes") {
    const std::string dir = "/tmp/stfall_test_hash";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    { std::ofstream(dir + "/a.txt") << "one"; }
    { std::ofstream(dir + "/b.txt") << "two"; }
    const std::string h1 = hash_directory(dir);
    CHECK(h1 == hash_directory(dir));
    { std::ofstream(dir + "/b.txt") << "TWO"; }
    CHECK(h1 != hash_directory(dir));
    CHECK(hash_file(dir + "/a.txt") == hash_file(dir + "/a.txt"));
    CHECK_THROWS_AS(hash_file(dir + "/missing.txt"), IoError);
}
