#include <doctest.h>

#include <filesystem>

#include "framelab/config.hpp"

using namespace framelab;

TEST_CASE("key=value parsing with comments and whitespace") {
    auto cfg = KeyValueConfig::from_lines({
        "# a comment",
        "rl.steps = 600",
        "rl.lr=0.01   # trailing comment",
        "",
        "name = run one",
    });
    CHECK(cfg.get_int("rl.steps", 0) == 600);
    CHECK(cfg.get_double("rl.lr", 0.0) == doctest::Approx(0.01));
    CHECK(cfg.get_string("name", "") == "run one");
    CHECK(cfg.get_int("missing", 7) == 7);
}

TEST_CASE("malformed lines and values are rejected") {
    CHECK_THROWS_AS(KeyValueConfig::from_lines({"no equals sign"}), std::invalid_argument);
    auto cfg = KeyValueConfig::from_lines({"x = abc"});
    CHECK_THROWS_AS(cfg.get_double("x", 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cfg.get_bool("x", false), std::invalid_argument);
}

TEST_CASE("unknown keys are reported sorted") {
    auto cfg = KeyValueConfig::from_lines({"b = 1", "a = 2", "known = 3"});
    auto unknown = cfg.unknown_keys({"known"});
    REQUIRE(unknown.size() == 2);
    CHECK(unknown[0] == "a");
    CHECK(unknown[1] == "b");
}

TEST_CASE("manifest round-trip") {
    auto dir = std::filesystem::temp_directory_path() / "framelab_cfg_test";
    std::filesystem::remove_all(dir);
    KeyValueConfig cfg;
    cfg.set("seed", "41");
    cfg.set("rl.steps", "5");
    CHECK_FALSE(has_manifest(dir.string()));
    write_manifest(dir.string(), "train-rl", cfg);
    REQUIRE(has_manifest(dir.string()));
    auto back = read_manifest(dir.string());
    CHECK(back.get_string("command", "") == "train-rl");
    CHECK(back.get_u64("seed", 0) == 41);
    CHECK(back.get_int("rl.steps", 0) == 5);
    CHECK(back.get_string("code_version", "") == code_version());
    std::filesystem::remove_all(dir);
}
