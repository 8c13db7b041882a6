#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "visa/config.hpp"
#include "visa/errors.hpp"

using namespace visa;

namespace {

// Writes content to a temp file and removes it when the test scope ends.
struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = "/tmp/visa_config_test_" + std::to_string(counter++) + ".cfg";
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("config file parsing handles comments, blanks, and spacing") {
    TempFile f(
        "# a comment line\n"
        "env = point_reach_wall\n"
        "\n"
        "batch=64          # trailing comment\n"
        "  gamma   =   0.9\n"
        "hidden = 32,32\n");
    auto kv = read_config_file(f.path);
    CHECK(kv.at("env") == "point_reach_wall");
    CHECK(kv.at("batch") == "64");
    CHECK(kv.at("gamma") == "0.9");
    CHECK(kv.at("hidden") == "32,32");
    CHECK(kv.size() == 4);
}

TEST_CASE("config file parsing rejects malformed input") {
    {
        TempFile f("env point_reach\n");  // no '='
        CHECK_THROWS_AS(read_config_file(f.path), ConfigError);
    }
    {
        TempFile f("batch = 64\nbatch = 128\n");  // duplicate
        CHECK_THROWS_AS(read_config_file(f.path), ConfigError);
    }
    {
        TempFile f("no_such_key = 1\n");  // unknown key
        CHECK_THROWS_AS(read_config_file(f.path), ConfigError);
    }
    CHECK_THROWS_AS(read_config_file("/tmp/visa_missing_config_file.cfg"), ConfigError);
}

TEST_CASE("typed application of values onto the config") {
    TrainConfig cfg;
    apply_config(cfg, {{"method", "crl_nce"},
                       {"aug", "none"},
                       {"batch", "32"},
                       {"gamma", "0.8"},
                       {"hidden", "16,8"},
                       {"seed", "42"},
                       {"bo_detach_base", "true"},
                       {"total_env_steps", "5000"}});
    CHECK(cfg.method == Method::crl_nce);
    CHECK(cfg.aug == AugTag::none);
    CHECK(cfg.batch == 32);
    CHECK(cfg.gamma == 0.8);
    CHECK(cfg.hidden == std::vector<int>{16, 8});
    CHECK(cfg.seed == 42);
    CHECK(cfg.bo_detach_base);
    CHECK(cfg.total_env_steps == 5000);

    CHECK_THROWS_AS(apply_config(cfg, {{"batch", "abc"}}), ConfigError);
    CHECK_THROWS_AS(apply_config(cfg, {{"gamma", ""}}), ConfigError);
    CHECK_THROWS_AS(apply_config(cfg, {{"method", "dqn"}}), ConfigError);
    CHECK_THROWS_AS(apply_config(cfg, {{"bogus", "1"}}), ConfigError);
}

TEST_CASE("validation enforces method and augmentation compatibility") {
    TrainConfig cfg;  // visa + strong_unbias: fine
    CHECK_NOTHROW(validate_config(cfg));

    cfg.aug = AugTag::none;  // visa needs augmented states
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);

    cfg.method = Method::crl_cpc;  // plain baselines run without augmentation
    CHECK_NOTHROW(validate_config(cfg));

    cfg.aug = AugTag::random_goal;  // and must not get one
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);

    cfg = TrainConfig{};
    cfg.method = Method::only_augment;
    cfg.aug = AugTag::only_augment;
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("validation checks ranges and the env tag") {
    TrainConfig cfg;
    cfg.gamma = 1.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = TrainConfig{};
    cfg.batch = 1;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = TrainConfig{};
    cfg.env = "walker2d";
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = TrainConfig{};
    cfg.lambda_club = 1.5;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = TrainConfig{};
    cfg.lr_critic = 0.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("critic_only is restricted to the chain") {
    TrainConfig cfg;
    cfg.critic_only = true;
    cfg.env = "point_reach";
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg.env = "chain";
    cfg.method = Method::crl_cpc;
    cfg.aug = AugTag::none;
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("overrides win over file values in load_config") {
    TempFile f(
        "env = point_reach\n"
        "batch = 64\n"
        "seed = 7\n");
    TrainConfig cfg = load_config(f.path, {{"batch", "16"}, {"alpha", "0.2"}});
    CHECK(cfg.batch == 16);   // override beats file
    CHECK(cfg.seed == 7);     // file beats default
    CHECK(cfg.alpha == 0.2);  // override beats default
    CHECK(cfg.env == "point_reach");
}

TEST_CASE("rendered config reparses to the same values") {
    TrainConfig cfg;
    cfg.env = "valve_turn";
    cfg.method = Method::crl_cpc;
    cfg.aug = AugTag::none;
    cfg.hidden = {48, 24};
    cfg.gamma = 0.87;
    cfg.seed = 991;
    cfg.bo_detach_base = true;
    cfg.logit_penalty = 0.125;

    TempFile f(config_to_string(cfg));
    TrainConfig back = load_config(f.path);
    CHECK(back.env == cfg.env);
    CHECK(back.method == cfg.method);
    CHECK(back.aug == cfg.aug);
    CHECK(back.hidden == cfg.hidden);
    CHECK(back.gamma == cfg.gamma);
    CHECK(back.seed == cfg.seed);
    CHECK(back.bo_detach_base == cfg.bo_detach_base);
    CHECK(back.logit_penalty == cfg.logit_penalty);
}

TEST_CASE("every config key appears in the rendered output") {
    TrainConfig cfg;
    std::string text = config_to_string(cfg);
    for (const std::string& key : config_keys()) {
        INFO(key);
        CHECK(text.find(key + " = ") != std::string::npos);
    }
}
