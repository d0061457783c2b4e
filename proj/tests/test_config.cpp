#include "doctest.h"

#include <stdexcept>

#include "nae/config.hpp"

using namespace nae;

TEST_CASE("config grammar: comments, whitespace, typed getters") {
    Config cfg = Config::from_string(
        "# run settings\n"
        "train.lr = 0.05   # inline comment\n"
        "train.epochs = 12\n"
        "\n"
        "model.tied = true\n"
        "noise.input = gaussian:0.1\n");
    CHECK(cfg.get_double("train.lr") == 0.05);
    CHECK(cfg.get_size("train.epochs", 0) == 12);
    CHECK(cfg.get_bool("model.tied", false));
    const NoiseDist d = cfg.get_noise("noise.input", NoiseDist::none());
    CHECK(d.kind == NoiseKind::additive_gaussian);
    CHECK(d.var == 0.1);
    cfg.require_all_consumed();
}

TEST_CASE("config: unknown keys are rejected after parsing") {
    Config cfg = Config::from_string("train.lr = 0.1\nmystery.knob = 3\n");
    CHECK(cfg.get_double("train.lr") == 0.1);
    CHECK_THROWS_WITH_AS(cfg.require_all_consumed(), doctest::Contains("mystery.knob"),
                         std::runtime_error);
}

TEST_CASE("config: malformed lines and values throw") {
    CHECK_THROWS_AS(Config::from_string("not a key value line\n"), std::runtime_error);
    Config cfg = Config::from_string("train.lr = fast\n");
    CHECK_THROWS_AS(cfg.get_double("train.lr"), std::runtime_error);
    Config cfg2 = Config::from_string("model.tied = maybe\n");
    CHECK_THROWS_AS(cfg2.get_bool("model.tied", false), std::runtime_error);
}

TEST_CASE("config: save/load round-trip preserves entries and order") {
    Config cfg = Config::from_string("b.key = 2\na.key = 1\n");
    cfg.set("c.key", "3");
    const std::string path = "/tmp/nae_config_test.cfg";
    cfg.save(path);
    Config loaded = Config::load(path);
    CHECK(loaded.to_string() == cfg.to_string());
}

TEST_CASE("noise spec round-trips through config form") {
    NoiseSpec spec;
    spec.input = NoiseDist::additive_gaussian(0.1);
    spec.pre_activation = NoiseDist::none();
    spec.activation = NoiseDist::dropout(0.25);
    Config cfg;
    noise_spec_to_config(spec, cfg);
    CHECK(cfg.get_string("noise.activation") == "dropout:0.25");
    NoiseSpec back = noise_spec_from_config(cfg);
    CHECK(back.input.kind == NoiseKind::additive_gaussian);
    CHECK(back.input.var == 0.1);
    CHECK(back.activation.p == 0.25);
}

TEST_CASE("penalty and train sections parse with defaults from noise") {
    Config cfg = Config::from_string(
        "noise.input = gaussian:0.2\n"
        "noise.activation = dropout:0.5\n"
        "penalty.hidden = 0.7\n"
        "penalty.contractive = 0.1\n"
        "train.lr = 0.3\n"
        "train.objective = analytic\n"
        "train.batch = 10\n");
    const NoiseSpec spec = noise_spec_from_config(cfg);
    const PenaltyConfig pc = penalties_from_config(cfg, spec);
    REQUIRE(pc.terms.size() == 2);
    CHECK(pc.terms[0].kind == PenaltyKind::hidden);
    CHECK(pc.terms[0].weight == 0.7);
    CHECK(pc.terms[0].noise.kind == NoiseKind::dropout);
    const TrainConfig tc = train_config_from_config(cfg, spec, pc);
    CHECK(tc.learning_rate == 0.3);
    CHECK(tc.objective == Objective::analytic);
    CHECK(tc.batch_size == 10);
    cfg.require_all_consumed();
}
