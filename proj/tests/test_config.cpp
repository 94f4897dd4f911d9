#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracpinn/config.hpp"
#include "fracpinn/errors.hpp"

using namespace fracpinn;

TEST_CASE("empty document yields the defaults") {
    const auto cfg = parse_config_text("{}");
    CHECK(cfg.seed == 1);
    CHECK(cfg.grid.dt == 0.5);
    CHECK(cfg.grid.n_nodes == 601);
    CHECK(cfg.bounds.alpha_min == 0.5);
    CHECK(cfg.bounds.beta_max == 1.0);
    REQUIRE(cfg.bounds.boxes[0].has_value());
    CHECK(cfg.bounds.boxes[0]->lo == 0.1);
    CHECK(cfg.bounds.boxes[0]->hi == 0.3);
    CHECK(cfg.sim_params.alpha == 0.9);
    CHECK(cfg.sim_params.beta == 0.25);
    CHECK(cfg.train.layer_dims == std::vector<int>{1, 64, 64, 64, 5});
    CHECK(cfg.train.head == OutputHead::softmax);
    CHECK(cfg.train.lambdas.cons == 0.0); // auto-resolved for softmax
    CHECK(cfg.train.adam.max_iters == 8000);
    CHECK(cfg.train.lbfgs.max_iters == 500);
    CHECK(cfg.data_format == "observations");
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.train.seed == cfg.seed);
    CHECK(cfg.train.grid.n_nodes == cfg.grid.n_nodes);
}

TEST_CASE("unknown keys are rejected with a dotted path") {
    CHECK_THROWS_AS(parse_config_text(R"({"bogus": 1})"), ConfigError);
    try {
        parse_config_text(R"({"train": {"adamm": {}}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("train.adamm") != std::string::npos);
    }
}

TEST_CASE("partial documents merge over the defaults") {
    const auto cfg = parse_config_text(R"({"grid": {"dt": 1.0, "T": 120.0}, "seed": 9})");
    CHECK(cfg.seed == 9);
    CHECK(cfg.grid.dt == 1.0);
    CHECK(cfg.grid.n_nodes == 121);
    CHECK(cfg.sim_params.beta == 0.25); // untouched default
}

TEST_CASE("overrides apply to dotted paths") {
    const auto cfg = parse_config_text("{}", {"train.adam.lr0=0.01", "sim.alpha=0.95",
                                              "output.dir=/tmp/x", "noise.clip_to_simplex=false"});
    CHECK(cfg.train.adam.lr0 == 0.01);
    CHECK(cfg.sim_params.alpha == 0.95);
    CHECK(cfg.output_dir == "/tmp/x");
    CHECK_FALSE(cfg.noise.clip_to_simplex);
}

TEST_CASE("overrides never introduce new keys") {
    CHECK_THROWS_AS(parse_config_text("{}", {"train.new_knob=1"}), ConfigError);
    CHECK_THROWS_AS(parse_config_text("{}", {"no_equals_sign"}), ConfigError);
}

TEST_CASE("validation of bad values") {
    CHECK_THROWS_AS(parse_config_text(R"({"grid": {"dt": 0.7}})"), ConfigError); // T=300 off-grid
    CHECK_THROWS_AS(parse_config_text(R"({"grid": {"dt": -0.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"model": {"alpha_min": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"sim": {"scheme": "magic"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"network": {"head": "relu"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"data": {"format": "xml"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"model": {"rate_bounds": {"beta": [0.3, 0.1]}}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text("not json"), ConfigError);
}

TEST_CASE("null rate bounds select softplus mode") {
    const auto cfg = parse_config_text(R"({"model": {"rate_bounds": {"beta": null}}})");
    CHECK_FALSE(cfg.bounds.boxes[0].has_value());
    CHECK(cfg.bounds.boxes[1].has_value());
}

TEST_CASE("softplus head auto-enables the conservation penalty") {
    const auto cfg = parse_config_text(R"({"network": {"head": "softplus"}})");
    CHECK(cfg.train.lambdas.cons == 1.0);
    const auto explicit_cfg = parse_config_text(
        R"({"network": {"head": "softplus"}, "train": {"lambdas": {"cons": 0.3}}})");
    CHECK(explicit_cfg.train.lambdas.cons == 0.3);
}

TEST_CASE("config hash is stable and value-sensitive") {
    const auto a = parse_config_text("{}");
    const auto b = parse_config_text("{}");
    CHECK(a.config_hash() == b.config_hash());
    CHECK(a.config_hash().size() == 16);
    const auto c = parse_config_text(R"({"seed": 2})");
    CHECK(a.config_hash() != c.config_hash());
    // key order in the source text is irrelevant
    const auto d = parse_config_text(R"({"grid": {"T": 300.0, "dt": 0.5}, "seed": 1})");
    CHECK(a.config_hash() == d.config_hash());
}

TEST_CASE("canonical json round-trips through the parser") {
    const auto cfg = parse_config_text(R"({"seed": 5, "sim": {"alpha": 0.8}})");
    const auto again = parse_config_text(cfg.canonical_json());
    CHECK(again.config_hash() == cfg.config_hash());
    CHECK(again.seed == 5);
    CHECK(again.sim_params.alpha == 0.8);
}
