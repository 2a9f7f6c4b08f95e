#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include "macrobell/config.hpp"
#include "oracles.hpp"

using namespace macrobell;

TEST_CASE("angle expressions") {
    CHECK(parse_angle("pi/4") == pi / 4);
    CHECK(parse_angle("-3pi/4") == -3.0 * pi / 4.0);
    CHECK(parse_angle("2pi") == 2.0 * pi);
    CHECK(parse_angle("0.5pi") == 0.5 * pi);
    CHECK(parse_angle("-pi") == -pi);
    CHECK(parse_angle("pi") == pi);
    CHECK(parse_angle(" pi / 2 ") == pi / 2);
    CHECK(parse_angle("1.25") == 1.25);
    CHECK(parse_angle("-0.75") == -0.75);
    CHECK_THROWS_AS(parse_angle("pie"), ConfigError);
    CHECK_THROWS_AS(parse_angle("pi/0"), ConfigError);
    CHECK_THROWS_AS(parse_angle(""), ConfigError);
    CHECK_THROWS_AS(parse_angle("1.2.3"), ConfigError);
}

TEST_CASE("config round-trips through its serialization") {
    RunConfig cfg;
    cfg.r0 = 0.85;
    cfg.alphas = {1.5, 2.25, 4.0};
    cfg.theta = 0.1;
    cfg.phi = -pi / 3;
    cfg.theta_prime = 1.9;
    cfg.phi_prime = -2.5;
    cfg.n0_list = {0, 2, 7};
    cfg.k_points = 96;
    cfg.sigma_factor = 6.5;
    cfg.epsilon = 0.02;
    cfg.output_dir = "out/run one";
    cfg.seed = 987654321;
    cfg.workers = 3;
    cfg.samples = 2500;
    cfg.grid_half_width = 7.5;
    cfg.grid_step = 0.025;
    cfg.classical_mixture = true;
    CHECK(parse_config_text(serialize(cfg)) == cfg);

    RunConfig empty_lists;
    empty_lists.alphas = {};
    empty_lists.n0_list = {};
    CHECK(parse_config_text(serialize(empty_lists)) == empty_lists);
}

TEST_CASE("config file syntax") {
    const RunConfig cfg = parse_config_text(
        "# scan setup\n"
        "r0 = 1.1\n"
        "alphas = 2, 3, 4   # drives\n"
        "angles = 0, -pi/4, pi/2, -3pi/4\n"
        "\n"
        "n0 = 0,1\n"
        "k_points = 32\n");
    CHECK(cfg.r0 == 1.1);
    CHECK(cfg.alphas == std::vector<double>{2.0, 3.0, 4.0});
    CHECK(cfg.phi == -pi / 4);
    CHECK(cfg.phi_prime == -3.0 * pi / 4.0);
    CHECK(cfg.n0_list == std::vector<int>{0, 1});
    CHECK(cfg.k_points == 32);

    CHECK_THROWS_AS(parse_config_text("bogus_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("r0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("k_points = 2.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("classical_mixture = maybe\n"), ConfigError);
}

TEST_CASE("full-precision formatting round-trips") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = (oracles::uniform01(gen) - 0.5) * std::pow(10.0, trial % 30 - 15);
        CHECK(std::strtod(csv::fmt(x).c_str(), nullptr) == x);
        CHECK(std::strtod(csv::fmt_compact(x).c_str(), nullptr) == x);
    }
    CHECK(csv::fmt(-0.0) == "0.00000000000000000e+00");
}
