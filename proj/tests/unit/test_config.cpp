#include <doctest.h>

#include "config.hpp"

#include <cmath>
#include <string>

using namespace wwc;

TEST_CASE("config defaults are valid and round-trip through serialization") {
    RunConfig a;
    a.geometry.wall_angle_left = kPi / 18;
    a.physics.omega_s = 0.123456789012345678;
    a.run.perturb_shape = PerturbShape::random;
    a.run.levels = 4;
    a.run.seed = 18446744073709551615ull;
    a.numerics.filter = FilterMode::off;
    CHECK_NOTHROW(validate(a));
    const std::string text = serialize_config(a);
    const RunConfig b = parse_config(text);
    CHECK(serialize_config(b) == text);
    CHECK(b.physics.omega_s == a.physics.omega_s);
    CHECK(b.run.levels == 4);
    CHECK(b.run.seed == a.run.seed);
    CHECK(b.run.perturb_shape == PerturbShape::random);
    CHECK(b.numerics.filter == FilterMode::off);
    CHECK(reference_hash(a) == reference_hash(b));
}

TEST_CASE("pi expressions in real values") {
    const RunConfig c = parse_config("[geometry]\nwall_angle = pi/12\n[physics]\nomega_s = 0.5*pi/10\n");
    CHECK(c.geometry.wall_angle_left == doctest::Approx(kPi / 12).epsilon(1e-15));
    CHECK(c.geometry.wall_angle_right == c.geometry.wall_angle_left);
    CHECK(c.physics.omega_s == doctest::Approx(kPi / 20).epsilon(1e-15));
}

TEST_CASE("reference hash tracks the reference geometry and mesh only") {
    RunConfig a, b;
    b.physics.sigma = 7.0;
    b.run.steps = 3;
    CHECK(reference_hash(a) == reference_hash(b));
    b.numerics.m = 48;
    CHECK(reference_hash(a) != reference_hash(b));
}

TEST_CASE("config errors name the offending entry") {
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[physics]\nsigma = abc\n").find("[physics] sigma") != std::string::npos);
    CHECK(message("[physics]\nsigma = -1\n").find("sigma must be positive") != std::string::npos);
    CHECK(message("[physics]\nbogus = 1\n").find("unknown key [physics] bogus") != std::string::npos);
    CHECK(message("[nowhere]\nx = 1\n").find("unknown section") != std::string::npos);
    CHECK(message("[run]\nperturb_shape = square\n").find("perturb_shape") != std::string::npos);
    CHECK(message("[run]\nlevels = 0\n").find("levels") != std::string::npos);
    CHECK(message("[numerics]\nM = 33\n").find("even") != std::string::npos);
    CHECK(message("[physics]\nomega_s = pi/2\n").find("omega_s") != std::string::npos);
    // ini syntax errors carry the line number
    CHECK(message("[physics]\nsigma = 1\n[broken\n").find("line 3") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}
