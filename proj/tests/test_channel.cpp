#include <doctest.h>

#include <cmath>
#include <complex>

#include "maee/channel.hpp"
#include "maee/motor.hpp"

using namespace maee;

TEST_CASE("unit conversions") {
    CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(dbm_to_watt(-80.0) == doctest::Approx(1e-11).epsilon(1e-14));
    CHECK(db_to_linear(-40.0) == doctest::Approx(1e-4).epsilon(1e-14));
    CHECK(db_to_linear(0.0) == 1.0);
}

TEST_CASE("scenario defaults and validation") {
    Scenario s;
    CHECK_NOTHROW(validate(s));
    CHECK(s.array_length == doctest::Approx(0.36));
    CHECK(s.d_min == doctest::Approx(0.03));

    SUBCASE("too many antennas for the aperture") {
        s.num_antennas = 13; // 13 * 0.03 > 0.36
        CHECK_THROWS_AS(validate(s), std::invalid_argument);
    }
    SUBCASE("d_th below d_min") {
        s.d_th = s.d_min / 2.0;
        CHECK_THROWS_AS(validate(s), std::invalid_argument);
    }
    SUBCASE("nonpositive power") {
        s.p_max = 0.0;
        CHECK_THROWS_AS(validate(s), std::invalid_argument);
    }
}

TEST_CASE("candidate grid") {
    Scenario s;
    const double ds = MotorParams::am2224().step_size();

    SUBCASE("default aperture gives 275 points") {
        const CandidateGrid g = candidate_grid(s, ds);
        CHECK(g.count == 275);
        CHECK(g.spacing == ds);
        CHECK(g.position(0) == 0.0);
        CHECK(g.position(g.count - 1) <= s.array_length);
        for (int m = 1; m < g.count; ++m)
            CHECK(std::abs((g.position(m) - g.position(m - 1)) - ds) < 1e-15);
    }
    SUBCASE("aperture equal to one step gives a single point") {
        Scenario tiny = s;
        tiny.array_length = ds;
        tiny.num_antennas = 1;
        tiny.d_min = tiny.d_th = ds / 2.0;
        const CandidateGrid g = candidate_grid(tiny, ds);
        CHECK(g.count == 1);
        CHECK(g.position(0) == 0.0);
    }
    SUBCASE("nearest index clamps to the grid") {
        const CandidateGrid g = candidate_grid(s, ds);
        CHECK(g.nearest_index(-1.0) == 0);
        CHECK(g.nearest_index(10.0) == g.count - 1);
        CHECK(g.nearest_index(g.position(17) + 0.3 * ds) == 17);
    }
    SUBCASE("bad step") {
        CHECK_THROWS_AS(candidate_grid(s, 0.0), std::invalid_argument);
    }
}

TEST_CASE("channel sampling determinism and ranges") {
    Scenario s;
    const ChannelRealization a = sample_channel(s, 42);
    const ChannelRealization b = sample_channel(s, 42);
    const ChannelRealization c = sample_channel(s, 43);
    REQUIRE(a.users.size() == 2);
    REQUIRE(a.users[0].gains.size() == 10);
    for (int k = 0; k < 2; ++k) {
        CHECK(a.users[k].distance == b.users[k].distance);
        for (int l = 0; l < s.num_paths; ++l) {
            CHECK(a.users[k].gains[l] == b.users[k].gains[l]);
            CHECK(a.users[k].angles[l] == b.users[k].angles[l]);
            CHECK(a.users[k].angles[l] >= -M_PI / 2);
            CHECK(a.users[k].angles[l] <= M_PI / 2);
        }
        CHECK(a.users[k].distance >= s.user_distance_min);
        CHECK(a.users[k].distance <= s.user_distance_max);
    }
    CHECK(a.users[0].gains[0] != c.users[0].gains[0]);
}

TEST_CASE("single-path scenarios") {
    Scenario s;
    s.num_paths = 1;
    const ChannelRealization real = sample_channel(s, 5);
    CHECK(real.users[0].gains.size() == 1);

    SUBCASE("entry at x=0 is the bare gain") {
        CHECK(channel_entry(s, real, 0, 0.0) == real.users[0].gains[0]);
    }
    SUBCASE("constant magnitude across the aperture") {
        const double mag = std::abs(real.users[0].gains[0]);
        for (int i = 0; i <= 50; ++i) {
            const double x = s.array_length * i / 50.0;
            CHECK(std::abs(channel_entry(s, real, 0, x)) == doctest::Approx(mag).epsilon(1e-12));
        }
    }
    SUBCASE("phase progression matches the steering model") {
        const double x = 0.123 * s.array_length;
        const double phase = 2.0 * M_PI * x * std::sin(real.users[0].angles[0]) / s.wavelength;
        const Complex expected = real.users[0].gains[0] * std::polar(1.0, phase);
        CHECK(std::abs(channel_entry(s, real, 0, x) - expected) < 1e-14);
    }
}

TEST_CASE("two opposing paths can null the entry") {
    Scenario s;
    s.num_paths = 2;
    ChannelRealization real;
    real.users.resize(1);
    real.users[0].distance = 50.0;
    real.users[0].gains = {Complex(1e-4, 0.0), Complex(1e-4, 0.0)};
    real.users[0].angles = {M_PI / 6, -M_PI / 6}; // sin = +-1/2
    // phases: +-pi*x/lambda; opposition (+-pi/2) at x = lambda/2
    const double x = 0.5 * s.wavelength;
    CHECK(std::abs(channel_entry(s, real, 0, x)) < 1e-16);
    CHECK(std::abs(channel_entry(s, real, 0, 0.0)) == doctest::Approx(2e-4).epsilon(1e-12));
}

TEST_CASE("gain variance matches the pathloss model") {
    Scenario s;
    s.user_distance_min = s.user_distance_max = 50.0;
    s.num_paths = 10;
    const double expected = s.ref_pathloss * std::pow(50.0, -s.pathloss_exponent)
                          / static_cast<double>(s.num_paths);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 5000; ++seed) { // 1e5 path draws
        const ChannelRealization real = sample_channel(s, derive_seed(999, seed));
        for (const auto& u : real.users)
            for (const Complex& g : u.gains) {
                acc += std::norm(g);
                ++count;
            }
    }
    CHECK(count == 100000);
    CHECK(acc / static_cast<double>(count) == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("channel vector and matrix") {
    Scenario s;
    const ChannelRealization real = sample_channel(s, 11);
    const std::vector<double> x{0.0, 0.05, 0.1, 0.17, 0.21, 0.33};
    const CMatrix h = channel_matrix(s, real, x);
    REQUIRE(h.rows() == 6);
    REQUIRE(h.cols() == 2);
    for (int k = 0; k < 2; ++k) {
        const CVector col = channel_vector(s, real, x, k);
        for (int n = 0; n < 6; ++n) {
            CHECK(h(n, k) == col(n));
            CHECK(col(n) == channel_entry(s, real, k, x[static_cast<std::size_t>(n)]));
        }
    }
    CHECK_THROWS_AS(channel_vector(s, real, {-0.01}, 0), std::invalid_argument);
    CHECK_THROWS_AS(channel_vector(s, real, {s.array_length + 0.01}, 0), std::invalid_argument);
}

TEST_CASE("initial cpv is centered, on-grid and spaced") {
    Scenario s;
    const CandidateGrid g = candidate_grid(s, MotorParams::am2224().step_size());
    const std::vector<double> cpv = initial_cpv(s, g);
    REQUIRE(cpv.size() == 6);
    for (std::size_t i = 0; i < cpv.size(); ++i) {
        CHECK(std::abs(cpv[i] - g.position(g.nearest_index(cpv[i]))) < 1e-12);
        if (i > 0) CHECK(cpv[i] - cpv[i - 1] >= s.d_min - 1e-12);
    }
    const double mid = 0.5 * (cpv.front() + cpv.back());
    CHECK(std::abs(mid - 0.5 * s.array_length) < 2.0 * g.spacing);
}
