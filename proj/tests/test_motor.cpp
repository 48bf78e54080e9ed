#include <doctest.h>

#include <cmath>
#include <random>

#include "maee/motor.hpp"
#include "maee/rng.hpp"

using namespace maee;

namespace {

// independent bisection root of the torque curve on (lo, hi)
double torque_root_bisect(const MotorParams& m, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (pull_out_torque(m, mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("am2224 derived constants") {
    const MotorParams m = MotorParams::am2224();
    CHECK(m.max_linear_speed() == doctest::Approx(2.76).epsilon(1e-12));
    CHECK(m.step_size() == doctest::Approx(1.30899693899574718e-3).epsilon(1e-12));
}

TEST_CASE("pull-out torque values") {
    const MotorParams m = MotorParams::am2224();
    CHECK(pull_out_torque(m, 0.0) == doctest::Approx(0.0219696).epsilon(1e-10));
    CHECK(pull_out_torque(m, 552.0) == doctest::Approx(8.3984462622331834e-4).epsilon(1e-10));
    CHECK_THROWS_AS(pull_out_torque(m, -1.0), std::invalid_argument);
}

TEST_CASE("torque strictly decreasing on the operating range") {
    const MotorParams m = MotorParams::am2224();
    double prev = pull_out_torque(m, 0.0);
    for (int i = 1; i <= 5000; ++i) {
        const double w = m.omega_max * i / 5000.0;
        const double cur = pull_out_torque(m, w);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("no-load speed: closed form vs bisection") {
    const MotorParams m = MotorParams::am2224();
    const double wm = max_no_load_speed(m);
    CHECK(wm == doctest::Approx(582.658895687197).epsilon(1e-10));
    CHECK(wm > 580.0);
    CHECK(wm < 585.0);
    CHECK(std::abs(pull_out_torque(m, wm)) < 1e-12);
    CHECK(wm == doctest::Approx(torque_root_bisect(m, 1.0, 1e4)).epsilon(1e-12));
    CHECK(m.omega_max < wm);

    // doubling V (still in the closed form's domain) raises the no-load speed
    MotorParams fast = m;
    fast.voltage *= 2.0;
    REQUIRE(fast.flux * fast.resistance > fast.voltage * fast.inductance);
    CHECK(max_no_load_speed(fast) > wm);
    CHECK(max_no_load_speed(fast) ==
          doctest::Approx(torque_root_bisect(fast, 1.0, 1e5)).epsilon(1e-12));

    MotorParams bad = m;
    bad.voltage = 40.0; // psi*R = 1.725 < V*L
    CHECK_THROWS_AS(max_no_load_speed(bad), std::domain_error);
}

TEST_CASE("motor power values and unimodality") {
    const MotorParams m = MotorParams::am2224();
    CHECK(motor_power(m, 0.0) == 0.0);
    CHECK(motor_power(m, m.max_linear_speed()) ==
          doctest::Approx(0.463594233675272).epsilon(1e-10));
    CHECK_THROWS_AS(motor_power(m, m.max_linear_speed() * 1.001), std::invalid_argument);

    // single interior maximum: exactly one sign change of the differences
    const int samples = 4000;
    int sign_changes = 0;
    double prev = motor_power(m, 0.0);
    bool rising = true;
    double peak_v = 0.0;
    for (int i = 1; i <= samples; ++i) {
        const double v = m.max_linear_speed() * i / samples;
        const double cur = motor_power(m, v);
        if (rising && cur < prev) {
            rising = false;
            ++sign_changes;
            peak_v = m.max_linear_speed() * (i - 1) / samples;
        } else if (!rising) {
            CHECK(cur < prev);
        }
        prev = cur;
    }
    CHECK(sign_changes == 1);
    CHECK(peak_v == doctest::Approx(266.524969075794 * m.lead_radius).epsilon(1e-3));
}

TEST_CASE("speed penalty") {
    const MotorParams m = MotorParams::am2224();
    const double v_max = m.max_linear_speed();

    SUBCASE("zero displacement") {
        const double T = 0.25;
        CHECK(speed_penalty(m, v_max, T, 0.0) ==
              doctest::Approx(motor_power(m, v_max) / (v_max * T)).epsilon(1e-14));
    }
    SUBCASE("matches direct quotient on random triples") {
        Rng rng(7);
        std::uniform_real_distribution<double> uv(0.2, v_max), uT(0.05, 0.5);
        for (int i = 0; i < 200; ++i) {
            const double v = uv(rng), T = uT(rng);
            std::uniform_real_distribution<double> ux(0.0, 0.9 * v * T);
            const double dx = ux(rng);
            CHECK(speed_penalty(m, v, T, dx) ==
                  doctest::Approx(motor_power(m, v) / (v * T - dx)).epsilon(1e-14));
        }
    }
    SUBCASE("strictly decreasing in v") {
        Rng rng(8);
        std::uniform_real_distribution<double> uT(0.05, 0.5), ur(0.0, 0.9);
        for (int i = 0; i < 100; ++i) {
            const double T = uT(rng);
            const double dx = ur(rng) * v_max * T;
            double prev = speed_penalty(m, std::max(dx / T * 1.001, 1e-6), T, dx);
            for (int j = 1; j <= 50; ++j) {
                const double v0 = std::max(dx / T * 1.001, 1e-6);
                const double v = v0 + (v_max - v0) * j / 50.0;
                const double cur = speed_penalty(m, v, T, dx);
                CHECK(cur < prev);
                prev = cur;
            }
        }
    }
    SUBCASE("infeasible speed throws") {
        CHECK_THROWS_AS(speed_penalty(m, 0.1, 0.25, 0.5), std::invalid_argument);
    }
}

TEST_CASE("parameter validation") {
    MotorParams m = MotorParams::am2224();
    CHECK_NOTHROW(validate(m));
    m.resistance = 0.0;
    CHECK_THROWS_AS(validate(m), std::invalid_argument);
}
