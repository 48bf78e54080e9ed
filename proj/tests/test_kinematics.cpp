#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "maee/kinematics.hpp"
#include "maee/rng.hpp"

using namespace maee;

TEST_CASE("movement delays") {
    SUBCASE("no movement") {
        const Delays d = movement_delays({0.1, 0.2}, {0.1, 0.2}, 2.76);
        CHECK(d.max == 0.0);
        CHECK(d.total == 0.0);
        CHECK(d.per_antenna[0] == 0.0);
    }
    SUBCASE("single span") {
        const Delays d = movement_delays({0.0}, {0.01}, 2.76);
        CHECK(d.max == doctest::Approx(3.6231884058e-3).epsilon(1e-9));
        CHECK(d.total == d.max);
    }
    SUBCASE("doubling speed halves every delay") {
        const std::vector<double> cpv{0.0, 0.1, 0.3}, dpv{0.05, 0.07, 0.31};
        const Delays d1 = movement_delays(cpv, dpv, 1.0);
        const Delays d2 = movement_delays(cpv, dpv, 2.0);
        for (std::size_t n = 0; n < cpv.size(); ++n)
            CHECK(d2.per_antenna[n] == doctest::Approx(d1.per_antenna[n] / 2.0).epsilon(1e-15));
        CHECK(d2.total == doctest::Approx(d1.total / 2.0).epsilon(1e-15));
    }
    SUBCASE("bad input") {
        CHECK_THROWS_AS(movement_delays({0.0}, {0.1}, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(movement_delays({0.0, 0.1}, {0.1}, 1.0), std::invalid_argument);
    }
}

TEST_CASE("trajectory position") {
    const MovePlan plan({0.0, 0.2}, {0.1, 0.14}, 2.0);
    CHECK(trajectory_position(plan, 0, 0.0) == 0.0);
    CHECK(trajectory_position(plan, 1, 0.0) == 0.2);
    CHECK(trajectory_position(plan, 0, plan.delays.max) == 0.1);
    CHECK(trajectory_position(plan, 1, plan.delays.max) == 0.14);
    // midpoint of travel for each leg
    CHECK(trajectory_position(plan, 0, plan.delays.per_antenna[0] / 2.0) ==
          doctest::Approx(0.05).epsilon(1e-14));
    CHECK(trajectory_position(plan, 1, plan.delays.per_antenna[1] / 2.0) ==
          doctest::Approx(0.17).epsilon(1e-14));
    // antenna 1 parks after its shorter leg
    CHECK(trajectory_position(plan, 1, plan.delays.per_antenna[1] + 1e-4) == 0.14);
    CHECK_THROWS_AS(trajectory_position(plan, 0, plan.delays.max + 1.0), std::invalid_argument);
}

TEST_CASE("collision detection") {
    const double d_th = 0.03;
    SUBCASE("crossing pair violates") {
        const MovePlan plan({0.0, 0.05}, {0.05, 0.0}, 1.0);
        const CollisionReport r = check_collision_free(plan, d_th);
        CHECK_FALSE(r.ok);
        CHECK(r.i == 0);
        CHECK(r.j == 1);
    }
    SUBCASE("renumbered targets pass") {
        const MovePlan plan({0.0, 0.05}, {0.0, 0.05}, 1.0);
        CHECK(check_collision_free(plan, d_th).ok);
        const MovePlan moved({0.0, 0.05}, {0.03, 0.08}, 1.0);
        CHECK(check_collision_free(moved, d_th).ok);
    }
    SUBCASE("static antennas spaced at least d_th pass") {
        const MovePlan plan({0.0, 0.03, 0.09}, {0.0, 0.03, 0.09}, 1.0);
        CHECK(check_collision_free(plan, d_th).ok);
    }
    SUBCASE("static antennas below d_th violate") {
        const MovePlan plan({0.0, 0.02}, {0.0, 0.02}, 1.0);
        CHECK_FALSE(check_collision_free(plan, d_th).ok);
    }
    SUBCASE("transient approach below threshold violates") {
        // antenna 0 sweeps past a parked neighbor at distance 0.02 < d_th
        const MovePlan plan({0.0, 0.05}, {0.03, 0.05}, 1.0);
        const CollisionReport r = check_collision_free(plan, d_th);
        CHECK_FALSE(r.ok);
        CHECK(r.time >= 0.0);
        CHECK(r.time <= plan.delays.max);
    }
    SUBCASE("sorted moving pairs keeping spacing pass") {
        const MovePlan plan({0.0, 0.04, 0.08}, {0.02, 0.06, 0.12}, 1.0);
        CHECK(check_collision_free(plan, d_th).ok);
    }
}

TEST_CASE("renumbering") {
    SUBCASE("already sorted is the identity") {
        Eigen::MatrixXcd w = Eigen::MatrixXcd::Random(3, 2);
        const Renumbering r = renumber_sorted({0.0, 0.1, 0.2}, w);
        CHECK(r.perm == std::vector<std::size_t>{0, 1, 2});
        CHECK(r.precoder == w);
    }
    SUBCASE("reverse pair drops the total delay") {
        Eigen::MatrixXcd w = Eigen::MatrixXcd::Random(2, 1);
        const std::vector<double> cpv{0.0, 0.1};
        const Renumbering r = renumber_sorted({0.12, 0.02}, w);
        CHECK(r.dpv == std::vector<double>{0.02, 0.12});
        const double v = 1.0;
        const Delays before = movement_delays(cpv, {0.12, 0.02}, v);
        const Delays after = movement_delays(cpv, r.dpv, v);
        CHECK(before.total == doctest::Approx(0.20).epsilon(1e-14));
        CHECK(after.total == doctest::Approx(0.04).epsilon(1e-14));
        CHECK(r.precoder(0, 0) == w(1, 0));
        CHECK(r.precoder(1, 0) == w(0, 0));
    }
    SUBCASE("row permutation mismatch throws") {
        Eigen::MatrixXcd w = Eigen::MatrixXcd::Random(3, 1);
        CHECK_THROWS_AS(renumber_sorted({0.0, 0.1}, w), std::invalid_argument);
    }
}

TEST_CASE("sorted renumbering achieves the factorial minimum") {
    Rng rng(2024);
    std::uniform_real_distribution<double> ux(0.0, 0.36);
    const double v = 2.76;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5); // N in [2, 6]
        std::vector<double> cpv(static_cast<std::size_t>(n)), dpv(static_cast<std::size_t>(n));
        for (auto& x : cpv) x = ux(rng);
        for (auto& x : dpv) x = ux(rng);
        std::sort(cpv.begin(), cpv.end());

        Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, 1);
        const Renumbering r = renumber_sorted(dpv, w);
        const Delays sorted = movement_delays(cpv, r.dpv, v);
        const Delays unsorted = movement_delays(cpv, dpv, v);
        const DelayOracleResult oracle = min_total_delay_oracle(cpv, dpv, v);

        CHECK(sorted.total == doctest::Approx(oracle.total_delay).epsilon(1e-12));
        CHECK(oracle.total_delay <= unsorted.total + 1e-15);
        CHECK(sorted.total <= unsorted.total + 1e-15);
        CHECK(sorted.max <= unsorted.max + 1e-15);
    }
}

TEST_CASE("sorted trajectories with spaced targets never collide") {
    Rng rng(7);
    const double d_min = 0.03, v = 2.76;
    std::uniform_real_distribution<double> gap(d_min, 3.0 * d_min);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        std::vector<double> cpv(static_cast<std::size_t>(n)), targets(static_cast<std::size_t>(n));
        double x = 0.0, y = 0.0;
        for (int i = 0; i < n; ++i) {
            cpv[static_cast<std::size_t>(i)] = x;
            targets[static_cast<std::size_t>(i)] = y;
            x += gap(rng);
            y += gap(rng);
        }
        std::shuffle(targets.begin(), targets.end(), rng); // arbitrary assignment
        Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, 1);
        const Renumbering r = renumber_sorted(targets, w);
        const MovePlan plan(cpv, r.dpv, v);
        CHECK(check_collision_free(plan, d_min).ok);
    }
}

TEST_CASE("delay oracle basics") {
    SUBCASE("sorted targets against sorted cpv: identity wins") {
        const std::vector<double> cpv{0.0, 0.1, 0.2}, dpv{0.01, 0.12, 0.19};
        const DelayOracleResult r = min_total_delay_oracle(cpv, dpv, 1.0);
        CHECK(r.perm == std::vector<std::size_t>{0, 1, 2});
    }
    SUBCASE("N too large") {
        std::vector<double> big(9, 0.0);
        CHECK_THROWS_AS(min_total_delay_oracle(big, big, 1.0), std::invalid_argument);
    }
}

TEST_CASE("pairwise rearrangement inequality") {
    SUBCASE("strict case") {
        CHECK(lemma1_check(1, 4, 2, 3)); // 2 < 4
        CHECK(std::abs(1.0 - 2.0) + std::abs(4.0 - 3.0) == 2.0);
        CHECK(std::abs(1.0 - 3.0) + std::abs(4.0 - 2.0) == 4.0);
    }
    SUBCASE("equality for disjoint intervals") {
        CHECK(lemma1_check(1, 2, 3, 4));
        CHECK(std::abs(1.0 - 3.0) + std::abs(2.0 - 4.0) == 4.0);
        CHECK(std::abs(1.0 - 4.0) + std::abs(2.0 - 3.0) == 4.0);
    }
    SUBCASE("exhaustive over ordered 4-tuples from {1..20}") {
        long long checked = 0;
        for (int a = 1; a <= 20; ++a)
            for (int b = a + 1; b <= 20; ++b)
                for (int c = 1; c <= 20; ++c)
                    for (int d = c + 1; d <= 20; ++d) {
                        CHECK(lemma1_check(a, b, c, d));
                        ++checked;
                    }
        CHECK(checked == 190LL * 190LL);
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(lemma1_check(2, 1, 3, 4), std::invalid_argument);
        CHECK_THROWS_AS(lemma1_check(0, 1, 3, 4), std::invalid_argument);
    }
}
