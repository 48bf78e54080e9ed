#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "maee/channel.hpp"
#include "maee/metrics.hpp"
#include "maee/motor.hpp"
#include "maee/rng.hpp"

using namespace maee;

namespace {

CMatrix random_cmatrix(Rng& rng, int rows, int cols, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    CMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = Complex(g(rng), g(rng));
    return m;
}

} // namespace

TEST_CASE("sinr") {
    Rng rng(3);
    SUBCASE("single user has no interference") {
        const CMatrix h = random_cmatrix(rng, 4, 1, 1.0);
        const CMatrix w = random_cmatrix(rng, 4, 1, 1.0);
        const double sigma2 = 0.5;
        const Complex ip = (h.col(0).conjugate().transpose() * w.col(0))(0);
        CHECK(sinr(h, w, sigma2, 0) == doctest::Approx(std::norm(ip) / sigma2).epsilon(1e-12));
    }
    SUBCASE("orthogonal interferers contribute nothing") {
        CMatrix h = CMatrix::Zero(2, 2);
        h(0, 0) = Complex(1.0, 0.0);
        h(1, 1) = Complex(1.0, 0.0);
        CMatrix w = CMatrix::Zero(2, 2);
        w(0, 0) = Complex(2.0, 0.0); // w_1 orthogonal to h_2 and vice versa
        w(1, 1) = Complex(3.0, 0.0);
        CHECK(sinr(h, w, 1.0, 0) == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(sinr(h, w, 1.0, 1) == doctest::Approx(9.0).epsilon(1e-14));
    }
    SUBCASE("matches a scalar recomputation") {
        const CMatrix h = random_cmatrix(rng, 5, 3, 1.0);
        const CMatrix w = random_cmatrix(rng, 5, 3, 1.0);
        const double sigma2 = 0.3;
        for (int k = 0; k < 3; ++k) {
            double signal = 0.0, intf = 0.0;
            for (int i = 0; i < 3; ++i) {
                Complex ip(0.0, 0.0);
                for (int n = 0; n < 5; ++n) ip += std::conj(h(n, k)) * w(n, i);
                (i == k ? signal : intf) += std::norm(ip);
            }
            CHECK(sinr(h, w, sigma2, k) ==
                  doctest::Approx(signal / (intf + sigma2)).epsilon(1e-12));
        }
    }
    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS(sinr(CMatrix::Zero(2, 1), CMatrix::Zero(3, 1), 1.0, 0),
                        std::invalid_argument);
    }
}

TEST_CASE("sum rate") {
    Rng rng(4);
    SUBCASE("zero precoder") {
        const CMatrix h = random_cmatrix(rng, 3, 2, 1.0);
        CHECK(sum_rate(h, CMatrix::Zero(3, 2), 1.0) == 0.0);
    }
    SUBCASE("unit SINRs give K bits") {
        CMatrix h = CMatrix::Zero(2, 2);
        h(0, 0) = Complex(1.0, 0.0);
        h(1, 1) = Complex(1.0, 0.0);
        CMatrix w = CMatrix::Zero(2, 2);
        w(0, 0) = Complex(1.0, 0.0);
        w(1, 1) = Complex(1.0, 0.0);
        CHECK(sum_rate(h, w, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("invariant under joint row permutation") {
        const CMatrix h = random_cmatrix(rng, 6, 2, 1.0);
        const CMatrix w = random_cmatrix(rng, 6, 2, 0.5);
        Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
        perm.setIdentity();
        std::shuffle(perm.indices().data(), perm.indices().data() + 6, rng);
        CHECK(sum_rate(perm * h, perm * w, 0.1) ==
              doctest::Approx(sum_rate(h, w, 0.1)).epsilon(1e-12));
    }
}

TEST_CASE("block energy efficiency") {
    Scenario s;
    s.num_users = 1;
    const MotorParams motor = MotorParams::am2224();
    const ChannelRealization real = sample_channel(s, 21);
    const std::vector<double> cpv{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    Rng rng(5);

    SUBCASE("no movement reduces to the stationary ratio, independent of v") {
        const CMatrix h = channel_matrix(s, real, cpv);
        const CMatrix w = std::sqrt(s.p_max) * h.col(0).normalized();
        const EEBreakdown b1 = energy_efficiency(s, motor, cpv, cpv, motor.max_linear_speed(), w, h);
        const EEBreakdown b2 = energy_efficiency(s, motor, cpv, cpv, 0.5, w, h);
        CHECK(b1.tau == 0.0);
        CHECK(b1.e_motor == 0.0);
        CHECK(b1.ee == b2.ee);
        CHECK(b1.ee == doctest::Approx(asymptotic_ee(h, w, s.noise_power, s.p_static))
                           .epsilon(1e-12));
    }
    SUBCASE("large T approaches the asymptotic EE") {
        Scenario slow = s;
        slow.coherence_time = 1e6;
        std::vector<double> dpv = cpv;
        dpv[0] += 0.012;
        const CMatrix h = channel_matrix(s, real, dpv);
        const CMatrix w = std::sqrt(s.p_max) * h.col(0).normalized();
        const EEBreakdown b =
            energy_efficiency(slow, motor, cpv, dpv, motor.max_linear_speed(), w, h);
        const double limit = asymptotic_ee(h, w, s.noise_power, s.p_static);
        CHECK(b.ee == doctest::Approx(limit).epsilon(1e-4));
    }
    SUBCASE("two algebraic forms of the block EE agree") {
        std::uniform_real_distribution<double> step(-0.01, 0.01);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> dpv = cpv;
            for (auto& x : dpv) x = std::clamp(x + step(rng), 0.0, s.array_length);
            const double v = motor.max_linear_speed();
            const CMatrix h = channel_matrix(s, real, dpv);
            const CMatrix w = std::sqrt(0.7 * s.p_max) * h.col(0).normalized();
            const EEBreakdown b = energy_efficiency(s, motor, cpv, dpv, v, w, h);
            // independent path: explicit delays and energies
            const Delays d = movement_delays(cpv, dpv, v);
            const double num = (s.coherence_time - d.max) * sum_rate(h, w, s.noise_power);
            const double den = motor_power(motor, v) * d.total +
                               (s.coherence_time - d.max) * (transmit_power(w) + s.p_static);
            CHECK(b.ee == doctest::Approx(num / den).epsilon(1e-13));
            CHECK(b.tau == d.max);
            CHECK(b.e_motor == doctest::Approx(motor_power(motor, v) * d.total).epsilon(1e-13));
        }
    }
    SUBCASE("infeasible inputs throw") {
        std::vector<double> dpv = cpv;
        dpv[0] +=  0.02;
        const CMatrix h = channel_matrix(s, real, dpv);
        const CMatrix w = CMatrix::Zero(6, 1);
        CHECK_THROWS_AS(
            energy_efficiency(s, motor, cpv, dpv, motor.max_linear_speed() * 1.01, w, h),
            std::invalid_argument);
        // movement cannot finish: v*T = 0.05*0.25 = 0.0125 < 0.02
        CHECK_THROWS_AS(energy_efficiency(s, motor, cpv, dpv, 0.05, w, h),
                        std::invalid_argument);
    }
}

TEST_CASE("asymptotic EE") {
    Rng rng(6);
    const CMatrix h = random_cmatrix(rng, 4, 2, 1.0);
    SUBCASE("zero precoder") {
        CHECK(asymptotic_ee(h, CMatrix::Zero(4, 2), 1e-11, 1.0) == 0.0);
    }
    SUBCASE("larger static power lowers EE") {
        const CMatrix w = random_cmatrix(rng, 4, 2, 0.4);
        CHECK(asymptotic_ee(h, w, 1e-11, 2.0) < asymptotic_ee(h, w, 1e-11, 1.0));
    }
}

TEST_CASE("breakdown JSON round trip") {
    EEBreakdown b{3.5, 0.01, 0.002, 0.3, 11.2};
    nlohmann::json j = b;
    const EEBreakdown back = j.get<EEBreakdown>();
    CHECK(back.sum_rate == b.sum_rate);
    CHECK(back.tau == b.tau);
    CHECK(back.e_motor == b.e_motor);
    CHECK(back.e_transmit == b.e_transmit);
    CHECK(back.ee == b.ee);
}
