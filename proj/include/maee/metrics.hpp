#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <vector>

#include "maee/channel.hpp"
#include "maee/kinematics.hpp"
#include "maee/motor.hpp"

namespace maee {

/// SINR of user k for channel matrix H (columns h_k) and precoder W
/// (columns w_k).
inline double sinr(const CMatrix& h, const CMatrix& w, double sigma2, int k) {
    if (h.rows() != w.rows() || h.cols() != w.cols())
        throw std::invalid_argument("sinr: dimension mismatch");
    const CVector hk = h.col(k);
    double interference = 0.0;
    for (Eigen::Index i = 0; i < w.cols(); ++i) {
        if (i == k) continue;
        interference += std::norm(hk.dot(w.col(i)));
    }
    const double signal = std::norm(hk.dot(w.col(k)));
    return signal / (interference + sigma2);
}

/// Sum of per-user rates log2(1 + SINR_k), bits/s/Hz.
inline double sum_rate(const CMatrix& h, const CMatrix& w, double sigma2) {
    double r = 0.0;
    for (Eigen::Index k = 0; k < h.cols(); ++k)
        r += std::log2(1.0 + sinr(h, w, sigma2, static_cast<int>(k)));
    return r;
}

inline double transmit_power(const CMatrix& w) { return w.squaredNorm(); }

/// Block energy-efficiency breakdown.
struct EEBreakdown {
    double sum_rate = 0.0;   // bits/s/Hz
    double tau = 0.0;        // movement delay, s
    double e_motor = 0.0;    // J
    double e_transmit = 0.0; // J
    double ee = 0.0;         // bits/Hz/J
};

inline void to_json(nlohmann::json& j, const EEBreakdown& b) {
    j = {{"sum_rate", b.sum_rate}, {"tau", b.tau}, {"e_motor", b.e_motor},
         {"e_transmit", b.e_transmit}, {"ee", b.ee}};
}

inline void from_json(const nlohmann::json& j, EEBreakdown& b) {
    j.at("sum_rate").get_to(b.sum_rate);
    j.at("tau").get_to(b.tau);
    j.at("e_motor").get_to(b.e_motor);
    j.at("e_transmit").get_to(b.e_transmit);
    j.at("ee").get_to(b.ee);
}

/// Full block EE: (T - tau) * sum rate over the motor plus transmit energy.
inline EEBreakdown energy_efficiency(const Scenario& s, const MotorParams& motor,
                                     const std::vector<double>& cpv,
                                     const std::vector<double>& dpv, double v,
                                     const CMatrix& w, const CMatrix& h) {
    const double v_max = motor.max_linear_speed();
    if (v > v_max * (1.0 + 1e-12))
        throw std::invalid_argument("energy_efficiency: v exceeds v_max");
    double max_leg = 0.0;
    for (std::size_t n = 0; n < cpv.size(); ++n)
        max_leg = std::max(max_leg, std::abs(dpv[n] - cpv[n]));
    if (v * s.coherence_time < max_leg * (1.0 - 1e-12))
        throw std::invalid_argument("energy_efficiency: movement cannot finish within T");

    EEBreakdown b;
    if (max_leg == 0.0) {
        b.tau = 0.0;
        b.e_motor = 0.0;
    } else {
        const Delays d = movement_delays(cpv, dpv, v);
        b.tau = d.max;
        b.e_motor = motor_power(motor, v) * d.total;
    }
    b.sum_rate = sum_rate(h, w, s.noise_power);
    b.e_transmit = (s.coherence_time - b.tau) * (transmit_power(w) + s.p_static);
    b.ee = (s.coherence_time - b.tau) * b.sum_rate / (b.e_motor + b.e_transmit);
    return b;
}

/// EE in the large-T limit: mechanical terms vanish and only transmit plus
/// static power remains.
inline double asymptotic_ee(const CMatrix& h, const CMatrix& w, double sigma2, double p_static) {
    return sum_rate(h, w, sigma2) / (transmit_power(w) + p_static);
}

} // namespace maee
