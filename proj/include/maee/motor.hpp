#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace maee {

/// Electrical/mechanical constants of one stepper motor with a lead-screw
/// linear actuator. All units SI.
struct MotorParams {
    int rotor_teeth = 6;            // p
    double flux = 0.023;            // psi_M, Wb
    double voltage = 11.94;         // V
    double resistance = 75.0;       // R, Ohm
    double inductance = 65.6e-3;    // L_phase, H
    double lead_radius = 5e-3;      // l0, m
    double step_angle = M_PI / 12;  // omega_D, rad
    double omega_max = 552.0;       // rad/s, load-limited angular speed cap

    /// AM2224 high-speed stepper motor, the parameter set evaluated in all
    /// default experiments.
    static MotorParams am2224() { return MotorParams{}; }

    [[nodiscard]] double max_linear_speed() const { return omega_max * lead_radius; }
    [[nodiscard]] double step_size() const { return step_angle * lead_radius; }
};

/// Pull-out torque M(omega) [N*m]. Total on omega >= 0; negative above the
/// no-load speed (caller's responsibility to interpret).
inline double pull_out_torque(const MotorParams& m, double omega) {
    if (omega < 0.0) throw std::invalid_argument("pull_out_torque: omega must be >= 0");
    const double p = static_cast<double>(m.rotor_teeth);
    const double d2 = m.resistance * m.resistance + omega * omega * m.inductance * m.inductance;
    return p * m.flux * m.voltage / std::sqrt(d2)
         - p * omega * m.flux * m.flux * m.resistance / d2;
}

/// No-load angular speed omega_M: the unique positive root of the pull-out
/// torque. Requires psi*R > V*L for the root to exist.
inline double max_no_load_speed(const MotorParams& m) {
    const double pr = m.flux * m.resistance;
    const double vl = m.voltage * m.inductance;
    if (pr <= vl)
        throw std::domain_error("max_no_load_speed: psi*R <= V*L, no real positive root");
    return m.voltage * m.resistance / std::sqrt(pr * pr - vl * vl);
}

inline void validate(const MotorParams& m) {
    auto positive = [](double x, const char* name) {
        if (!(x > 0.0)) throw std::invalid_argument(std::string("MotorParams: ") + name + " must be > 0");
    };
    if (m.rotor_teeth <= 0) throw std::invalid_argument("MotorParams: rotor_teeth must be > 0");
    positive(m.flux, "flux");
    positive(m.voltage, "voltage");
    positive(m.resistance, "resistance");
    positive(m.inductance, "inductance");
    positive(m.lead_radius, "lead_radius");
    positive(m.step_angle, "step_angle");
    positive(m.omega_max, "omega_max");
    if (m.flux * m.resistance <= m.voltage * m.inductance)
        throw std::invalid_argument("MotorParams: requires psi*R > V*L");
    if (m.omega_max >= max_no_load_speed(m))
        throw std::invalid_argument("MotorParams: omega_max must be below the no-load speed");
}

/// Mechanical power drawn while moving one antenna at linear speed v [W].
inline double motor_power(const MotorParams& m, double v) {
    if (v < 0.0) throw std::invalid_argument("motor_power: v must be >= 0");
    if (v > m.max_linear_speed() * (1.0 + 1e-12))
        throw std::invalid_argument("motor_power: v exceeds v_max = omega_max * l0");
    const double omega = v / m.lead_radius;
    return omega * pull_out_torque(m, omega);
}

/// f(v) = P_M(v) / (v*T - dx): the per-meter energy penalty of moving at
/// speed v when the longest leg is dx. Strictly decreasing in v on the
/// feasible range, which is what makes v = v_max optimal.
inline double speed_penalty(const MotorParams& m, double v, double T, double delta_x) {
    if (delta_x < 0.0) throw std::invalid_argument("speed_penalty: delta_x must be >= 0");
    const double slack = v * T - delta_x;
    if (!(slack > 0.0)) throw std::invalid_argument("speed_penalty: infeasible speed, v*T <= delta_x");
    return motor_power(m, v) / slack;
}

} // namespace maee
