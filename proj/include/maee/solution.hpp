#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "maee/channel.hpp"
#include "maee/kinematics.hpp"
#include "maee/metrics.hpp"
#include "maee/motor.hpp"

namespace maee {

/// A solver's output: destination positions, precoder, speed and the EE
/// breakdown, plus convergence diagnostics.
struct Solution {
    std::vector<double> dpv;
    CMatrix precoder;             // N x K
    double speed = 0.0;           // always v_max when any antenna moves
    EEBreakdown breakdown;
    std::vector<double> ee_trace; // objective after each solver iteration
    int iterations = 0;
    bool converged = true;
};

inline void to_json(nlohmann::json& j, const Solution& s) {
    std::vector<std::vector<double>> w_re, w_im;
    for (Eigen::Index r = 0; r < s.precoder.rows(); ++r) {
        std::vector<double> re, im;
        for (Eigen::Index c = 0; c < s.precoder.cols(); ++c) {
            re.push_back(s.precoder(r, c).real());
            im.push_back(s.precoder(r, c).imag());
        }
        w_re.push_back(re);
        w_im.push_back(im);
    }
    j = {{"dpv", s.dpv},       {"precoder_re", w_re},   {"precoder_im", w_im},
         {"speed", s.speed},   {"breakdown", s.breakdown}, {"ee_trace", s.ee_trace},
         {"iterations", s.iterations}, {"converged", s.converged}};
}

struct AuditReport {
    bool ok = true;
    std::string detail;
};

/// Verifies all constraints of the master problem on a returned solution:
/// power ball, grid membership, minimum spacing, travel cap, and the full
/// collision-avoidance trajectory constraint.
inline AuditReport audit_solution(const Scenario& s, const MotorParams& motor,
                                  const CandidateGrid& grid, const std::vector<double>& cpv,
                                  const Solution& sol) {
    const double tol = 1e-9;
    if (transmit_power(sol.precoder) > s.p_max * (1.0 + 1e-9))
        return {false, "transmit power exceeds P_max"};
    for (double x : sol.dpv) {
        const double snapped = grid.position(grid.nearest_index(x));
        if (std::abs(x - snapped) > tol) return {false, "position off the candidate grid"};
    }
    for (std::size_t i = 0; i < sol.dpv.size(); ++i)
        for (std::size_t j = i + 1; j < sol.dpv.size(); ++j)
            if (std::abs(sol.dpv[i] - sol.dpv[j]) < s.d_min - tol)
                return {false, "minimum spacing violated"};
    const double v_max = motor.max_linear_speed();
    for (std::size_t n = 0; n < cpv.size(); ++n)
        if (std::abs(sol.dpv[n] - cpv[n]) > v_max * s.coherence_time + tol)
            return {false, "travel cap exceeded"};
    MovePlan plan(cpv, sol.dpv, v_max);
    const CollisionReport c = check_collision_free(plan, s.d_th);
    if (!c.ok) return {false, "collision between antennas " + std::to_string(c.i) + " and " +
                              std::to_string(c.j)};
    return {true, ""};
}

} // namespace maee
