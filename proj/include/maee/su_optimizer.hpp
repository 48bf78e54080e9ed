#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "maee/channel.hpp"
#include "maee/kinematics.hpp"
#include "maee/metrics.hpp"
#include "maee/motor.hpp"
#include "maee/solution.hpp"

namespace maee {

/// Constants of the single-user power-control problem at a fixed DPV:
/// maximize a*log2(1 + p*g/sigma2) / (a*p + b) over p in [0, P_max].
struct DinkelbachContext {
    double a = 0.0;            // T - tau
    double b = 0.0;            // a*P_s + P_M(v_max) * sum tau_n
    double channel_gain = 0.0; // ||h(x)||^2
    double sigma2 = 0.0;
    double p_max = 0.0;
    double tol = 1e-6;
};

struct DinkelbachResult {
    double power = 0.0;
    double ee = 0.0;                // converged ratio eta
    std::vector<double> eta_trace;  // non-decreasing
    int iterations = 0;
};

inline double dinkelbach_ratio(const DinkelbachContext& c, double p) {
    return c.a * std::log2(1.0 + p * c.channel_gain / c.sigma2) / (c.a * p + c.b);
}

/// Closed-form Dinkelbach power control. Starts from p = 0 (eta = 0, whose
/// unconstrained maximizer is +inf, clipped to P_max) and iterates the
/// water-level update until the ratio stabilizes.
inline DinkelbachResult dinkelbach_power(const DinkelbachContext& c, int max_iters = 50) {
    if (!(c.b > 0.0)) throw std::invalid_argument("dinkelbach_power: b must be > 0");
    if (!(c.channel_gain > 0.0)) throw std::invalid_argument("dinkelbach_power: zero channel");
    DinkelbachResult r;
    double eta = 0.0; // from p^(0) = 0
    double p = 0.0;
    for (int l = 0; l < max_iters; ++l) {
        if (eta <= 0.0) {
            p = c.p_max;
        } else {
            const double p_hat = 1.0 / (eta * std::log(2.0)) - c.sigma2 / c.channel_gain;
            p = std::clamp(p_hat, 0.0, c.p_max);
        }
        const double eta_new = dinkelbach_ratio(c, p);
        r.eta_trace.push_back(eta_new);
        ++r.iterations;
        const bool done = std::abs(eta_new - eta) < c.tol;
        eta = eta_new;
        if (done) break;
    }
    r.power = p;
    r.ee = eta;
    return r;
}

/// MRT direction h / ||h||.
inline CVector mrt_direction(const CVector& h) {
    const double n = h.norm();
    if (!(n > 0.0)) throw std::invalid_argument("mrt_direction: zero channel");
    return h / n;
}

namespace detail {

inline DinkelbachContext su_context(const Scenario& s, const MotorParams& motor,
                                    const std::vector<double>& cpv,
                                    const std::vector<double>& dpv, double gain,
                                    bool ignore_motor, double tol) {
    DinkelbachContext c;
    const double v_max = motor.max_linear_speed();
    if (ignore_motor) {
        c.a = s.coherence_time;
        c.b = c.a * s.p_static;
    } else {
        const Delays d = movement_delays(cpv, dpv, v_max);
        c.a = s.coherence_time - d.max;
        c.b = c.a * s.p_static + motor_power(motor, v_max) * d.total;
    }
    c.channel_gain = gain;
    c.sigma2 = s.noise_power;
    c.p_max = s.p_max;
    c.tol = tol;
    return c;
}

// Feasible grid indices for antenna n while the others are parked at the
// working DPV: minimum spacing to every other antenna and the per-block
// travel cap around the initial position.
inline std::vector<int> feasible_positions(const Scenario& s, const CandidateGrid& grid,
                                           const std::vector<double>& working_dpv,
                                           const std::vector<double>& cpv, std::size_t n,
                                           double v_max) {
    std::vector<int> out;
    const double reach = v_max * s.coherence_time;
    for (int m = 0; m < grid.count; ++m) {
        const double x = grid.position(m);
        if (std::abs(x - cpv[n]) > reach + 1e-12) continue;
        bool ok = true;
        for (std::size_t j = 0; j < working_dpv.size() && ok; ++j)
            if (j != n && std::abs(x - working_dpv[j]) < s.d_min - 1e-12) ok = false;
        if (ok) out.push_back(m);
    }
    return out;
}

} // namespace detail

struct SuSearchOptions {
    double tol = 1e-4;           // fractional EE increase threshold
    int max_rounds = 50;
    double dinkelbach_tol = 1e-6;
    bool ignore_motor = false;   // ConvEE mode: optimize the large-T objective
};

/// Multi-round sequential position update for the single-user problem.
/// Each antenna in index order enumerates its feasible grid positions and
/// keeps the Dinkelbach-optimal EE argmax; ties go to the candidate closest
/// to the antenna's initial position, then to the smaller coordinate.
inline Solution su_position_search(const Scenario& s, const MotorParams& motor,
                                   const ChannelRealization& real, const CandidateGrid& grid,
                                   const std::vector<double>& cpv,
                                   const SuSearchOptions& opt = {}) {
    const std::size_t n_ant = cpv.size();
    const double v_max = motor.max_linear_speed();

    // per-grid-point channel power for the single user
    std::vector<double> gain(static_cast<std::size_t>(grid.count));
    for (int m = 0; m < grid.count; ++m)
        gain[static_cast<std::size_t>(m)] = std::norm(channel_entry(s, real, 0, grid.position(m)));

    std::vector<int> dpv_idx(n_ant);
    for (std::size_t n = 0; n < n_ant; ++n) dpv_idx[n] = grid.nearest_index(cpv[n]);
    auto positions = [&](const std::vector<int>& idx) {
        std::vector<double> x(idx.size());
        for (std::size_t n = 0; n < idx.size(); ++n) x[n] = grid.position(idx[n]);
        return x;
    };
    auto evaluate = [&](const std::vector<int>& idx) {
        double g = 0.0;
        for (int m : idx) g += gain[static_cast<std::size_t>(m)];
        const DinkelbachContext c = detail::su_context(s, motor, cpv, positions(idx), g,
                                                       opt.ignore_motor, opt.dinkelbach_tol);
        return dinkelbach_power(c);
    };

    Solution sol;
    double ee = evaluate(dpv_idx).ee;
    sol.ee_trace.push_back(ee);

    // joint scan over an adjacent antenna pair; escapes stalls where no
    // single-antenna move pays off but a coordinated move of two does (the
    // shared movement-delay term couples the antennas)
    const double reach = v_max * s.coherence_time;
    auto pair_scan = [&](std::size_t n1, std::size_t n2) {
        int best1 = dpv_idx[n1], best2 = dpv_idx[n2];
        double best_ee = ee;
        double best_dist = std::abs(grid.position(best1) - cpv[n1]) +
                           std::abs(grid.position(best2) - cpv[n2]);
        std::vector<int> trial = dpv_idx;
        for (int m1 = 0; m1 < grid.count; ++m1) {
            const double x1 = grid.position(m1);
            if (std::abs(x1 - cpv[n1]) > reach + 1e-12) continue;
            bool ok1 = true;
            for (std::size_t j = 0; j < n_ant && ok1; ++j)
                if (j != n1 && j != n2 &&
                    std::abs(x1 - grid.position(dpv_idx[j])) < s.d_min - 1e-12)
                    ok1 = false;
            if (!ok1) continue;
            trial[n1] = m1;
            for (int m2 = 0; m2 < grid.count; ++m2) {
                const double x2 = grid.position(m2);
                if (std::abs(x2 - cpv[n2]) > reach + 1e-12) continue;
                if (std::abs(x2 - x1) < s.d_min - 1e-12) continue;
                bool ok2 = true;
                for (std::size_t j = 0; j < n_ant && ok2; ++j)
                    if (j != n1 && j != n2 &&
                        std::abs(x2 - grid.position(dpv_idx[j])) < s.d_min - 1e-12)
                        ok2 = false;
                if (!ok2) continue;
                trial[n2] = m2;
                const double cand_ee = evaluate(trial).ee;
                const double dist = std::abs(x1 - cpv[n1]) + std::abs(x2 - cpv[n2]);
                if (cand_ee > best_ee || (cand_ee == best_ee && dist < best_dist)) {
                    best_ee = cand_ee;
                    best1 = m1;
                    best2 = m2;
                    best_dist = dist;
                }
            }
            trial[n2] = dpv_idx[n2];
        }
        const bool improved = best_ee > ee;
        dpv_idx[n1] = best1;
        dpv_idx[n2] = best2;
        ee = best_ee;
        return improved;
    };

    // rigid translation of the whole array by a common number of grid steps;
    // cheap (O(M) evaluations) and effective when the spacing floor leaves
    // little slack between the antennas
    auto shift_scan = [&]() {
        std::vector<int> trial(n_ant);
        int best_shift = 0;
        double best_ee = ee;
        for (int shift = -(grid.count - 1); shift < grid.count; ++shift) {
            if (shift == 0) continue;
            bool ok = true;
            for (std::size_t n = 0; n < n_ant && ok; ++n) {
                const int m = dpv_idx[n] + shift;
                if (m < 0 || m >= grid.count ||
                    std::abs(grid.position(m) - cpv[n]) > reach + 1e-12)
                    ok = false;
                else
                    trial[n] = m;
            }
            if (!ok) continue;
            const double cand_ee = evaluate(trial).ee;
            if (cand_ee > best_ee) {
                best_ee = cand_ee;
                best_shift = shift;
            }
        }
        if (best_shift == 0) return false;
        for (std::size_t n = 0; n < n_ant; ++n) dpv_idx[n] += best_shift;
        ee = best_ee;
        return true;
    };

    int escapes = 0;
    for (int round = 0; round < opt.max_rounds; ++round) {
        const double ee_before = ee;
        std::vector<double> working = positions(dpv_idx);
        for (std::size_t n = 0; n < n_ant; ++n) {
            const std::vector<int> cand =
                detail::feasible_positions(s, grid, working, cpv, n, v_max);
            int best_m = dpv_idx[n];
            double best_ee = ee;
            double best_dist = std::abs(grid.position(best_m) - cpv[n]);
            std::vector<int> trial = dpv_idx;
            for (int m : cand) {
                trial[n] = m;
                const double cand_ee = evaluate(trial).ee;
                const double dist = std::abs(grid.position(m) - cpv[n]);
                const bool better = cand_ee > best_ee ||
                    (cand_ee == best_ee &&
                     (dist < best_dist || (dist == best_dist && grid.position(m) < grid.position(best_m))));
                if (better) {
                    best_ee = cand_ee;
                    best_m = m;
                    best_dist = dist;
                }
            }
            dpv_idx[n] = best_m;
            working[n] = grid.position(best_m);
            ee = best_ee;
            sol.ee_trace.push_back(ee);
        }
        ++sol.iterations;
        if (ee - ee_before < opt.tol * std::max(ee_before, 1e-300)) {
            bool escaped = false;
            if (escapes < 3) {
                ++escapes;
                if (shift_scan()) {
                    escaped = true;
                    sol.ee_trace.push_back(ee);
                }
                for (std::size_t gap = 1; gap <= 2; ++gap)
                    for (std::size_t n = 0; n + gap < n_ant; ++n)
                        if (pair_scan(n, n + gap)) {
                            escaped = true;
                            sol.ee_trace.push_back(ee);
                        }
            }
            if (!escaped) break;
        }
    }

    // final precoder at the optimized DPV, then the collision-safe renumbering
    std::vector<double> dpv = positions(dpv_idx);
    const CVector h = channel_vector(s, real, dpv, 0);
    const DinkelbachContext c =
        detail::su_context(s, motor, cpv, dpv, h.squaredNorm(), opt.ignore_motor, opt.dinkelbach_tol);
    const DinkelbachResult power = dinkelbach_power(c);
    CMatrix w = std::sqrt(power.power) * mrt_direction(h);
    const Renumbering ren = renumber_sorted(dpv, w);
    sol.dpv = ren.dpv;
    sol.precoder = ren.precoder;

    sol.speed = v_max;
    sol.breakdown = energy_efficiency(s, motor, cpv, sol.dpv, v_max, sol.precoder,
                                      channel_matrix(s, real, sol.dpv));
    return sol;
}

/// Single-user pipeline: the motor runs at v_max, positions come from the
/// sequential search, and the beamformer is MRT at the Dinkelbach power.
inline Solution su_solve(const Scenario& s, const MotorParams& motor,
                         const ChannelRealization& real, const CandidateGrid& grid,
                         const std::vector<double>& cpv, const SuSearchOptions& opt = {}) {
    return su_position_search(s, motor, real, grid, cpv, opt);
}

} // namespace maee
