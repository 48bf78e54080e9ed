#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "maee/channel.hpp"
#include "maee/kinematics.hpp"
#include "maee/metrics.hpp"
#include "maee/motor.hpp"
#include "maee/sca_subproblem.hpp"
#include "maee/solution.hpp"
#include "maee/zf.hpp"

namespace maee {

struct MuOptions {
    double eta_tol = 1e-4;     // Dinkelbach outer tolerance (epsilon_1)
    double sca_tol = 1e-4;     // SCA fractional-increase tolerance (epsilon_2)
    double ao_tol = 1e-4;      // alternating-optimization tolerance
    double pos_tol = 1e-4;     // sequential-update tolerance
    int max_dinkelbach = 30;
    int max_sca = 30;
    int max_ao = 20;
    int max_rounds = 50;
    bool ignore_motor = false; // ConvEE mode
    bool rate_only = false;    // SM mode: position objective is the sum rate
};

namespace detail {

struct BlockConstants {
    double a = 0.0; // T - tau
    double b = 0.0; // a*P_s + P_M(v_max) * sum tau_n
};

inline BlockConstants block_constants(const Scenario& s, const MotorParams& motor,
                                      const std::vector<double>& cpv,
                                      const std::vector<double>& dpv, bool ignore_motor) {
    BlockConstants c;
    if (ignore_motor) {
        c.a = s.coherence_time;
        c.b = c.a * s.p_static;
    } else {
        const Delays d = movement_delays(cpv, dpv, motor.max_linear_speed());
        c.a = s.coherence_time - d.max;
        c.b = c.a * s.p_static + motor_power(motor, motor.max_linear_speed()) * d.total;
    }
    return c;
}

inline double dinkelbach_eta(const CMatrix& h, const CMatrix& w, double sigma2,
                             const BlockConstants& c) {
    return c.a * sum_rate(h, w, sigma2) / (c.a * transmit_power(w) + c.b);
}

} // namespace detail

/// MRT columns scaled to total transmit power P_max / 2: feasible, nonzero
/// SINRs, positive initial ratio.
inline CMatrix mrt_initial_precoder(const CMatrix& h, double p_max) {
    CMatrix w(h.rows(), h.cols());
    for (Eigen::Index k = 0; k < h.cols(); ++k) w.col(k) = h.col(k).normalized();
    return w * std::sqrt(p_max / 2.0 / w.squaredNorm());
}

struct PrecodingResult {
    CMatrix w;
    std::vector<double> eta_trace;
    int dinkelbach_iters = 0;
    int sca_iters = 0;
    bool converged = true;
};

/// Dinkelbach outer loop with an SCA inner loop over the convex subproblem.
/// Positions are fixed; `dpv` only enters through the block constants a, b.
inline PrecodingResult dinkelbach_precoding(const CMatrix& h, const std::vector<double>& cpv,
                                            const std::vector<double>& dpv, const Scenario& s,
                                            const MotorParams& motor, const MuOptions& opt = {},
                                            const CMatrix* w_init = nullptr) {
    const detail::BlockConstants c = detail::block_constants(s, motor, cpv, dpv, opt.ignore_motor);
    const int k = static_cast<int>(h.cols());
    PrecodingResult res;
    res.w = w_init ? *w_init : mrt_initial_precoder(h, s.p_max);

    double eta = detail::dinkelbach_eta(h, res.w, s.noise_power, c);
    res.eta_trace.push_back(eta);
    for (int l = 0; l < opt.max_dinkelbach; ++l) {
        ++res.dinkelbach_iters;
        // inner SCA loop on (P4-1-l)
        double obj_prev = -std::numeric_limits<double>::infinity();
        for (int t = 0; t < opt.max_sca; ++t) {
            ++res.sca_iters;
            // re-center the linearization at the incumbent's true values
            RVector chi(k), xi(k);
            for (int u = 0; u < k; ++u) {
                res.w.col(u) = rotate_real(h.col(u), res.w.col(u));
                double intf = 0.0;
                for (int i = 0; i < k; ++i)
                    if (i != u) intf += std::norm(h.col(u).dot(res.w.col(i)));
                xi(u) = intf + s.noise_power;
                chi(u) = std::max(std::norm(h.col(u).dot(res.w.col(u))) / xi(u), 1e-12);
            }
            ScaSubproblem prob{h, eta, c.a, c.b, s.noise_power, s.p_max, chi, xi};
            const ScaState state = solve_sca_subproblem(prob, res.w);
            res.w = state.w;
            if (obj_prev > -std::numeric_limits<double>::infinity() &&
                state.objective - obj_prev < opt.sca_tol * std::max(std::abs(obj_prev), 1e-12))
                break;
            obj_prev = state.objective;
        }
        const double eta_new = detail::dinkelbach_eta(h, res.w, s.noise_power, c);
        res.eta_trace.push_back(eta_new);
        const bool done = std::abs(eta_new - eta) < opt.eta_tol;
        eta = eta_new;
        if (done) return res;
    }
    res.converged = false;
    return res;
}

namespace detail {

// EE of a candidate DPV at fixed precoder, computed directly from the
// per-grid channel cache. v = v_max throughout.
class PositionObjective {
public:
    PositionObjective(const Scenario& s, const MotorParams& motor, const ChannelRealization& real,
                      const CandidateGrid& grid, const std::vector<double>& cpv,
                      bool ignore_motor, bool rate_only = false)
        : s_(s), motor_(motor), grid_(grid), cpv_(cpv), ignore_motor_(ignore_motor),
          rate_only_(rate_only), v_max_(motor.max_linear_speed()), pm_(motor_power(motor, v_max_)) {
        cache_.resize(static_cast<std::size_t>(s.num_users));
        for (int k = 0; k < s.num_users; ++k) {
            cache_[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(grid.count));
            for (int m = 0; m < grid.count; ++m)
                cache_[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] =
                    channel_entry(s, real, k, grid.position(m));
        }
    }

    double operator()(const std::vector<int>& idx, const CMatrix& w) const {
        const int k = s_.num_users;
        const int n = static_cast<int>(idx.size());
        double rate = 0.0;
        for (int u = 0; u < k; ++u) {
            double signal = 0.0, intf = 0.0;
            for (int i = 0; i < k; ++i) {
                Complex ip(0.0, 0.0);
                for (int a = 0; a < n; ++a)
                    ip += std::conj(cache_[static_cast<std::size_t>(u)]
                                          [static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])]) *
                          w(a, i);
                if (i == u) signal = std::norm(ip);
                else intf += std::norm(ip);
            }
            rate += std::log2(1.0 + signal / (intf + s_.noise_power));
        }
        if (rate_only_) return rate;
        const double pd = w.squaredNorm() + s_.p_static;
        if (ignore_motor_) return rate / pd;
        double tau = 0.0, total = 0.0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            const double leg = std::abs(grid_.position(idx[a]) - cpv_[a]) / v_max_;
            tau = std::max(tau, leg);
            total += leg;
        }
        const double active = s_.coherence_time - tau;
        return active * rate / (pm_ * total + active * pd);
    }

    const std::vector<std::vector<Complex>>& cache() const { return cache_; }

private:
    const Scenario& s_;
    const MotorParams& motor_;
    const CandidateGrid& grid_;
    std::vector<double> cpv_;
    bool ignore_motor_;
    bool rate_only_ = false;
    double v_max_, pm_;
    std::vector<std::vector<Complex>> cache_;
};

} // namespace detail

struct PositionSearchResult {
    std::vector<double> dpv;
    std::vector<double> ee_trace;
    int rounds = 0;
};

/// Multi-round sequential position update at a fixed precoder, identical
/// machinery to the single-user search but with the multi-user EE objective.
inline PositionSearchResult mu_position_search(const Scenario& s, const MotorParams& motor,
                                               const ChannelRealization& real,
                                               const CandidateGrid& grid,
                                               const std::vector<double>& cpv,
                                               const std::vector<double>& dpv0, const CMatrix& w,
                                               const MuOptions& opt = {}) {
    const std::size_t n_ant = cpv.size();
    const double v_max = motor.max_linear_speed();
    const double reach = v_max * s.coherence_time;
    detail::PositionObjective objective(s, motor, real, grid, cpv, opt.ignore_motor,
                                        opt.rate_only);

    std::vector<int> idx(n_ant);
    for (std::size_t n = 0; n < n_ant; ++n) idx[n] = grid.nearest_index(dpv0[n]);

    PositionSearchResult res;
    double ee = objective(idx, w);
    res.ee_trace.push_back(ee);

    // joint scan over one pair of antennas; escapes the frequent stall where
    // no single-antenna move pays off because the precoder matches the
    // current positions, yet a coordinated move of two antennas does
    auto pair_scan = [&](std::size_t n1, std::size_t n2) {
        int best1 = idx[n1], best2 = idx[n2];
        double best_ee = ee;
        double best_dist = std::abs(grid.position(best1) - cpv[n1]) +
                           std::abs(grid.position(best2) - cpv[n2]);
        std::vector<int> trial = idx;
        for (int m1 = 0; m1 < grid.count; ++m1) {
            const double x1 = grid.position(m1);
            if (std::abs(x1 - cpv[n1]) > reach + 1e-12) continue;
            bool ok1 = true;
            for (std::size_t j = 0; j < n_ant && ok1; ++j)
                if (j != n1 && j != n2 &&
                    std::abs(x1 - grid.position(idx[j])) < s.d_min - 1e-12)
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
                        std::abs(x2 - grid.position(idx[j])) < s.d_min - 1e-12)
                        ok2 = false;
                if (!ok2) continue;
                trial[n2] = m2;
                const double cand_ee = objective(trial, w);
                const double dist =
                    std::abs(x1 - cpv[n1]) + std::abs(x2 - cpv[n2]);
                if (cand_ee > best_ee || (cand_ee == best_ee && dist < best_dist)) {
                    best_ee = cand_ee;
                    best1 = m1;
                    best2 = m2;
                    best_dist = dist;
                }
            }
            trial[n2] = idx[n2];
        }
        const bool improved = best_ee > ee;
        idx[n1] = best1;
        idx[n2] = best2;
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
                const int m = idx[n] + shift;
                if (m < 0 || m >= grid.count ||
                    std::abs(grid.position(m) - cpv[n]) > reach + 1e-12)
                    ok = false;
                else
                    trial[n] = m;
            }
            if (!ok) continue;
            const double cand_ee = objective(trial, w);
            if (cand_ee > best_ee) {
                best_ee = cand_ee;
                best_shift = shift;
            }
        }
        if (best_shift == 0) return false;
        for (std::size_t n = 0; n < n_ant; ++n) idx[n] += best_shift;
        ee = best_ee;
        return true;
    };

    int escapes = 0;
    for (int round = 0; round < opt.max_rounds; ++round) {
        const double ee_before = ee;
        for (std::size_t n = 0; n < n_ant; ++n) {
            int best_m = idx[n];
            double best_ee = ee;
            double best_dist = std::abs(grid.position(best_m) - cpv[n]);
            std::vector<int> trial = idx;
            for (int m = 0; m < grid.count; ++m) {
                const double x = grid.position(m);
                if (std::abs(x - cpv[n]) > reach + 1e-12) continue;
                bool feasible = true;
                for (std::size_t j = 0; j < n_ant && feasible; ++j)
                    if (j != n && std::abs(x - grid.position(idx[j])) < s.d_min - 1e-12)
                        feasible = false;
                if (!feasible) continue;
                trial[n] = m;
                const double cand_ee = objective(trial, w);
                const double dist = std::abs(x - cpv[n]);
                if (cand_ee > best_ee ||
                    (cand_ee == best_ee &&
                     (dist < best_dist || (dist == best_dist && x < grid.position(best_m))))) {
                    best_ee = cand_ee;
                    best_m = m;
                    best_dist = dist;
                }
            }
            idx[n] = best_m;
            ee = best_ee;
            res.ee_trace.push_back(ee);
        }
        ++res.rounds;
        if (ee - ee_before < opt.pos_tol * std::max(ee_before, 1e-300)) {
            bool escaped = false;
            if (escapes < 3) {
                ++escapes;
                if (shift_scan()) {
                    escaped = true;
                    res.ee_trace.push_back(ee);
                }
                for (std::size_t gap = 1; gap <= 2; ++gap)
                    for (std::size_t n = 0; n + gap < n_ant; ++n)
                        if (pair_scan(n, n + gap)) {
                            escaped = true;
                            res.ee_trace.push_back(ee);
                        }
            }
            if (!escaped) break;
        }
    }
    res.dpv.resize(n_ant);
    for (std::size_t n = 0; n < n_ant; ++n) res.dpv[n] = grid.position(idx[n]);
    return res;
}

/// Alternating optimization over precoder and positions, with the
/// collision-safe renumbering applied after every position update. Runs two
/// AO branches — one from the initial positions with MRT precoding, one
/// warm-started from the zero-forcing plan — and keeps the better one. The
/// warm start matters because the fixed-precoder position search cannot see
/// moves whose payoff only appears after the precoder is refit, while the
/// zero-forcing search refits its (cheaper) precoder per candidate.
inline Solution mu_solve(const Scenario& s, const MotorParams& motor,
                         const ChannelRealization& real, const CandidateGrid& grid,
                         const std::vector<double>& cpv, const MuOptions& opt = {}) {
    const double v_max = motor.max_linear_speed();

    auto true_ee = [&](const std::vector<double>& x, const CMatrix& wm) {
        return energy_efficiency(s, motor, cpv, x, v_max, wm, channel_matrix(s, real, x)).ee;
    };
    auto objective_ee = [&](const std::vector<double>& x, const CMatrix& wm) {
        if (!opt.ignore_motor) return true_ee(x, wm);
        return asymptotic_ee(channel_matrix(s, real, x), wm, s.noise_power, s.p_static);
    };

    auto run_ao = [&](std::vector<double> dpv, CMatrix w) {
        Solution sol;
        double ee = objective_ee(dpv, w);
        sol.ee_trace.push_back(ee);
        sol.converged = false;
        for (int l = 0; l < opt.max_ao; ++l) {
            ++sol.iterations;
            const CMatrix h = channel_matrix(s, real, dpv);
            const PrecodingResult pr = dinkelbach_precoding(h, cpv, dpv, s, motor, opt, &w);
            w = pr.w;
            const PositionSearchResult ps =
                mu_position_search(s, motor, real, grid, cpv, dpv, w, opt);
            const Renumbering ren = renumber_sorted(ps.dpv, w);
            dpv = ren.dpv;
            w = ren.precoder;
            const double ee_new = objective_ee(dpv, w);
            sol.ee_trace.push_back(ee_new);
            const bool done =
                std::abs(ee_new - ee) <= opt.ao_tol * std::max(std::abs(ee), 1e-300);
            ee = ee_new;
            if (done) {
                sol.converged = true;
                break;
            }
        }
        sol.dpv = dpv;
        sol.precoder = w;
        sol.speed = v_max;
        sol.breakdown =
            energy_efficiency(s, motor, cpv, dpv, v_max, w, channel_matrix(s, real, dpv));
        return sol;
    };

    Solution best = run_ao(cpv, mrt_initial_precoder(channel_matrix(s, real, cpv), s.p_max));
    if (s.num_users > 1 && s.num_users <= s.num_antennas) {
        try {
            const Solution zf = zf_solve(s, motor, real, grid, cpv);
            Solution warm = run_ao(zf.dpv, zf.precoder);
            const double ee_warm = objective_ee(warm.dpv, warm.precoder);
            const double ee_best = objective_ee(best.dpv, best.precoder);
            if (ee_warm > ee_best) best = std::move(warm);
        } catch (const std::exception&) {
            // rank-deficient warm start; the plain branch already stands
        }
    }
    return best;
}

} // namespace maee
