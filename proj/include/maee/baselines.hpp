#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "maee/channel.hpp"
#include "maee/kinematics.hpp"
#include "maee/metrics.hpp"
#include "maee/motor.hpp"
#include "maee/mu_optimizer.hpp"
#include "maee/rng.hpp"
#include "maee/solution.hpp"
#include "maee/su_optimizer.hpp"
#include "maee/wmmse.hpp"
#include "maee/zf.hpp"

namespace maee {

enum class Scheme { Proposed, FPA, ConvEE, SM, PSO, ZF };

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::Proposed: return "proposed";
        case Scheme::FPA: return "fpa";
        case Scheme::ConvEE: return "conv_ee";
        case Scheme::SM: return "sm";
        case Scheme::PSO: return "pso";
        case Scheme::ZF: return "zf";
    }
    return "?";
}

inline Scheme scheme_from_string(const std::string& name) {
    if (name == "proposed") return Scheme::Proposed;
    if (name == "fpa") return Scheme::FPA;
    if (name == "conv_ee" || name == "convee") return Scheme::ConvEE;
    if (name == "sm") return Scheme::SM;
    if (name == "pso") return Scheme::PSO;
    if (name == "zf") return Scheme::ZF;
    throw std::invalid_argument("unknown scheme: " + name);
}

/// Joint beamforming/position/speed optimizer of this library: single-user
/// two-layer search or multi-user alternating optimization.
inline Solution proposed_solve(const Scenario& s, const MotorParams& motor,
                               const ChannelRealization& real, const CandidateGrid& grid,
                               const std::vector<double>& cpv) {
    if (s.num_users == 1) return su_solve(s, motor, real, grid, cpv);
    return mu_solve(s, motor, real, grid, cpv);
}

/// Fixed-position antennas: DPV = CPV, precoding by the Dinkelbach machinery.
inline Solution fpa_solve(const Scenario& s, const MotorParams& motor,
                          const ChannelRealization& real, const CandidateGrid& grid,
                          const std::vector<double>& cpv) {
    (void)grid;
    Solution sol;
    sol.dpv = cpv;
    const CMatrix h = channel_matrix(s, real, cpv);
    if (s.num_users == 1) {
        DinkelbachContext c;
        c.a = s.coherence_time;
        c.b = c.a * s.p_static;
        c.channel_gain = h.col(0).squaredNorm();
        c.sigma2 = s.noise_power;
        c.p_max = s.p_max;
        const DinkelbachResult r = dinkelbach_power(c);
        sol.precoder = std::sqrt(r.power) * mrt_direction(h.col(0));
        sol.ee_trace = r.eta_trace;
        sol.iterations = r.iterations;
    } else {
        const PrecodingResult r = dinkelbach_precoding(h, cpv, cpv, s, motor);
        sol.precoder = r.w;
        sol.ee_trace = r.eta_trace;
        sol.iterations = r.dinkelbach_iters;
        sol.converged = r.converged;
    }
    sol.speed = motor.max_linear_speed();
    sol.breakdown = energy_efficiency(s, motor, cpv, cpv, sol.speed, sol.precoder, h);
    return sol;
}

/// Conventional EE optimization: solve with the mechanical power forced to
/// zero, then report the returned plan under the true block EE.
inline Solution conv_ee_solve(const Scenario& s, const MotorParams& motor,
                              const ChannelRealization& real, const CandidateGrid& grid,
                              const std::vector<double>& cpv) {
    if (s.num_users == 1) {
        SuSearchOptions opt;
        opt.ignore_motor = true;
        return su_solve(s, motor, real, grid, cpv, opt);
    }
    MuOptions opt;
    opt.ignore_motor = true;
    return mu_solve(s, motor, real, grid, cpv, opt);
}

/// Sum-rate maximization: WMMSE precoding alternated with a rate-only
/// sequential position update; judged afterwards under the true EE.
inline Solution sm_solve(const Scenario& s, const MotorParams& motor,
                         const ChannelRealization& real, const CandidateGrid& grid,
                         const std::vector<double>& cpv, double tol = 1e-4, int max_ao = 20) {
    std::vector<double> dpv = cpv;
    CMatrix w;
    double rate = 0.0;
    Solution sol;
    sol.converged = false;
    MuOptions pos_opt;
    pos_opt.rate_only = true;
    for (int l = 0; l < max_ao; ++l) {
        ++sol.iterations;
        const CMatrix h = channel_matrix(s, real, dpv);
        const WmmseResult wm = wmmse_precoding(h, s.p_max, s.noise_power);
        w = wm.w;
        const PositionSearchResult ps = mu_position_search(s, motor, real, grid, cpv, dpv, w, pos_opt);
        const Renumbering ren = renumber_sorted(ps.dpv, w);
        dpv = ren.dpv;
        w = ren.precoder;
        const double rate_new = sum_rate(channel_matrix(s, real, dpv), w, s.noise_power);
        sol.ee_trace.push_back(rate_new);
        const bool done = rate_new - rate < tol * std::max(rate, 1e-12);
        rate = rate_new;
        if (done) {
            sol.converged = true;
            break;
        }
    }
    sol.dpv = dpv;
    sol.precoder = w;
    sol.speed = motor.max_linear_speed();
    sol.breakdown =
        energy_efficiency(s, motor, cpv, dpv, sol.speed, w, channel_matrix(s, real, dpv));
    return sol;
}

namespace detail {

// EE of a continuous (possibly spacing-violating) DPV with Dinkelbach-optimal
// precoding; spacing violations are penalized rather than rejected so the
// swarm fitness stays total.
inline double pso_fitness(const Scenario& s, const MotorParams& motor,
                          const ChannelRealization& real, const std::vector<double>& cpv,
                          const std::vector<double>& x, const MuOptions& mu_opt) {
    double penalty = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (std::abs(x[i] - x[j]) < s.d_min) penalty += 1e3;

    // the swarm may propose crossing trajectories; evaluate the renumbered
    // plan, which is what would actually be executed
    CMatrix dummy = CMatrix::Zero(static_cast<Eigen::Index>(x.size()), s.num_users);
    std::vector<double> sorted_x = renumber_sorted(x, dummy).dpv;

    const CMatrix h = channel_matrix(s, real, sorted_x);
    CMatrix w;
    if (s.num_users == 1) {
        const Delays d = movement_delays(cpv, sorted_x, motor.max_linear_speed());
        DinkelbachContext c;
        c.a = s.coherence_time - d.max;
        c.b = c.a * s.p_static + motor_power(motor, motor.max_linear_speed()) * d.total;
        c.channel_gain = h.col(0).squaredNorm();
        c.sigma2 = s.noise_power;
        c.p_max = s.p_max;
        w = std::sqrt(dinkelbach_power(c).power) * mrt_direction(h.col(0));
    } else {
        w = dinkelbach_precoding(h, cpv, sorted_x, s, motor, mu_opt).w;
    }
    return energy_efficiency(s, motor, cpv, sorted_x, motor.max_linear_speed(), w, h).ee - penalty;
}

// Round to the grid, then greedy outward shifts until the minimum spacing
// holds again; travel caps are enforced by the search box so only rounding
// slack needs clamping.
inline std::vector<double> pso_quantize_repair(const Scenario& s, const CandidateGrid& grid,
                                               const std::vector<double>& cpv,
                                               const std::vector<double>& x, double reach) {
    const int n = static_cast<int>(x.size());
    const int gap = std::max(1, static_cast<int>(std::ceil(s.d_min / grid.spacing - 1e-9)));
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    std::vector<int> idx(x.size());
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = grid.nearest_index(x[order[static_cast<std::size_t>(i)]]);
    for (int i = 1; i < n; ++i) idx[i] = std::max(idx[i], idx[i - 1] + gap); // push right
    for (int i = n - 1; i >= 0; --i) {                                       // pull back inside
        const int cap = grid.count - 1 - (n - 1 - i) * gap;
        idx[i] = std::min(idx[i], cap);
    }
    for (int i = 1; i < n; ++i) idx[i] = std::max(idx[i], idx[i - 1] + gap);

    std::vector<double> out(x.size());
    for (int i = 0; i < n; ++i) out[order[static_cast<std::size_t>(i)]] = grid.position(idx[i]);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i], cpv[i] - reach, cpv[i] + reach);
    return out;
}

} // namespace detail

struct PsoOptions {
    int particles_per_antenna = 8;
    int iterations = 100;
    double inertia = 0.72;
    double cognitive = 1.49;
    double social = 1.49;
    double velocity_clamp_fraction = 0.2; // of the array length
};

/// Global-best particle swarm over continuous destination positions with
/// spacing penalties, followed by grid quantization and repair. The swarm
/// seed derives from the channel realization so runs stay reproducible.
inline Solution pso_position_solve(const Scenario& s, const MotorParams& motor,
                                   const ChannelRealization& real, const CandidateGrid& grid,
                                   const std::vector<double>& cpv, const PsoOptions& opt = {}) {
    const std::size_t n = cpv.size();
    const double reach = motor.max_linear_speed() * s.coherence_time;
    const double v_clamp = opt.velocity_clamp_fraction * s.array_length;
    Rng rng(derive_seed(real.seed, 0x50534fULL)); // swarm stream

    MuOptions mu_opt; // looser inner tolerances for per-particle fitness
    mu_opt.eta_tol = 1e-3;
    mu_opt.sca_tol = 1e-3;
    mu_opt.max_dinkelbach = 10;
    mu_opt.max_sca = 6;

    auto lo = [&](std::size_t i) { return std::max(0.0, cpv[i] - reach); };
    auto hi = [&](std::size_t i) { return std::min(s.array_length, cpv[i] + reach); };

    const int swarm = opt.particles_per_antenna * static_cast<int>(n);
    std::vector<std::vector<double>> pos(static_cast<std::size_t>(swarm)),
        vel(static_cast<std::size_t>(swarm)), best(static_cast<std::size_t>(swarm));
    std::vector<double> best_fit(static_cast<std::size_t>(swarm));
    std::vector<double> gbest = cpv;
    double gbest_fit = -std::numeric_limits<double>::infinity();
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int p = 0; p < swarm; ++p) {
        auto& xp = pos[static_cast<std::size_t>(p)];
        auto& vp = vel[static_cast<std::size_t>(p)];
        xp.resize(n);
        vp.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            xp[i] = (p == 0) ? cpv[i] : lo(i) + unit(rng) * (hi(i) - lo(i));
            vp[i] = (unit(rng) - 0.5) * 0.2 * s.array_length;
        }
        best[static_cast<std::size_t>(p)] = xp;
        const double f = detail::pso_fitness(s, motor, real, cpv, xp, mu_opt);
        best_fit[static_cast<std::size_t>(p)] = f;
        if (f > gbest_fit) {
            gbest_fit = f;
            gbest = xp;
        }
    }
    for (int it = 0; it < opt.iterations; ++it) {
        for (int p = 0; p < swarm; ++p) {
            auto& xp = pos[static_cast<std::size_t>(p)];
            auto& vp = vel[static_cast<std::size_t>(p)];
            for (std::size_t i = 0; i < n; ++i) {
                vp[i] = opt.inertia * vp[i] +
                        opt.cognitive * unit(rng) * (best[static_cast<std::size_t>(p)][i] - xp[i]) +
                        opt.social * unit(rng) * (gbest[i] - xp[i]);
                vp[i] = std::clamp(vp[i], -v_clamp, v_clamp);
                xp[i] = std::clamp(xp[i] + vp[i], lo(i), hi(i));
            }
            const double f = detail::pso_fitness(s, motor, real, cpv, xp, mu_opt);
            if (f > best_fit[static_cast<std::size_t>(p)]) {
                best_fit[static_cast<std::size_t>(p)] = f;
                best[static_cast<std::size_t>(p)] = xp;
            }
            if (f > gbest_fit) {
                gbest_fit = f;
                gbest = xp;
            }
        }
    }

    std::vector<double> dpv = detail::pso_quantize_repair(s, grid, cpv, gbest, reach);
    // repair can only fail if the box constraints fight each other; fall back
    // to the always-feasible CPV in that case
    for (std::size_t i = 0; i < dpv.size(); ++i)
        for (std::size_t j = i + 1; j < dpv.size(); ++j)
            if (std::abs(dpv[i] - dpv[j]) < s.d_min - 1e-12) dpv = cpv;

    auto finish = [&](const std::vector<double>& x) {
        const CMatrix h = channel_matrix(s, real, x);
        CMatrix w;
        if (s.num_users == 1) {
            const Delays d = movement_delays(cpv, x, motor.max_linear_speed());
            DinkelbachContext c;
            c.a = s.coherence_time - d.max;
            c.b = c.a * s.p_static + motor_power(motor, motor.max_linear_speed()) * d.total;
            c.channel_gain = h.col(0).squaredNorm();
            c.sigma2 = s.noise_power;
            c.p_max = s.p_max;
            w = std::sqrt(dinkelbach_power(c).power) * mrt_direction(h.col(0));
        } else {
            w = dinkelbach_precoding(h, cpv, x, s, motor).w;
        }
        Solution sol;
        const Renumbering ren = renumber_sorted(x, w);
        sol.dpv = ren.dpv;
        sol.precoder = ren.precoder;
        sol.speed = motor.max_linear_speed();
        sol.breakdown = energy_efficiency(s, motor, cpv, sol.dpv, sol.speed, sol.precoder,
                                          channel_matrix(s, real, sol.dpv));
        return sol;
    };
    Solution sol = finish(dpv);
    if (dpv != cpv) { // quantization may undercut the always-available incumbent
        Solution at_cpv = finish(cpv);
        if (at_cpv.breakdown.ee > sol.breakdown.ee) sol = std::move(at_cpv);
    }
    sol.iterations = opt.iterations;
    sol.ee_trace = {gbest_fit};
    return sol;
}

/// Dispatch by scheme name.
inline Solution solve_scheme(Scheme scheme, const Scenario& s, const MotorParams& motor,
                             const ChannelRealization& real, const CandidateGrid& grid,
                             const std::vector<double>& cpv) {
    switch (scheme) {
        case Scheme::Proposed: return proposed_solve(s, motor, real, grid, cpv);
        case Scheme::FPA: return fpa_solve(s, motor, real, grid, cpv);
        case Scheme::ConvEE: return conv_ee_solve(s, motor, real, grid, cpv);
        case Scheme::SM: return sm_solve(s, motor, real, grid, cpv);
        case Scheme::PSO: return pso_position_solve(s, motor, real, grid, cpv);
        case Scheme::ZF: return zf_solve(s, motor, real, grid, cpv);
    }
    throw std::logic_error("unreachable");
}

} // namespace maee
