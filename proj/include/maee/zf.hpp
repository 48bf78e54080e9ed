#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "maee/channel.hpp"
#include "maee/kinematics.hpp"
#include "maee/metrics.hpp"
#include "maee/motor.hpp"
#include "maee/solution.hpp"

namespace maee {

namespace detail {

struct ZfDirections {
    CMatrix directions;  // normalized columns
    RVector gains;       // |h_k^H f_k|^2 for the normalized columns
    bool ok = false;
};

inline ZfDirections zf_directions(const CMatrix& h) {
    ZfDirections out;
    const Eigen::Index k = h.cols();
    const CMatrix gram = h.adjoint() * h;
    Eigen::FullPivLU<CMatrix> lu(gram);
    if (!lu.isInvertible()) return out;
    const CMatrix f = h * lu.inverse();
    out.directions.resize(h.rows(), k);
    out.gains.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double norm = f.col(i).norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) return out;
        out.directions.col(i) = f.col(i) / norm;
        out.gains(i) = 1.0 / (norm * norm); // h_k^H f_k = 1 before normalization
    }
    out.ok = true;
    return out;
}

struct ZfPower {
    RVector p;
    double ee = 0.0;
};

// Dinkelbach power allocation over interference-free effective channels,
// with a water-filling inner step under the sum-power constraint.
inline ZfPower zf_power_dinkelbach(const RVector& cnr, double a, double b, double p_max,
                                   double tol = 1e-6, int max_iters = 50) {
    const int k = static_cast<int>(cnr.size());
    const double ln2 = std::log(2.0);
    auto alloc = [&](double level) { // p_k = [level - 1/c_k]^+
        RVector p(k);
        for (int i = 0; i < k; ++i) p(i) = std::max(level - 1.0 / cnr(i), 0.0);
        return p;
    };
    auto ratio = [&](const RVector& p) {
        double r = 0.0;
        for (int i = 0; i < k; ++i) r += std::log2(1.0 + p(i) * cnr(i));
        return a * r / (a * p.sum() + b);
    };
    double eta = 0.0;
    RVector p = RVector::Zero(k);
    for (int l = 0; l < max_iters; ++l) {
        double level;
        if (eta <= 0.0) {
            level = std::numeric_limits<double>::infinity();
        } else {
            level = 1.0 / (eta * ln2);
        }
        p = std::isinf(level) ? RVector::Constant(k, p_max) : alloc(level);
        if (p.sum() > p_max) { // water-fill down to the power budget
            double lo_l = 0.0, hi_l = std::isinf(level) ? 1.0 : level;
            while (alloc(hi_l).sum() < p_max) hi_l *= 2.0;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo_l + hi_l);
                if (alloc(mid).sum() > p_max) hi_l = mid;
                else lo_l = mid;
            }
            p = alloc(lo_l);
        }
        const double eta_new = ratio(p);
        const bool done = std::abs(eta_new - eta) < tol;
        eta = eta_new;
        if (done) break;
    }
    return {p, eta};
}

} // namespace detail

/// Zero-forcing benchmark: W fixed to the ZF directions, per-user powers by
/// Dinkelbach water-filling, positions by the sequential update.
inline Solution zf_solve(const Scenario& s, const MotorParams& motor,
                         const ChannelRealization& real, const CandidateGrid& grid,
                         const std::vector<double>& cpv, double tol = 1e-4) {
    if (s.num_users > s.num_antennas)
        throw std::invalid_argument("zf_solve: requires K <= N");
    const double v_max = motor.max_linear_speed();
    const double reach = v_max * s.coherence_time;

    // per-grid-point channel entries, shared by every candidate evaluation
    std::vector<std::vector<Complex>> cache(static_cast<std::size_t>(s.num_users));
    for (int k = 0; k < s.num_users; ++k) {
        cache[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(grid.count));
        for (int m = 0; m < grid.count; ++m)
            cache[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] =
                channel_entry(s, real, k, grid.position(m));
    }

    auto candidate_ee = [&](const std::vector<int>& idx) -> double {
        const int n = static_cast<int>(idx.size());
        CMatrix h(n, s.num_users);
        for (int k = 0; k < s.num_users; ++k)
            for (int i = 0; i < n; ++i)
                h(i, k) = cache[static_cast<std::size_t>(k)]
                               [static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        const detail::ZfDirections zf = detail::zf_directions(h);
        if (!zf.ok) return -std::numeric_limits<double>::infinity();
        double tau = 0.0, total = 0.0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double leg = std::abs(grid.position(idx[i]) - cpv[i]) / v_max;
            tau = std::max(tau, leg);
            total += leg;
        }
        const double a = s.coherence_time - tau;
        const double b = a * s.p_static + motor_power(motor, v_max) * total;
        const RVector cnr = zf.gains / s.noise_power;
        return detail::zf_power_dinkelbach(cnr, a, b, s.p_max).ee;
    };

    std::vector<int> idx(cpv.size());
    for (std::size_t i = 0; i < cpv.size(); ++i) idx[i] = grid.nearest_index(cpv[i]);
    double ee = candidate_ee(idx);
    Solution sol;
    sol.ee_trace.push_back(ee);
    for (int round = 0; round < 50; ++round) {
        const double ee_before = ee;
        for (std::size_t n = 0; n < idx.size(); ++n) {
            int best_m = idx[n];
            double best_ee = ee;
            std::vector<int> trial = idx;
            for (int m = 0; m < grid.count; ++m) {
                const double x = grid.position(m);
                if (std::abs(x - cpv[n]) > reach + 1e-12) continue;
                bool feasible = true;
                for (std::size_t j = 0; j < idx.size() && feasible; ++j)
                    if (j != n && std::abs(x - grid.position(idx[j])) < s.d_min - 1e-12)
                        feasible = false;
                if (!feasible) continue;
                trial[n] = m;
                const double cand = candidate_ee(trial);
                if (cand > best_ee) {
                    best_ee = cand;
                    best_m = m;
                }
            }
            idx[n] = best_m;
            ee = best_ee;
            sol.ee_trace.push_back(ee);
        }
        ++sol.iterations;
        if (ee - ee_before < tol * std::max(ee_before, 1e-300)) break;
    }

    std::vector<double> dpv(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) dpv[i] = grid.position(idx[i]);
    CMatrix h = channel_matrix(s, real, dpv);
    const detail::ZfDirections zf = detail::zf_directions(h);
    if (!zf.ok) throw std::runtime_error("zf_solve: rank-deficient channel at the final DPV");
    const Delays d = movement_delays(cpv, dpv, v_max);
    const double a = s.coherence_time - d.max;
    const double b = a * s.p_static + motor_power(motor, v_max) * d.total;
    const detail::ZfPower power =
        detail::zf_power_dinkelbach(zf.gains / s.noise_power, a, b, s.p_max);
    CMatrix w(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < h.cols(); ++i)
        w.col(i) = std::sqrt(power.p(i)) * zf.directions.col(i);
    const Renumbering ren = renumber_sorted(dpv, w);
    sol.dpv = ren.dpv;
    sol.precoder = ren.precoder;
    sol.speed = v_max;
    sol.breakdown = energy_efficiency(s, motor, cpv, sol.dpv, v_max, sol.precoder,
                                      channel_matrix(s, real, sol.dpv));
    return sol;
}

} // namespace maee
