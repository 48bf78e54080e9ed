#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace maee {

struct Delays {
    std::vector<double> per_antenna; // tau_n = |x_n - x_n^0| / v
    double max = 0.0;                // tau
    double total = 0.0;              // sum_n tau_n
};

inline Delays movement_delays(const std::vector<double>& cpv, const std::vector<double>& dpv,
                              double v) {
    if (!(v > 0.0)) throw std::invalid_argument("movement_delays: v must be > 0");
    if (cpv.size() != dpv.size()) throw std::invalid_argument("movement_delays: size mismatch");
    Delays d;
    d.per_antenna.resize(cpv.size());
    for (std::size_t n = 0; n < cpv.size(); ++n) {
        d.per_antenna[n] = std::abs(dpv[n] - cpv[n]) / v;
        d.max = std::max(d.max, d.per_antenna[n]);
        d.total += d.per_antenna[n];
    }
    return d;
}

/// Constant-speed movement plan from CPV to DPV.
struct MovePlan {
    std::vector<double> cpv;
    std::vector<double> dpv;
    double speed = 0.0;
    Delays delays;

    MovePlan(std::vector<double> cpv_, std::vector<double> dpv_, double v)
        : cpv(std::move(cpv_)), dpv(std::move(dpv_)), speed(v),
          delays(movement_delays(cpv, dpv, v)) {}
};

/// Position of antenna n at time t in [0, tau]: moves toward its target at
/// constant speed, then parks.
inline double trajectory_position(const MovePlan& plan, std::size_t n, double t) {
    if (t < -1e-15 || t > plan.delays.max + 1e-15)
        throw std::invalid_argument("trajectory_position: t outside [0, tau]");
    const double x0 = plan.cpv.at(n);
    const double x1 = plan.dpv.at(n);
    if (t >= plan.delays.per_antenna[n]) return x1;
    const double sgn = (x1 > x0) ? 1.0 : (x1 < x0 ? -1.0 : 0.0);
    return x0 + plan.speed * t * sgn;
}

struct CollisionReport {
    bool ok = true;
    std::size_t i = 0, j = 0; // offending pair, i < j
    double time = 0.0;        // earliest violating instant
};

namespace detail {

// Earliest t in [t0, t1] with |d0 + slope*(t - t0)| < th, or a negative
// value if none. d is linear on the segment so |d| is piecewise linear
// with at most one kink.
inline double first_below(double t0, double t1, double d0, double d1, double th) {
    const double tol = 1e-12;
    if (std::abs(d0) < th - tol) return t0;
    if (t1 <= t0) return -1.0;
    const double slope = (d1 - d0) / (t1 - t0);
    if (d0 >= th - tol) { // approaching from above +th
        if (d1 >= th - tol) return -1.0;
        return t0 + (d0 - (th - tol)) / -slope;
    }
    // d0 <= -(th - tol): approaching from below -th
    if (d1 <= -(th - tol)) return -1.0;
    return t0 + (-(th - tol) - d0) / slope;
}

} // namespace detail

/// Exact check of the collision-avoidance constraint |s_i(t) - s_j(t)| >= D_th
/// for all t in [0, tau]. Piecewise-linear analysis; no time sampling.
inline CollisionReport check_collision_free(const MovePlan& plan, double d_th) {
    const std::size_t n = plan.cpv.size();
    CollisionReport best;
    best.ok = true;
    double best_t = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // segment boundaries of the pairwise distance
            std::vector<double> ts = {0.0, plan.delays.per_antenna[i],
                                      plan.delays.per_antenna[j], plan.delays.max};
            std::sort(ts.begin(), ts.end());
            ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
            if (ts.size() == 1) ts.push_back(ts.front()); // static pair, single instant
            for (std::size_t s = 0; s + 1 < ts.size(); ++s) {
                const double t0 = ts[s];
                const double t1 = ts[s + 1];
                const double d0 = trajectory_position(plan, i, t0) - trajectory_position(plan, j, t0);
                const double d1 = trajectory_position(plan, i, t1) - trajectory_position(plan, j, t1);
                const double tv = detail::first_below(t0, t1, d0, d1, d_th);
                if (tv >= 0.0 && tv < best_t) {
                    best_t = tv;
                    best = CollisionReport{false, i, j, tv};
                }
            }
        }
    }
    return best;
}

struct Renumbering {
    std::vector<double> dpv;       // ascending
    Eigen::MatrixXcd precoder;     // rows permuted alongside dpv
    std::vector<std::size_t> perm; // dpv[n] = input_dpv[perm[n]]
};

/// Sorts the DPV ascending and applies the same permutation to the precoder
/// rows. Leaves sum rate, transmit power and motor power untouched while
/// never increasing the total or maximum delay.
inline Renumbering renumber_sorted(const std::vector<double>& dpv, const Eigen::MatrixXcd& w) {
    if (static_cast<std::size_t>(w.rows()) != dpv.size())
        throw std::invalid_argument("renumber_sorted: precoder rows must match dpv length");
    Renumbering r;
    r.perm.resize(dpv.size());
    std::iota(r.perm.begin(), r.perm.end(), std::size_t{0});
    std::sort(r.perm.begin(), r.perm.end(),
              [&](std::size_t a, std::size_t b) { return dpv[a] < dpv[b]; });
    r.dpv.resize(dpv.size());
    r.precoder.resize(w.rows(), w.cols());
    for (std::size_t n = 0; n < dpv.size(); ++n) {
        r.dpv[n] = dpv[r.perm[n]];
        r.precoder.row(static_cast<Eigen::Index>(n)) = w.row(static_cast<Eigen::Index>(r.perm[n]));
    }
    return r;
}

struct DelayOracleResult {
    std::vector<std::size_t> perm;
    double total_delay = 0.0;
};

/// Factorial-enumeration minimizer of sum_n |x_{pi(n)} - x_n^0| / v.
/// Test oracle; N <= 8.
inline DelayOracleResult min_total_delay_oracle(const std::vector<double>& cpv,
                                                const std::vector<double>& dpv, double v) {
    if (cpv.size() != dpv.size()) throw std::invalid_argument("min_total_delay_oracle: size mismatch");
    if (cpv.size() > 8) throw std::invalid_argument("min_total_delay_oracle: N > 8");
    if (!(v > 0.0)) throw std::invalid_argument("min_total_delay_oracle: v must be > 0");
    std::vector<std::size_t> idx(cpv.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    DelayOracleResult best;
    best.total_delay = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t n = 0; n < cpv.size(); ++n) total += std::abs(dpv[idx[n]] - cpv[n]);
        total /= v;
        if (total < best.total_delay) {
            best.total_delay = total;
            best.perm = idx;
        }
    } while (std::next_permutation(idx.begin(), idx.end()));
    return best;
}

/// |a-c| + |b-d| <= |a-d| + |b-c| for positive a<b, c<d. Non-strict: equality
/// is attainable for disjoint intervals.
inline bool lemma1_check(double a, double b, double c, double d) {
    if (!(a > 0 && b > 0 && c > 0 && d > 0) || !(a < b) || !(c < d))
        throw std::invalid_argument("lemma1_check: requires positive a<b and c<d");
    return std::abs(a - c) + std::abs(b - d) <= std::abs(a - d) + std::abs(b - c);
}

} // namespace maee
