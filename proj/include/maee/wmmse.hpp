#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "maee/channel.hpp"
#include "maee/metrics.hpp"

namespace maee {

struct WmmseResult {
    CMatrix w;
    std::vector<double> rate_trace;
    int iterations = 0;
};

namespace detail {

// Power of the weighted-MMSE precoder update for a given Lagrange multiplier.
inline double wmmse_update_power(const CMatrix& h, const CVector& u, const RVector& rho,
                                 double mu, CMatrix& w_out) {
    const Eigen::Index n = h.rows(), k = h.cols();
    CMatrix a = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < k; ++i)
        a += rho(i) * std::norm(u(i)) * (h.col(i) * h.col(i).adjoint());
    a += mu * CMatrix::Identity(n, n);
    Eigen::LDLT<CMatrix> ldlt(a);
    w_out.resize(n, k);
    for (Eigen::Index i = 0; i < k; ++i)
        w_out.col(i) = rho(i) * u(i) * ldlt.solve(h.col(i));
    return w_out.squaredNorm();
}

} // namespace detail

/// Standard three-block WMMSE sum-rate maximization for the MISO downlink:
/// receive scalar, MSE weight, precoder with a power-constraint bisection
/// on the Lagrange multiplier.
inline WmmseResult wmmse_precoding(const CMatrix& h, double p_max, double sigma2,
                                   double tol = 1e-5, int max_iters = 100) {
    const Eigen::Index k = h.cols();
    WmmseResult res;
    res.w = CMatrix(h.rows(), k);
    for (Eigen::Index i = 0; i < k; ++i) res.w.col(i) = h.col(i).normalized();
    res.w *= std::sqrt(p_max / res.w.squaredNorm());

    double rate = sum_rate(h, res.w, sigma2);
    res.rate_trace.push_back(rate);
    for (int it = 0; it < max_iters; ++it) {
        ++res.iterations;
        CVector u(k);
        RVector rho(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            double denom = sigma2;
            for (Eigen::Index j = 0; j < k; ++j) denom += std::norm(h.col(i).dot(res.w.col(j)));
            u(i) = h.col(i).dot(res.w.col(i)) / denom;
            const double mse = 1.0 - std::norm(h.col(i).dot(res.w.col(i))) / denom;
            rho(i) = 1.0 / std::max(mse, 1e-12);
        }
        CMatrix w_new;
        if (detail::wmmse_update_power(h, u, rho, 0.0, w_new) > p_max) {
            double lo = 0.0, hi = 1.0;
            while (detail::wmmse_update_power(h, u, rho, hi, w_new) > p_max) hi *= 2.0;
            for (int b = 0; b < 80; ++b) {
                const double mid = 0.5 * (lo + hi);
                if (detail::wmmse_update_power(h, u, rho, mid, w_new) > p_max) lo = mid;
                else hi = mid;
            }
            detail::wmmse_update_power(h, u, rho, hi, w_new);
        }
        res.w = w_new;
        const double rate_new = sum_rate(h, res.w, sigma2);
        res.rate_trace.push_back(rate_new);
        const bool done = rate_new - rate < tol * std::max(rate, 1e-12);
        rate = rate_new;
        if (done) break;
    }
    return res;
}

} // namespace maee
