#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "maee/channel.hpp"

namespace maee {

using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// One linearized precoding subproblem: maximize
///   a * sum_k log2(1 + chi_k) - eta * (a * ||W||_F^2 + b)
/// subject to the transmit power ball, the interference slack quadratics
/// and the first-order cut of sqrt(xi_k * chi_k) at (chi_bar, xi_bar).
struct ScaSubproblem {
    CMatrix h;          // N x K channel columns
    double eta = 0.0;
    double a = 0.0;
    double b = 0.0;
    double sigma2 = 1.0;
    double p_max = 1.0;
    RVector chi_bar;    // linearization point, strictly positive
    RVector xi_bar;     // linearization point (includes sigma2), strictly positive
};

struct ScaState {
    CMatrix w;
    RVector chi;
    RVector xi;              // interference-plus-noise slacks, original units
    double objective = 0.0;  // subproblem objective at the solution
    double kkt_residual = 0.0;
    double max_violation = 0.0;
    int newton_steps = 0;
    bool recentred = false;  // restore step was taken
};

namespace detail {

// Real parametrization: z = [Re w_0, Im w_0, ..., Re w_{K-1}, Im w_{K-1},
// chi_0..chi_{K-1}, xi_0..xi_{K-1}], with sigma^2 normalized to 1.
struct ScaWork {
    int n = 0, k = 0, dim = 0, m = 0;
    double eta, a, b, p_max;
    std::vector<RVector> g_re; // [Re h; Im h] per user, normalized
    std::vector<RVector> g_im; // [-Im h; Re h] per user
    RVector alpha, beta, gamma;
    RVector chi_bar, xi_bar;   // normalized
    static constexpr double xi_min = 1e-12;
    static constexpr double chi_min = 0.0;

    explicit ScaWork(const ScaSubproblem& p) {
        n = static_cast<int>(p.h.rows());
        k = static_cast<int>(p.h.cols());
        dim = 2 * n * k + 2 * k;
        m = 1 + 4 * k;
        eta = p.eta;
        a = p.a;
        b = p.b;
        p_max = p.p_max;
        const double inv_sigma = 1.0 / std::sqrt(p.sigma2);
        g_re.resize(k);
        g_im.resize(k);
        for (int u = 0; u < k; ++u) {
            RVector re(2 * n), im(2 * n);
            for (int i = 0; i < n; ++i) {
                const Complex h = p.h(i, u) * inv_sigma;
                re(i) = h.real();
                re(n + i) = h.imag();
                im(i) = -h.imag();
                im(n + i) = h.real();
            }
            g_re[u] = re;
            g_im[u] = im;
        }
        chi_bar = p.chi_bar;
        xi_bar = p.xi_bar / p.sigma2;
        alpha.resize(k);
        beta.resize(k);
        gamma.resize(k);
        for (int u = 0; u < k; ++u) {
            if (!(chi_bar(u) > 0.0) || !(xi_bar(u) > 0.0))
                throw std::invalid_argument("sca_subproblem: linearization point must be positive");
            alpha(u) = std::sqrt(xi_bar(u) * chi_bar(u));
            beta(u) = 0.5 * std::sqrt(chi_bar(u) / xi_bar(u));
            gamma(u) = 0.5 * std::sqrt(xi_bar(u) / chi_bar(u));
        }
    }

    int wofs(int col) const { return 2 * n * col; }
    int chiofs() const { return 2 * n * k; }
    int xiofs() const { return 2 * n * k + k; }

    double inner_re(const RVector& z, int user, int col) const {
        return g_re[user].dot(z.segment(wofs(col), 2 * n));
    }
    double inner_im(const RVector& z, int user, int col) const {
        return g_im[user].dot(z.segment(wofs(col), 2 * n));
    }
    double cross_power(const RVector& z, int user, int col) const {
        const double re = inner_re(z, user, col), im = inner_im(z, user, col);
        return re * re + im * im;
    }
    double w_norm2(const RVector& z) const { return z.head(2 * n * k).squaredNorm(); }

    double objective(const RVector& z) const {
        double f = 0.0;
        for (int u = 0; u < k; ++u) f += std::log2(1.0 + z(chiofs() + u));
        return a * f - eta * (a * w_norm2(z) + b);
    }

    // constraint values, all feasible iff < 0
    void constraints(const RVector& z, RVector& c) const {
        c.resize(m);
        int idx = 0;
        c(idx++) = w_norm2(z) - p_max;
        for (int u = 0; u < k; ++u) { // interference slack
            double intf = 0.0;
            for (int i = 0; i < k; ++i)
                if (i != u) intf += cross_power(z, u, i);
            c(idx++) = intf + 1.0 - z(xiofs() + u);
        }
        for (int u = 0; u < k; ++u) { // linearized sqrt cut
            const double chi = z(chiofs() + u), xi = z(xiofs() + u);
            c(idx++) = alpha(u) + beta(u) * (xi - xi_bar(u)) + gamma(u) * (chi - chi_bar(u))
                     - inner_re(z, u, u);
        }
        for (int u = 0; u < k; ++u) c(idx++) = chi_min - z(chiofs() + u);
        for (int u = 0; u < k; ++u) c(idx++) = xi_min - z(xiofs() + u);
    }

    bool strictly_feasible(const RVector& z) const {
        RVector c;
        constraints(z, c);
        return (c.array() < 0.0).all();
    }

    RVector grad_f(const RVector& z) const {
        const double ln2 = std::log(2.0);
        RVector g = RVector::Zero(dim);
        g.head(2 * n * k) = -2.0 * eta * a * z.head(2 * n * k);
        for (int u = 0; u < k; ++u) g(chiofs() + u) = a / ((1.0 + z(chiofs() + u)) * ln2);
        return g;
    }

    // rows of the constraint Jacobian, same ordering as constraints()
    RMatrix jacobian(const RVector& z) const {
        RMatrix jac = RMatrix::Zero(m, dim);
        int idx = 0;
        jac.row(idx++).head(2 * n * k) = 2.0 * z.head(2 * n * k);
        for (int u = 0; u < k; ++u, ++idx) {
            jac(idx, xiofs() + u) = -1.0;
            for (int i = 0; i < k; ++i) {
                if (i == u) continue;
                const double re = inner_re(z, u, i), im = inner_im(z, u, i);
                jac.row(idx).segment(wofs(i), 2 * n) += 2.0 * (re * g_re[u] + im * g_im[u]);
            }
        }
        for (int u = 0; u < k; ++u, ++idx) {
            jac(idx, xiofs() + u) = beta(u);
            jac(idx, chiofs() + u) = gamma(u);
            jac.row(idx).segment(wofs(u), 2 * n) = -g_re[u];
        }
        for (int u = 0; u < k; ++u, ++idx) jac(idx, chiofs() + u) = -1.0;
        for (int u = 0; u < k; ++u, ++idx) jac(idx, xiofs() + u) = -1.0;
        return jac;
    }

    // Hessian of the Lagrangian f - lambda^T c (f concave, c_i convex)
    RMatrix lagrangian_hessian(const RVector& z, const RVector& lambda) const {
        const double ln2 = std::log(2.0);
        RMatrix h = RMatrix::Zero(dim, dim);
        h.diagonal().head(2 * n * k).array() = -2.0 * eta * a - 2.0 * lambda(0);
        for (int u = 0; u < k; ++u) {
            const double chi = z(chiofs() + u);
            h(chiofs() + u, chiofs() + u) = -a / ((1.0 + chi) * (1.0 + chi) * ln2);
        }
        for (int u = 0; u < k; ++u) {
            const RMatrix outer =
                g_re[u] * g_re[u].transpose() + g_im[u] * g_im[u].transpose();
            for (int i = 0; i < k; ++i) {
                if (i == u) continue;
                h.block(wofs(i), wofs(i), 2 * n, 2 * n) -= 2.0 * lambda(1 + u) * outer;
            }
        }
        return h;
    }

    // phi_t = -t*F + barrier; fills gradient and Hessian when requested.
    double barrier(const RVector& z, double t, RVector* grad, RMatrix* hess) const {
        RVector c;
        constraints(z, c);
        const double ln2 = std::log(2.0);
        double phi = -t * objective(z);
        if (grad) grad->setZero(dim);
        if (hess) hess->setZero(dim, dim);

        if (grad) {
            for (int u = 0; u < k; ++u) {
                const double chi = z(chiofs() + u);
                (*grad)(chiofs() + u) -= t * a / ((1.0 + chi) * ln2);
                if (hess) (*hess)(chiofs() + u, chiofs() + u) += t * a / ((1.0 + chi) * (1.0 + chi) * ln2);
            }
            grad->head(2 * n * k) += 2.0 * t * eta * a * z.head(2 * n * k);
            if (hess)
                hess->diagonal().head(2 * n * k).array() += 2.0 * t * eta * a;
        }

        int idx = 0;
        auto add_log = [&](double ci) {
            if (!(ci < 0.0)) throw std::domain_error("sca barrier: infeasible point");
            phi -= std::log(-ci);
        };

        // power ball
        {
            const double ci = c(idx);
            add_log(ci);
            if (grad) {
                const double s = 1.0 / (-ci);
                RVector gc = RVector::Zero(dim);
                gc.head(2 * n * k) = 2.0 * z.head(2 * n * k);
                *grad += s * gc;
                if (hess) {
                    *hess += (s * s) * (gc * gc.transpose());
                    hess->diagonal().head(2 * n * k).array() += 2.0 * s;
                }
            }
            ++idx;
        }
        // interference quadratics
        for (int u = 0; u < k; ++u, ++idx) {
            const double ci = c(idx);
            add_log(ci);
            if (!grad) continue;
            const double s = 1.0 / (-ci);
            RVector gc = RVector::Zero(dim);
            gc(xiofs() + u) = -1.0;
            for (int i = 0; i < k; ++i) {
                if (i == u) continue;
                const double re = inner_re(z, u, i), im = inner_im(z, u, i);
                gc.segment(wofs(i), 2 * n) += 2.0 * (re * g_re[u] + im * g_im[u]);
            }
            *grad += s * gc;
            if (hess) {
                *hess += (s * s) * (gc * gc.transpose());
                for (int i = 0; i < k; ++i) {
                    if (i == u) continue;
                    auto blk = hess->block(wofs(i), wofs(i), 2 * n, 2 * n);
                    blk += (2.0 * s) * (g_re[u] * g_re[u].transpose() + g_im[u] * g_im[u].transpose());
                }
            }
        }
        // linear cuts
        for (int u = 0; u < k; ++u, ++idx) {
            const double ci = c(idx);
            add_log(ci);
            if (!grad) continue;
            const double s = 1.0 / (-ci);
            RVector gc = RVector::Zero(dim);
            gc(xiofs() + u) = beta(u);
            gc(chiofs() + u) = gamma(u);
            gc.segment(wofs(u), 2 * n) = -g_re[u];
            *grad += s * gc;
            if (hess) *hess += (s * s) * (gc * gc.transpose());
        }
        // bounds
        for (int u = 0; u < k; ++u, ++idx) {
            const double ci = c(idx);
            add_log(ci);
            if (grad) {
                (*grad)(chiofs() + u) += -1.0 / (-ci);
                if (hess) (*hess)(chiofs() + u, chiofs() + u) += 1.0 / (ci * ci);
            }
        }
        for (int u = 0; u < k; ++u, ++idx) {
            const double ci = c(idx);
            add_log(ci);
            if (grad) {
                (*grad)(xiofs() + u) += -1.0 / (-ci);
                if (hess) (*hess)(xiofs() + u, xiofs() + u) += 1.0 / (ci * ci);
            }
        }
        return phi;
    }
};

inline RVector pack_state(const ScaWork& w, const CMatrix& mat, const RVector& chi,
                          const RVector& xi_norm) {
    RVector z(w.dim);
    for (int col = 0; col < w.k; ++col)
        for (int i = 0; i < w.n; ++i) {
            z(w.wofs(col) + i) = mat(i, col).real();
            z(w.wofs(col) + w.n + i) = mat(i, col).imag();
        }
    z.segment(w.chiofs(), w.k) = chi;
    z.segment(w.xiofs(), w.k) = xi_norm;
    return z;
}

} // namespace detail

/// Rotates w_k by the phase of h_k^H w_k so the inner product becomes real
/// and nonnegative; every SINR is invariant under this rotation.
inline CVector rotate_real(const CVector& h, const CVector& w) {
    const Complex ip = h.dot(w); // conj(h) . w
    if (std::abs(ip) == 0.0) return w;
    return w * std::polar(1.0, -std::arg(ip));
}

/// Solves one SCA subproblem with a log-barrier Newton method over the
/// 2NK + 2K real unknowns. `w0` must be feasible for the power ball; the
/// start point is pulled strictly inside all constraints, re-centering the
/// linearization at w0's true SINR/interference values if necessary.
inline ScaState solve_sca_subproblem(const ScaSubproblem& prob, const CMatrix& w0_in,
                                     double kkt_gap = 1e-9) {
    detail::ScaWork work(prob);
    const int n = work.n, k = work.k;
    ScaState out;

    CMatrix w0 = w0_in;
    const double inv_sigma2 = 1.0 / prob.sigma2;
    for (int u = 0; u < k; ++u) {
        // the linear cut needs Re(h_k^H w_k) > 0 at the start
        if (std::abs(prob.h.col(u).dot(w0.col(u))) < 1e-15 * prob.h.col(u).norm() * std::sqrt(prob.p_max))
            w0.col(u) += (1e-6 * std::sqrt(prob.p_max)) * prob.h.col(u).normalized();
        w0.col(u) = rotate_real(prob.h.col(u), w0.col(u));
    }
    if (w0.squaredNorm() > prob.p_max * (1.0 - 1e-9))
        w0 *= std::sqrt(prob.p_max * (1.0 - 1e-8) / w0.squaredNorm());

    // strictly interior start near the incumbent
    auto build_start = [&](const RVector& chi_c, const RVector& xi_c) {
        RVector chi = chi_c * (1.0 - 1e-6);
        RVector xi = xi_c * (1.0 + 1e-8);
        chi = chi.cwiseMax(1e-12);
        return detail::pack_state(work, w0, chi, xi);
    };

    RVector z = build_start(work.chi_bar, work.xi_bar);
    if (!work.strictly_feasible(z)) {
        // restore step: re-center the linearization at the incumbent's
        // true SINR and interference values
        RVector chi_t(k), xi_t(k);
        for (int u = 0; u < k; ++u) {
            double intf = 0.0;
            for (int i = 0; i < k; ++i)
                if (i != u) intf += std::norm(prob.h.col(u).dot(w0.col(i))) * inv_sigma2;
            xi_t(u) = intf + 1.0;
            const double sig = std::norm(prob.h.col(u).dot(w0.col(u))) * inv_sigma2;
            chi_t(u) = std::max(sig / xi_t(u), 1e-10);
        }
        work.chi_bar = chi_t;
        work.xi_bar = xi_t;
        for (int u = 0; u < k; ++u) {
            work.alpha(u) = std::sqrt(xi_t(u) * chi_t(u));
            work.beta(u) = 0.5 * std::sqrt(chi_t(u) / xi_t(u));
            work.gamma(u) = 0.5 * std::sqrt(xi_t(u) / chi_t(u));
        }
        out.recentred = true;
        z = build_start(chi_t, xi_t);
        if (!work.strictly_feasible(z))
            throw std::runtime_error("sca_subproblem: could not build a strictly feasible start");
    }

    double t = 1.0;
    const double mu = 30.0;
    RVector grad(work.dim);
    RMatrix hess(work.dim, work.dim);
    while (true) {
        for (int step = 0; step < 200; ++step) {
            const double phi = work.barrier(z, t, &grad, &hess);
            if (grad.lpNorm<Eigen::Infinity>() / t < 0.1 * kkt_gap) break;
            Eigen::LDLT<RMatrix> ldlt(hess);
            RVector p = -ldlt.solve(grad);
            double descent = grad.dot(p);
            if (!(descent < 0.0)) { // regularize and retry once
                RMatrix h2 = hess;
                h2.diagonal().array() += 1e-10 * hess.diagonal().maxCoeff() + 1e-300;
                p = -Eigen::LDLT<RMatrix>(h2).solve(grad);
                descent = grad.dot(p);
                if (!(descent < 0.0)) break;
            }
            if (-descent * 0.5 < 1e-18 * (1.0 + std::abs(phi))) break;
            double s = 1.0;
            bool moved = false;
            while (s > 1e-14) {
                RVector zn = z + s * p;
                if (work.strictly_feasible(zn)) {
                    const double phin = work.barrier(zn, t, nullptr, nullptr);
                    if (phin <= phi + 0.25 * s * descent) {
                        z = zn;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            ++out.newton_steps;
            if (!moved) break;
        }
        if (work.m / t < kkt_gap) break;
        t *= mu;
    }

    // primal-dual polish: Newton on the perturbed KKT system
    //   grad f - J^T lambda = 0,  -lambda_i c_i = 1/t,  c < 0, lambda > 0,
    // which sharpens the stationarity residual far below what centering the
    // monolithic barrier can reach at large t in double precision.
    {
        RVector c;
        work.constraints(z, c);
        RVector lambda(work.m);
        for (int i = 0; i < work.m; ++i) lambda(i) = 1.0 / (t * (-c(i)));

        auto dual_residual = [&](const RVector& zz, const RVector& ll) {
            return (work.grad_f(zz) - work.jacobian(zz).transpose() * ll)
                .eval();
        };
        double best = dual_residual(z, lambda).lpNorm<Eigen::Infinity>();
        RVector z_best = z, l_best = lambda;
        for (int it = 0; it < 30 && best > 0.01 * kkt_gap; ++it) {
            const RMatrix jac = work.jacobian(z);
            const RVector r_dual = work.grad_f(z) - jac.transpose() * lambda;
            RVector r_cent(work.m);
            for (int i = 0; i < work.m; ++i) r_cent(i) = -lambda(i) * c(i) - 1.0 / t;

            RMatrix kkt = RMatrix::Zero(work.dim + work.m, work.dim + work.m);
            kkt.topLeftCorner(work.dim, work.dim) = work.lagrangian_hessian(z, lambda);
            kkt.topRightCorner(work.dim, work.m) = -jac.transpose();
            kkt.bottomLeftCorner(work.m, work.dim) = (-lambda).asDiagonal() * jac;
            kkt.bottomRightCorner(work.m, work.m) = (-c).asDiagonal();
            RVector rhs(work.dim + work.m);
            rhs.head(work.dim) = -r_dual;
            rhs.tail(work.m) = -r_cent;
            const RVector d = Eigen::PartialPivLU<RMatrix>(kkt).solve(rhs);
            const RVector dz = d.head(work.dim);
            const RVector dl = d.tail(work.m);

            double s = 1.0;
            for (int i = 0; i < work.m; ++i)
                if (dl(i) < 0.0) s = std::min(s, -0.995 * lambda(i) / dl(i));
            bool improved = false;
            for (int ls = 0; ls < 40 && !improved; ++ls, s *= 0.5) {
                const RVector zn = z + s * dz;
                if (!work.strictly_feasible(zn)) continue;
                const RVector ln = lambda + s * dl;
                const double res = dual_residual(zn, ln).lpNorm<Eigen::Infinity>();
                if (res < best) {
                    z = zn;
                    lambda = ln;
                    work.constraints(z, c);
                    best = res;
                    z_best = z;
                    l_best = lambda;
                    improved = true;
                }
            }
            if (!improved) break;
        }
        z = z_best;
        out.kkt_residual = best;
    }
    RVector c;
    work.constraints(z, c);
    out.max_violation = std::max(0.0, c.maxCoeff());
    out.w.resize(n, k);
    for (int col = 0; col < k; ++col)
        for (int i = 0; i < n; ++i)
            out.w(i, col) = Complex(z(work.wofs(col) + i), z(work.wofs(col) + work.n + i));
    out.chi = z.segment(work.chiofs(), k);
    out.xi = z.segment(work.xiofs(), k) * prob.sigma2;
    out.objective = work.objective(z);
    return out;
}

} // namespace maee
