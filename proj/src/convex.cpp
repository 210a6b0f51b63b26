#include "uavd2d/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uavd2d {

namespace {

struct BarrierEval {
    bool feasible = false;
    double phi = -std::numeric_limits<double>::infinity();
};

// phi_t(x) = t*f0(x) + sum log g_i(x) + box logs; returns -inf when x is not
// strictly feasible. grad/hess filled only when requested.
BarrierEval eval_barrier(const ConcaveProgram& p, const std::vector<double>& lo,
                         const std::vector<double>& hi, double t, const std::vector<double>& x,
                         std::vector<double>* grad, SquareMatrix* hess,
                         std::vector<double>& gbuf, SquareMatrix& hbuf) {
    const int n = p.dim();
    BarrierEval out;
    for (int j = 0; j < n; ++j)
        if (!(x[j] > lo[j]) || !(x[j] < hi[j])) return out;

    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    if (hess) hess->set_zero();

    double phi = t * p.objective(x, grad ? &gbuf : nullptr, hess ? &hbuf : nullptr);
    if (!std::isfinite(phi)) return out;
    if (grad)
        for (int j = 0; j < n; ++j) (*grad)[j] += t * gbuf[j];
    if (hess)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) (*hess)(a, b) += t * hbuf(a, b);

    for (int i = 0; i < p.num_ineq(); ++i) {
        const double gi = p.inequality(i, x, grad ? &gbuf : nullptr, hess ? &hbuf : nullptr);
        if (!(gi > 0.0) || !std::isfinite(gi)) return out;
        phi += std::log(gi);
        if (grad)
            for (int j = 0; j < n; ++j) (*grad)[j] += gbuf[j] / gi;
        if (hess) {
            const double inv = 1.0 / gi;
            const double inv2 = inv * inv;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    (*hess)(a, b) += hbuf(a, b) * inv - gbuf[a] * gbuf[b] * inv2;
        }
    }
    for (int j = 0; j < n; ++j) {
        const double dl = x[j] - lo[j];
        const double du = hi[j] - x[j];
        phi += std::log(dl) + std::log(du);
        if (grad) (*grad)[j] += 1.0 / dl - 1.0 / du;
        if (hess) (*hess)(j, j) += -1.0 / (dl * dl) - 1.0 / (du * du);
    }
    out.feasible = true;
    out.phi = phi;
    return out;
}

}  // namespace

BarrierResult maximize_concave(const ConcaveProgram& p, const std::vector<double>& lo,
                               const std::vector<double>& hi, std::vector<double> x0,
                               const BarrierOptions& opt) {
    const int n = p.dim();
    const int m_total = p.num_ineq() + 2 * n;

    BarrierResult res;
    res.x = std::move(x0);

    std::vector<double> grad(n), gbuf(n), step(n), xtry(n);
    SquareMatrix hess(n), hbuf(n), chol(n);

    {
        BarrierEval probe = eval_barrier(p, lo, hi, opt.t0, res.x, nullptr, nullptr, gbuf, hbuf);
        if (!probe.feasible) return res;
    }

    double t = opt.t0;
    while (true) {
        for (int it = 0; it < opt.max_newton_per_stage; ++it) {
            BarrierEval cur = eval_barrier(p, lo, hi, t, res.x, &grad, &hess, gbuf, hbuf);
            if (!cur.feasible) return res;
            ++res.newton_steps;

            // Newton direction from A = -hess (positive semidefinite), with a
            // ridge escalated until the factorization succeeds.
            double ridge = 1e-12;
            bool factored = false;
            for (int attempt = 0; attempt < 24 && !factored; ++attempt) {
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) chol(a, b) = -hess(a, b) + (a == b ? ridge : 0.0);
                factored = cholesky(chol);
                ridge *= 16.0;
            }
            if (!factored) return res;
            step = grad;
            cholesky_solve(chol, step);

            double decrement = 0.0;
            for (int j = 0; j < n; ++j) decrement += grad[j] * step[j];
            if (decrement * 0.5 <= opt.newton_tol) break;

            double s = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (int j = 0; j < n; ++j) xtry[j] = res.x[j] + s * step[j];
                BarrierEval trial = eval_barrier(p, lo, hi, t, xtry, nullptr, nullptr, gbuf, hbuf);
                if (trial.feasible && trial.phi >= cur.phi + 0.25 * s * decrement) {
                    res.x = xtry;
                    moved = true;
                    break;
                }
                s *= 0.5;
            }
            if (!moved) break;
        }
        if (static_cast<double>(m_total) / t <= opt.gap_tol) break;
        t = std::min(t * opt.mu, static_cast<double>(m_total) / opt.gap_tol);
    }

    res.objective = p.objective(res.x, nullptr, nullptr);
    res.converged = true;
    return res;
}

}  // namespace uavd2d
