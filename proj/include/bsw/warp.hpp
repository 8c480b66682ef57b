#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bsw/beats.hpp"
#include "bsw/error.hpp"
#include "bsw/numeric.hpp"

namespace bsw {

// Weights and bounds of the warping functional. Defaults follow the
// reference parameterisation: tight smoothing on the amplitude ratio, loose
// on the shift, and a barrier that only fires outside +/-100 samples.
struct WarpConfig {
    double w_r = 20.0;
    double w_s = 1e-4;
    double w_o = 1e10;
    double s_min = -100.0;  // samples
    double s_max = 100.0;   // samples
    int max_iters = 2000;
    double step_size = 1e-3;
    double rel_tol = 1e-6;
};

// r(t) scales the amplitude of f, s(t) shifts the time axis of g:
// r(t) f(t) ~ g(t + s(t)).
struct WarpResult {
    std::vector<double> r;
    std::vector<double> s;
    double loss = 0.0;
    bool converged = false;
    int iters = 0;  // accepted descent steps
};

struct LossTerms {
    double misfit = 0.0;
    double r_smooth = 0.0;
    double s_smooth = 0.0;
    double bound_penalty = 0.0;

    double weighted_sum(const WarpConfig& cfg) const {
        return misfit + cfg.w_r * r_smooth + cfg.w_s * s_smooth +
               cfg.w_o * bound_penalty;
    }
};

namespace detail {

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// keeps the amplitude ratio usable by merge_pair (sqrt(r), 1/sqrt(r))
inline constexpr double kMinRatio = 1e-3;

}  // namespace detail

// The four unweighted terms of the discretized functional:
//   misfit        sum_t (r_t f_t - g(t + s_t))^2
//   r_smooth      sum_t (r_{t+1} - r_t)^2
//   s_smooth      sum_t (s_{t+1} - s_t)^2
//   bound_penalty sum_t (s_min - s_t)_+^2 + (s_t - s_max)_+^2
// g is evaluated at fractional positions by linear interpolation with edge
// clamping; derivatives are forward differences with unit spacing.
inline LossTerms loss_terms(const std::vector<double>& f, const std::vector<double>& g,
                            const std::vector<double>& r, const std::vector<double>& s,
                            const WarpConfig& cfg = {}) {
    const std::size_t n = f.size();
    if (g.size() != n || r.size() != n || s.size() != n)
        fail(ErrorCode::LengthMismatch, "loss_terms requires equal-length inputs");
    LossTerms terms;
    for (std::size_t t = 0; t < n; ++t) {
        const double e = r[t] * f[t] - interp_clamped(g, static_cast<double>(t) + s[t]);
        terms.misfit += e * e;
        const double under = detail::relu(cfg.s_min - s[t]);
        const double over = detail::relu(s[t] - cfg.s_max);
        terms.bound_penalty += under * under + over * over;
    }
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const double dr = r[t + 1] - r[t];
        const double ds = s[t + 1] - s[t];
        terms.r_smooth += dr * dr;
        terms.s_smooth += ds * ds;
    }
    return terms;
}

inline double warp_loss(const std::vector<double>& f, const std::vector<double>& g,
                        const std::vector<double>& r, const std::vector<double>& s,
                        const WarpConfig& cfg = {}) {
    return loss_terms(f, g, r, s, cfg).weighted_sum(cfg);
}

// Analytic gradient of the discretized loss with respect to (r, s).
inline void warp_gradient(const std::vector<double>& f, const std::vector<double>& g,
                          const std::vector<double>& r, const std::vector<double>& s,
                          const WarpConfig& cfg, std::vector<double>& grad_r,
                          std::vector<double>& grad_s) {
    const std::size_t n = f.size();
    grad_r.assign(n, 0.0);
    grad_s.assign(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double pos = static_cast<double>(t) + s[t];
        const double e = r[t] * f[t] - interp_clamped(g, pos);
        grad_r[t] += 2.0 * e * f[t];
        grad_s[t] += -2.0 * e * interp_slope(g, pos);
        grad_s[t] += cfg.w_o * 2.0 *
                     (detail::relu(s[t] - cfg.s_max) - detail::relu(cfg.s_min - s[t]));
    }
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const double dr = r[t + 1] - r[t];
        const double ds = s[t + 1] - s[t];
        grad_r[t] -= cfg.w_r * 2.0 * dr;
        grad_r[t + 1] += cfg.w_r * 2.0 * dr;
        grad_s[t] -= cfg.w_s * 2.0 * ds;
        grad_s[t + 1] += cfg.w_s * 2.0 * ds;
    }
}

namespace detail {

// Solves the r subproblem exactly. With s held fixed the loss is quadratic
// in r: sum_t (r_t f_t - G_t)^2 + w_r sum (r_{t+1} - r_t)^2 where
// G_t = g(t + s_t). The normal equations are a symmetric positive definite
// tridiagonal system (diag f^2 plus w_r times the forward-difference
// Laplacian, ridged so a flat f cannot make it singular); Thomas algorithm.
inline void solve_ratio_subproblem(const std::vector<double>& f,
                                   const std::vector<double>& warped_g,
                                   double w_r, std::vector<double>& r_out) {
    const std::size_t n = f.size();
    double f_sq_max = 0.0;
    for (double v : f) f_sq_max = std::max(f_sq_max, v * v);
    const double ridge = 1e-12 * (1.0 + f_sq_max);

    std::vector<double> diag(n), rhs(n), scratch(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double deg = (t == 0 || t + 1 == n) ? 1.0 : 2.0;
        diag[t] = f[t] * f[t] + w_r * deg + ridge;
        rhs[t] = f[t] * warped_g[t];
    }
    const double off = -w_r;
    r_out.resize(n);
    // forward sweep
    scratch[0] = off / diag[0];
    rhs[0] /= diag[0];
    for (std::size_t t = 1; t < n; ++t) {
        const double m = diag[t] - off * scratch[t - 1];
        scratch[t] = off / m;
        rhs[t] = (rhs[t] - off * rhs[t - 1]) / m;
    }
    // back substitution
    r_out[n - 1] = rhs[n - 1];
    for (std::size_t t = n - 1; t-- > 0;)
        r_out[t] = rhs[t] - scratch[t] * r_out[t + 1];
    for (double& v : r_out) v = std::max(v, kMinRatio);
}

// Gauss-Newton direction for the shift block. Linearizing the misfit in s
// gives a positive definite tridiagonal system
//   (2 diag(g'(t+s)^2) + 2 w_s L + bound diagonal + ridge) ds = -grad_s
// with L the forward-difference Laplacian; Thomas algorithm again.
inline void shift_newton_direction(const std::vector<double>& g,
                                   const std::vector<double>& s,
                                   const std::vector<double>& grad_s,
                                   const WarpConfig& cfg,
                                   std::vector<double>& ds_out) {
    const std::size_t n = s.size();
    std::vector<double> diag(n), rhs(n), scratch(n);
    const double off = -2.0 * cfg.w_s;
    for (std::size_t t = 0; t < n; ++t) {
        const double sl = interp_slope(g, double(t) + s[t]);
        const double deg = (t == 0 || t + 1 == n) ? 1.0 : 2.0;
        diag[t] = 2.0 * sl * sl + 2.0 * cfg.w_s * deg + 1e-9;
        if (s[t] < cfg.s_min || s[t] > cfg.s_max) diag[t] += 2.0 * cfg.w_o;
        rhs[t] = -grad_s[t];
    }
    ds_out.resize(n);
    scratch[0] = off / diag[0];
    rhs[0] /= diag[0];
    for (std::size_t t = 1; t < n; ++t) {
        const double m = diag[t] - off * scratch[t - 1];
        scratch[t] = off / m;
        rhs[t] = (rhs[t] - off * rhs[t - 1]) / m;
    }
    ds_out[n - 1] = rhs[n - 1];
    for (std::size_t t = n - 1; t-- > 0;)
        ds_out[t] = rhs[t] - scratch[t] * ds_out[t + 1];
}

// Coordinate-wise re-seed of the shift field: for each t in turn, place s_t
// at the best value on a one-sample grid centred on its left neighbour
// (keeping the current value as a candidate). The misfit depends on s_t
// alone and the smoothness couples only adjacent samples, so every move
// lowers the total loss; descent steps cannot hop between level-crossing
// basins of g and this sweep relocates shifts whose nearest crossing is not
// the right one. The window keeps the sweep local: an unwindowed search
// happily parks flat-baseline samples on distant zeros of g, which is a
// lower-loss but meaningless warp. Returns true if anything moved.
inline bool reseed_shifts(const std::vector<double>& f, const std::vector<double>& g,
                          const std::vector<double>& r, std::vector<double>& s,
                          const WarpConfig& cfg) {
    const std::size_t n = s.size();
    if (!(cfg.s_max >= cfg.s_min)) return false;
    constexpr double kWindow = 25.0;
    bool moved = false;
    for (std::size_t t = 0; t < n; ++t) {
        const double target = r[t] * f[t];
        const double centre = (t > 0) ? s[t - 1] : s[t];
        auto local_cost = [&](double v) {
            const double e = target - interp_clamped(g, double(t) + v);
            double c = e * e;
            if (t > 0) {
                const double d = v - s[t - 1];
                c += cfg.w_s * d * d;
            }
            if (t + 1 < n) {
                const double d = s[t + 1] - v;
                c += cfg.w_s * d * d;
            }
            const double lo = cfg.s_min - v, hi = v - cfg.s_max;
            if (lo > 0) c += cfg.w_o * lo * lo;
            if (hi > 0) c += cfg.w_o * hi * hi;
            return c;
        };
        double best_v = s[t];
        double best_c = local_cost(best_v);
        for (double v = centre - kWindow; v <= centre + kWindow + 0.5; v += 1.0) {
            const double vv = std::clamp(v, cfg.s_min, cfg.s_max);
            const double c = local_cost(vv);
            if (c < best_c) {
                best_c = c;
                best_v = vv;
            }
        }
        if (best_v != s[t]) {
            s[t] = best_v;
            moved = true;
        }
    }
    return moved;
}

// First-iteration global probe: evaluate every integer constant shift
// s = c with its exact amplitude response r*(c) and return the best loss.
// Descent from (r = 1, s = 0) otherwise commits the amplitude field to
// explaining a feature shift before the shift field can move, which is a
// strong local minimum of the functional; starting from the best constant
// alignment avoids it. c = 0 is always a candidate, so the probe never
// increases the loss.
inline double constant_shift_probe(const std::vector<double>& f,
                                   const std::vector<double>& g,
                                   const WarpConfig& cfg,
                                   std::vector<double>& r_out,
                                   std::vector<double>& s_out,
                                   double current_loss) {
    const std::size_t n = f.size();
    if (!(cfg.s_max >= cfg.s_min)) return current_loss;
    std::vector<double> warped_g(n), r_try(n), s_try(n);
    double best = current_loss;
    const int lo = int(std::ceil(cfg.s_min)), hi = int(std::floor(cfg.s_max));
    for (int c = lo; c <= hi; ++c) {
        for (std::size_t t = 0; t < n; ++t)
            warped_g[t] = interp_clamped(g, double(t) + c);
        solve_ratio_subproblem(f, warped_g, cfg.w_r, r_try);
        s_try.assign(n, double(c));
        const double l = warp_loss(f, g, r_try, s_try, cfg);
        if (std::isfinite(l) && l < best) {
            best = l;
            r_out = r_try;
            s_out = s_try;
        }
    }
    return best;
}

}  // namespace detail

// Minimizes the functional starting from r = 1, s = 0. Each iteration
// refreshes the amplitude field by solving its quadratic subproblem exactly
// (the misfit is linear in r), then takes a Gauss-Newton step on the shift
// field damped by a backtracking line search (halve the fraction on an
// increase, grow 1.2x after a success, never above a full step). When an
// iteration stalls, a coordinate-wise re-seeding sweep relocates shifts
// that descent left in the wrong level-crossing basin of g; the sweep only
// ever lowers the loss, and the loop stops once even the sweep cannot make
// relative progress of rel_tol. r is projected onto [kMinRatio, inf) after
// every step. Accepted steps never increase the loss.
inline WarpResult warp(const std::vector<double>& f, const std::vector<double>& g,
                       const WarpConfig& cfg = {},
                       std::vector<double>* loss_trace = nullptr) {
    const std::size_t n = f.size();
    if (g.size() != n) fail(ErrorCode::LengthMismatch, "warp requires equal-length beats");
    if (n < 2) fail(ErrorCode::LengthMismatch, "warp needs at least 2 samples");
    if (!all_finite(f) || !all_finite(g))
        fail(ErrorCode::NonFiniteInput, "warp inputs must be finite");

    constexpr double kGrow = 1.2;
    constexpr double kShrink = 0.5;
    constexpr double kMinStep = 1e-18;

    WarpResult result;
    result.r.assign(n, 1.0);
    result.s.assign(n, 0.0);
    result.loss = warp_loss(f, g, result.r, result.s, cfg);
    if (loss_trace) loss_trace->push_back(result.loss);

    std::vector<double> grad_r, grad_s;
    std::vector<double> warped_g(n), ds(n), cand_r(n), cand_s(n);
    double step = 1.0;

    for (int it = 0; it < cfg.max_iters; ++it) {
        warp_gradient(f, g, result.r, result.s, cfg, grad_r, grad_s);
        double gmax = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            gmax = std::max({gmax, std::abs(grad_r[t]), std::abs(grad_s[t])});
        if (gmax == 0.0) {
            result.converged = true;  // stationary point, nothing to do
            break;
        }
        const double loss_before = result.loss;

        if (it == 0)
            result.loss = detail::constant_shift_probe(f, g, cfg, result.r,
                                                       result.s, result.loss);

        // amplitude refresh; the projection can in principle spoil the
        // exact solve, so keep it only when it does not increase the loss
        for (std::size_t t = 0; t < n; ++t)
            warped_g[t] = interp_clamped(g, double(t) + result.s[t]);
        detail::solve_ratio_subproblem(f, warped_g, cfg.w_r, cand_r);
        const double r_loss = warp_loss(f, g, cand_r, result.s, cfg);
        if (std::isfinite(r_loss) && r_loss <= result.loss) {
            result.r.swap(cand_r);
            result.loss = r_loss;
        }

        // shift step at the refreshed amplitude
        warp_gradient(f, g, result.r, result.s, cfg, grad_r, grad_s);
        double smax = 0.0;
        for (double v : grad_s) smax = std::max(smax, std::abs(v));
        if (smax > 0.0) {
            detail::shift_newton_direction(g, result.s, grad_s, cfg, ds);
            bool accepted = false;
            while (!accepted) {
                for (std::size_t t = 0; t < n; ++t)
                    cand_s[t] = result.s[t] + step * ds[t];
                const double new_loss = warp_loss(f, g, result.r, cand_s, cfg);
                if (std::isfinite(new_loss) && new_loss <= result.loss) {
                    result.s.swap(cand_s);
                    result.loss = new_loss;
                    accepted = true;
                    step = std::min(step * kGrow, 1.0);
                } else {
                    step *= kShrink;
                    if (step < kMinStep) {
                        if (!std::isfinite(new_loss))
                            fail(ErrorCode::LineSearchUnderflow,
                                 "loss became non-finite and the step underflowed");
                        break;  // no descent possible at machine precision
                    }
                }
            }
        }

        double rel = (loss_before - result.loss) / std::max(loss_before, 1e-300);
        if (rel < cfg.rel_tol) {
            if (detail::reseed_shifts(f, g, result.r, result.s, cfg))
                result.loss = warp_loss(f, g, result.r, result.s, cfg);
            rel = (loss_before - result.loss) / std::max(loss_before, 1e-300);
        }

        result.iters += 1;
        if (loss_trace) loss_trace->push_back(result.loss);
        if (rel < cfg.rel_tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

// Combines a warped pair into a single beat:
//   1/2 ( sqrt(r_t) f(t - s_t/2) + (1/sqrt(r_t)) g(t + s_t/2) )
inline Beat merge_pair(const std::vector<double>& f, const std::vector<double>& g,
                       const WarpResult& result) {
    const std::size_t n = f.size();
    if (g.size() != n || result.r.size() != n || result.s.size() != n)
        fail(ErrorCode::LengthMismatch, "merge_pair requires equal-length inputs");
    Beat out(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double r = result.r[t];
        if (r <= 0.0)
            fail(ErrorCode::NonPositiveRatio,
                 "amplitude ratio must be positive, got " + std::to_string(r));
        const double sq = std::sqrt(r);
        const double half_shift = result.s[t] / 2.0;
        const double ft = interp_clamped(f, static_cast<double>(t) - half_shift);
        const double gt = interp_clamped(g, static_cast<double>(t) + half_shift);
        out[t] = 0.5 * (sq * ft + gt / sq);
    }
    return out;
}

}  // namespace bsw
