#pragma once

#include "wahtor/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

namespace wahtor {

struct LbfgsOptions {
    int memory = 10;
    double gradient_tolerance = 1e-8; // infinity norm
    double energy_tolerance = 1e-10;  // absolute change between accepted iterates
    int max_evaluations = 10000;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search = 40;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    Eigen::VectorXd gradient;
    int n_evaluations = 0;
    int n_iterations = 0;
    bool converged = false;
    std::string reason;
};

namespace detail {

// Minimizer of the cubic interpolating (a, fa, ga) and (b, fb, gb), clamped into the bracket.
inline double cubic_step(double a, double fa, double ga, double b, double fb, double gb) {
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - ga * gb;
    double t = 0.5 * (a + b);
    if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b - a);
        const double denom = gb - ga + 2.0 * d2;
        if (denom != 0.0) t = b - (b - a) * (gb + d2 - d1) / denom;
    }
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (lo + hi);
    return t;
}

} // namespace detail

/// Limited-memory BFGS with a strong-Wolfe line search.
///
/// `fg(x, grad)` returns f(x) and writes the gradient into `grad`.
template <class F>
LbfgsResult lbfgs_minimize(F&& fg, Eigen::VectorXd x0, const LbfgsOptions& opt = {}) {
    LbfgsResult res;
    const Eigen::Index n = x0.size();
    Eigen::VectorXd x = std::move(x0), g(n);
    auto eval = [&](const Eigen::VectorXd& at, Eigen::VectorXd& grad) {
        ++res.n_evaluations;
        const double v = fg(at, grad);
        if (!std::isfinite(v) || !grad.allFinite()) throw NumericalError("objective or gradient is not finite");
        return v;
    };
    double f = eval(x, g);
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    auto finish = [&](bool ok, std::string why) {
        res.x = x;
        res.f = f;
        res.gradient = g;
        res.converged = ok;
        res.reason = std::move(why);
        return res;
    };

    if (n == 0) return finish(true, "no parameters");
    if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) return finish(true, "gradient tolerance");

    while (res.n_evaluations < opt.max_evaluations) {
        // two-loop recursion
        Eigen::VectorXd q = g;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t k = s_hist.size(); k-- > 0;) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(q);
            q += (alpha[k] - beta) * s_hist[k];
        }
        Eigen::VectorXd dir = -q;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -g;
            slope = -g.squaredNorm();
        }

        double step = s_hist.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;

        // strong-Wolfe line search (bracketing + zoom)
        const double f0 = f;
        double a_prev = 0.0, f_prev = f0, d_prev = slope;
        Eigen::VectorXd x_new(n), g_new(n);
        double f_new = f0;
        bool found = false;
        auto zoom = [&](double lo, double f_lo, double d_lo, double hi, double f_hi, double d_hi) {
            for (int it = 0; it < opt.max_line_search && res.n_evaluations < opt.max_evaluations; ++it) {
                const double a = detail::cubic_step(lo, f_lo, d_lo, hi, f_hi, d_hi);
                x_new = x + a * dir;
                f_new = eval(x_new, g_new);
                const double d_new = g_new.dot(dir);
                if (f_new > f0 + opt.wolfe_c1 * a * slope || f_new >= f_lo) {
                    hi = a;
                    f_hi = f_new;
                    d_hi = d_new;
                } else {
                    if (std::abs(d_new) <= -opt.wolfe_c2 * slope) return true;
                    if (d_new * (hi - lo) >= 0.0) {
                        hi = lo;
                        f_hi = f_lo;
                        d_hi = d_lo;
                    }
                    lo = a;
                    f_lo = f_new;
                    d_lo = d_new;
                }
                if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
            }
            // accept the best decreasing point found, if any
            if (f_lo < f0) {
                x_new = x + lo * dir;
                f_new = eval(x_new, g_new);
                return true;
            }
            return false;
        };
        for (int it = 0; it < opt.max_line_search && res.n_evaluations < opt.max_evaluations; ++it) {
            x_new = x + step * dir;
            f_new = eval(x_new, g_new);
            const double d_new = g_new.dot(dir);
            if (f_new > f0 + opt.wolfe_c1 * step * slope || (it > 0 && f_new >= f_prev)) {
                found = zoom(a_prev, f_prev, d_prev, step, f_new, d_new);
                break;
            }
            if (std::abs(d_new) <= -opt.wolfe_c2 * slope) {
                found = true;
                break;
            }
            if (d_new >= 0.0) {
                found = zoom(step, f_new, d_new, a_prev, f_prev, d_prev);
                break;
            }
            a_prev = step;
            f_prev = f_new;
            d_prev = d_new;
            step *= 2.0;
        }
        if (!found || !(f_new <= f0)) return finish(false, "line search failed");

        Eigen::VectorXd s = x_new - x, y = g_new - g;
        x = x_new;
        g = g_new;
        f = f_new;
        ++res.n_iterations;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) return finish(true, "gradient tolerance");
        if (f0 - f < opt.energy_tolerance) return finish(true, "energy tolerance");
    }
    return finish(false, "evaluation limit");
}

} // namespace wahtor
