#pragma once

#include "wahtor/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace wahtor {

struct TrustRegionStep {
    Eigen::VectorXd step;
    double predicted_decrease = 0.0; // -(g.s + s.H.s / 2) >= 0
    bool on_boundary = false;
};

/// Exact minimizer of g.s + s.H.s / 2 subject to |s| <= radius.
///
/// Works in the eigenbasis of H and solves the secular equation
/// 1/|s(lambda)| = 1/radius by safeguarded Newton iteration, falling back to
/// the hard-case construction when g has no component along the lowest
/// eigenvector. Intended for the handful of rotation parameters per molecule.
inline TrustRegionStep trust_region_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& h, double radius) {
    const Eigen::Index n = g.size();
    if (!(radius > 0.0) || !std::isfinite(radius)) throw NumericalError("trust radius must be positive and finite");
    if (h.rows() != n || h.cols() != n) throw DimensionError("gradient and Hessian sizes differ");
    if (!g.allFinite() || !h.allFinite()) throw NumericalError("non-finite gradient or Hessian");

    TrustRegionStep out;
    out.step = Eigen::VectorXd::Zero(n);
    if (n == 0) return out;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h + h.transpose()));
    const Eigen::VectorXd& lam = eig.eigenvalues(); // ascending
    Eigen::MatrixXd q = eig.eigenvectors();
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index imax;
        q.col(k).cwiseAbs().maxCoeff(&imax);
        if (q(imax, k) < 0) q.col(k) *= -1.0;
    }
    const Eigen::VectorXd gt = q.transpose() * g;
    const double scale = std::max({1.0, lam.cwiseAbs().maxCoeff(), g.norm()});
    const double zero_tol = 1e-14 * scale;

    auto step_norm = [&](double shift) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double d = lam(k) + shift;
            if (std::abs(gt(k)) <= zero_tol) continue;
            s += (gt(k) / d) * (gt(k) / d);
        }
        return std::sqrt(s);
    };
    auto step_at = [&](double shift) {
        Eigen::VectorXd st = Eigen::VectorXd::Zero(n);
        for (Eigen::Index k = 0; k < n; ++k)
            if (std::abs(gt(k)) > zero_tol) st(k) = -gt(k) / (lam(k) + shift);
        return st;
    };
    auto finish = [&](const Eigen::VectorXd& st, bool boundary) {
        out.step = q * st;
        out.on_boundary = boundary;
        out.predicted_decrease = std::max(0.0, -(g.dot(out.step) + 0.5 * out.step.dot(h * out.step)));
        return out;
    };

    if (g.norm() <= zero_tol && lam(0) >= 0.0) return out;

    const double lmin = lam(0);
    // Interior Newton step.
    if (lmin > 0.0 && step_norm(0.0) <= radius) return finish(step_at(0.0), false);

    const double lo_bound = std::max(0.0, -lmin);
    // Hard case: no gradient component in the lowest eigenspace and the
    // shifted step does not reach the boundary.
    bool singular_direction_empty = true;
    for (Eigen::Index k = 0; k < n && lam(k) <= lmin + 1e-12 * scale; ++k)
        if (std::abs(gt(k)) > zero_tol) singular_direction_empty = false;
    if (singular_direction_empty && step_norm(lo_bound) <= radius) {
        Eigen::VectorXd st = step_at(lo_bound);
        const double rest = radius * radius - st.squaredNorm();
        st(0) += std::sqrt(std::max(0.0, rest));
        return finish(st, true);
    }

    // Secular equation on (lo_bound, hi]: |s(shift)| decreases monotonically.
    double lo = lo_bound, hi = lo_bound + g.norm() / radius + 1.0;
    while (step_norm(hi) > radius) hi = 2.0 * hi + 1.0;
    double shift = hi;
    for (int it = 0; it < 200; ++it) {
        const double norm = step_norm(shift);
        const double phi = 1.0 / norm - 1.0 / radius;
        if (std::abs(norm - radius) <= 1e-14 * radius) break;
        if (phi < 0.0) {
            lo = shift;
        } else {
            hi = shift;
        }
        // d|s|/dshift = -sum gt^2/(lam+shift)^3 / |s|
        double dnorm = 0.0;
        for (Eigen::Index k = 0; k < n; ++k)
            if (std::abs(gt(k)) > zero_tol) dnorm -= gt(k) * gt(k) / std::pow(lam(k) + shift, 3);
        dnorm /= norm;
        const double dphi = -dnorm / (norm * norm);
        double next = shift - phi / dphi;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) {
            shift = next;
            break;
        }
        shift = next;
    }
    Eigen::VectorXd st = step_at(shift);
    st *= radius / st.norm();
    return finish(st, true);
}

} // namespace wahtor
