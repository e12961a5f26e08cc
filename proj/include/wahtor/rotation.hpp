#pragma once

#include "wahtor/errors.hpp"
#include "wahtor/integrals.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wahtor {

/// Real antisymmetric pair-rotation generators A_l, one per unordered pair
/// (p, q) of orbitals sharing a symmetry group: A_l(p, q) = +1, A_l(q, p) = -1.
///
/// A_l = i T_l for the Hermitian generators T_l, so exp(sum_l r_l A_l) is a
/// real orthogonal matrix. The same spatial rotation acts on both spin blocks.
struct GeneratorSet {
    int n_orbitals = 0;
    std::vector<std::pair<int, int>> pairs; // 0-based, first < second

    std::size_t size() const noexcept { return pairs.size(); }
    bool empty() const noexcept { return pairs.empty(); }

    Eigen::MatrixXd matrix(std::size_t l) const {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_orbitals, n_orbitals);
        const auto [p, q] = pairs.at(l);
        a(p, q) = 1.0;
        a(q, p) = -1.0;
        return a;
    }

    Eigen::MatrixXd combination(std::span<const double> r) const {
        if (r.size() != pairs.size())
            throw DimensionError("rotation vector has " + std::to_string(r.size()) + " entries, expected " +
                                 std::to_string(pairs.size()));
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_orbitals, n_orbitals);
        for (std::size_t l = 0; l < pairs.size(); ++l) {
            const auto [p, q] = pairs[l];
            a(p, q) += r[l];
            a(q, p) -= r[l];
        }
        return a;
    }
};

/// One generator per within-group pair, ordered by group and then
/// lexicographically by (p, q) over the group's sorted members.
inline GeneratorSet build_generators(const SymmetryGroups& groups, int n_orbitals) {
    validate_symmetry_groups(groups, n_orbitals);
    GeneratorSet g;
    g.n_orbitals = n_orbitals;
    for (auto members : groups.groups) {
        std::sort(members.begin(), members.end());
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) g.pairs.emplace_back(members[a] - 1, members[b] - 1);
    }
    return g;
}

/// U(r) = exp(sum_l r_l A_l), by scaling and squaring with a Pade approximant.
inline Eigen::MatrixXd rotation_matrix(const GeneratorSet& g, std::span<const double> r) {
    const Eigen::MatrixXd a = g.combination(r);
    Eigen::MatrixXd u = a.exp();
    if (!u.allFinite()) throw NumericalError("non-finite orbital rotation");
    return u;
}

/// Integrals in the orbital basis whose coefficients (in the current basis)
/// are the columns of `c`: h1' = c^T h1 c and
/// (pq|rs)' = sum c_ap c_bq c_cr c_ds (ab|cd).
inline SpatialIntegrals transform_integrals(const SpatialIntegrals& ints, const Eigen::MatrixXd& c) {
    const int m = ints.n_orbitals;
    if (c.rows() != m || c.cols() != m) throw DimensionError("orbital coefficient matrix has the wrong shape");
    SpatialIntegrals out = ints;
    out.one_body = c.transpose() * ints.one_body * c;
    out.one_body = 0.5 * (out.one_body + out.one_body.transpose());

    // Four single-index contractions, each O(m^5).
    Tensor4 a = ints.two_body, b(m);
    for (int index = 0; index < 4; ++index) {
        std::fill(b.data().begin(), b.data().end(), 0.0);
        for (int p = 0; p < m; ++p)
            for (int q = 0; q < m; ++q)
                for (int r = 0; r < m; ++r)
                    for (int s = 0; s < m; ++s) {
                        const int idx[4] = {p, q, r, s};
                        const int slot = idx[index];
                        double v = 0.0;
                        for (int k = 0; k < m; ++k) {
                            int src[4] = {p, q, r, s};
                            src[index] = k;
                            v += c(k, slot) * a(src[0], src[1], src[2], src[3]);
                        }
                        b(p, q, r, s) = v;
                    }
        std::swap(a, b);
    }
    out.two_body = std::move(a);
    for (double v : out.two_body.data())
        if (!std::isfinite(v)) throw NumericalError("non-finite rotated two-body integral");
    return out;
}

/// h1(r) = U h1 U^T and the matching four-index transform, with U = exp(sum r_l A_l).
inline SpatialIntegrals rotate_integrals(const SpatialIntegrals& ints, const GeneratorSet& g, std::span<const double> r) {
    return transform_integrals(ints, rotation_matrix(g, r).transpose());
}

/// [A, h] for antisymmetric A: A h - h A.
inline Eigen::MatrixXd commutator(const Eigen::MatrixXd& a, const Eigen::MatrixXd& h) { return a * h - h * a; }

/// Derivative action of A on every index of a chemist-notation tensor:
/// (D_A t)(p,q,r,s) = sum_k A_pk t(k,q,r,s) + A_qk t(p,k,r,s) + A_rk t(p,q,k,s) + A_sk t(p,q,r,k).
inline Tensor4 generator_action(const Eigen::MatrixXd& a, const Tensor4& t) {
    const int m = t.dim();
    Tensor4 out(m);
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
            for (int r = 0; r < m; ++r)
                for (int s = 0; s < m; ++s) {
                    double v = 0.0;
                    for (int k = 0; k < m; ++k) {
                        v += a(p, k) * t(k, q, r, s) + a(q, k) * t(p, k, r, s) + a(r, k) * t(p, q, k, s) +
                             a(s, k) * t(p, q, r, k);
                    }
                    out(p, q, r, s) = v;
                }
    return out;
}

/// First and second derivatives of h1(R), h2(R) at R = 0.
struct RotationDerivatives {
    std::vector<Eigen::MatrixXd> grad_h1;
    std::vector<Tensor4> grad_h2;
    std::vector<std::vector<Eigen::MatrixXd>> hess_h1; // [l1][l2], symmetric in (l1, l2)
    std::vector<std::vector<Tensor4>> hess_h2;
};

/// grad_h1[l] = [A_l, h1], hess_h1[l1][l2] = ([A_l1,[A_l2,h1]] + [A_l2,[A_l1,h1]]) / 2,
/// and the same nested actions on every index of h2.
inline RotationDerivatives derivatives_at_zero(const SpatialIntegrals& ints, const GeneratorSet& g) {
    const std::size_t n = g.size();
    RotationDerivatives d;
    d.grad_h1.reserve(n);
    d.grad_h2.reserve(n);
    std::vector<Eigen::MatrixXd> gens;
    for (std::size_t l = 0; l < n; ++l) {
        gens.push_back(g.matrix(l));
        d.grad_h1.push_back(commutator(gens[l], ints.one_body));
        d.grad_h2.push_back(generator_action(gens[l], ints.two_body));
    }
    d.hess_h1.assign(n, std::vector<Eigen::MatrixXd>(n));
    d.hess_h2.assign(n, std::vector<Tensor4>(n));
    for (std::size_t l1 = 0; l1 < n; ++l1)
        for (std::size_t l2 = l1; l2 < n; ++l2) {
            Eigen::MatrixXd h1 = 0.5 * (commutator(gens[l1], d.grad_h1[l2]) + commutator(gens[l2], d.grad_h1[l1]));
            Tensor4 h2 = generator_action(gens[l1], d.grad_h2[l2]);
            h2 += generator_action(gens[l2], d.grad_h2[l1]);
            h2 *= 0.5;
            d.hess_h1[l1][l2] = h1;
            d.hess_h1[l2][l1] = std::move(h1);
            d.hess_h2[l2][l1] = h2;
            d.hess_h2[l1][l2] = std::move(h2);
        }
    return d;
}

/// Largest |U^T U - I| entry.
inline double orthogonality_error(const Eigen::MatrixXd& u) {
    return (u.transpose() * u - Eigen::MatrixXd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

/// Nearest orthogonal matrix (polar factor).
inline Eigen::MatrixXd reorthogonalize(const Eigen::MatrixXd& u) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

} // namespace wahtor
