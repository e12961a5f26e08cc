#pragma once

#include "wahtor/errors.hpp"
#include "wahtor/integrals.hpp"
#include "wahtor/pauli.hpp"
#include "wahtor/rotation.hpp"
#include "wahtor/simulator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <vector>

namespace wahtor {

struct FciSolution {
    double energy = 0.0;
    Statevector ground_vector;
    int n_electrons = 0;
    double residual = 0.0; // |H v - E v|
};

/// Makes the largest-magnitude amplitude real and positive.
inline void fix_phase(Statevector& psi) {
    std::size_t imax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < psi.dim(); ++i)
        if (std::abs(psi[i]) > best + 1e-12) {
            best = std::abs(psi[i]);
            imax = i;
        }
    if (best <= 0.0) return;
    const cplx phase = std::conj(psi[imax]) / std::abs(psi[imax]);
    for (auto& a : psi.amplitudes()) a *= phase;
}

/// Lowest eigenpair of `h` restricted to `n_electrons` particles and, when
/// `ms2` is given, to spin projection (n_up - n_down) = ms2 with the
/// spin-up block on the first half of the register.
inline FciSolution fci_solve(const PauliSum& h, int n_electrons, std::optional<int> ms2 = std::nullopt) {
    const int n = h.n_qubits();
    if (n > 16) throw ScaleError("exact diagonalization is limited to 16 qubits, got " + std::to_string(n));
    if (n_electrons < 0 || n_electrons > n) throw DimensionError("electron count outside the register");
    if (ms2 && n % 2) throw DimensionError("spin restriction needs an even register");
    const std::uint64_t dim = std::uint64_t{1} << n;
    const std::uint64_t up_mask = (std::uint64_t{1} << (n / 2)) - 1;

    std::vector<std::uint64_t> basis;
    std::vector<std::int64_t> position(dim, -1);
    for (std::uint64_t i = 0; i < dim; ++i) {
        if (std::popcount(i) != n_electrons) continue;
        if (ms2 && std::popcount(i & up_mask) - std::popcount(i & ~up_mask) != *ms2) continue;
        position[i] = static_cast<std::int64_t>(basis.size());
        basis.push_back(i);
    }
    if (basis.empty()) throw DimensionError("empty particle-number sector");
    const auto sdim = static_cast<Eigen::Index>(basis.size());

    Eigen::MatrixXcd hm = Eigen::MatrixXcd::Zero(sdim, sdim);
    for (const auto& [k, c] : h.terms()) {
        const PauliString p{n, k.first, k.second};
        for (Eigen::Index col = 0; col < sdim; ++col) {
            const std::uint64_t i = basis[static_cast<std::size_t>(col)];
            const std::int64_t row = position[i ^ p.x];
            if (row < 0) continue;
            hm(row, col) += c * detail::pauli_phase(p, i);
        }
    }

    Eigen::VectorXcd v;
    double e = 0.0;
    if (hm.imag().cwiseAbs().maxCoeff() < 1e-12) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hm.real());
        e = eig.eigenvalues()(0);
        v = eig.eigenvectors().col(0).cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hm);
        e = eig.eigenvalues()(0);
        v = eig.eigenvectors().col(0);
    }

    FciSolution sol;
    sol.energy = e;
    sol.n_electrons = n_electrons;
    sol.residual = (hm * v - e * v).norm();
    sol.ground_vector = Statevector(n);
    for (Eigen::Index k = 0; k < sdim; ++k) sol.ground_vector[basis[static_cast<std::size_t>(k)]] = v(k);
    sol.ground_vector.normalize();
    fix_phase(sol.ground_vector);
    return sol;
}

inline FciSolution fci_solve(const SpatialIntegrals& ints, bool restrict_spin = true) {
    return fci_solve(qubit_hamiltonian(ints), ints.n_electrons,
                     restrict_spin ? std::optional<int>(ints.ms2) : std::nullopt);
}

/// <HF|H|HF> for the closed-shell determinant (core energy excluded).
inline double hartree_fock_energy(const SpatialIntegrals& ints) {
    const int occ = ints.n_electrons / 2;
    double e = 0.0;
    for (int i = 0; i < occ; ++i) {
        e += 2.0 * ints.one_body(i, i);
        for (int j = 0; j < occ; ++j) e += 2.0 * ints.two_body(i, i, j, j) - ints.two_body(i, j, j, i);
    }
    return e;
}

/// gamma(i, j) = <a+_i a_j>.
inline Eigen::MatrixXcd one_particle_rdm(const Statevector& psi) {
    const int M = psi.n_qubits();
    std::vector<Statevector> lowered;
    lowered.reserve(static_cast<std::size_t>(M));
    for (int p = 0; p < M; ++p) lowered.push_back(apply_ladder(psi, p, false));
    Eigen::MatrixXcd g(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = i; j < M; ++j) {
            g(i, j) = inner_product(lowered[i], lowered[j]);
            g(j, i) = std::conj(g(i, j));
        }
    return g;
}

/// Spin-summed spatial 1-RDM D(p, q) = gamma(p, q) + gamma(p+m, q+m).
inline Eigen::MatrixXd spatial_one_rdm(const Statevector& psi) {
    const Eigen::MatrixXcd g = one_particle_rdm(psi);
    const int m = psi.n_qubits() / 2;
    return (g.topLeftCorner(m, m) + g.bottomRightCorner(m, m)).real();
}

struct NaturalOrbitals {
    Eigen::VectorXd occupations;  // descending
    Eigen::MatrixXd coefficients; // columns = natural orbitals in the current basis
};

inline NaturalOrbitals natural_orbitals(const Eigen::MatrixXd& density) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (density + density.transpose()));
    const Eigen::Index m = density.rows();
    NaturalOrbitals no{Eigen::VectorXd(m), Eigen::MatrixXd(m, m)};
    for (Eigen::Index k = 0; k < m; ++k) {
        no.occupations(k) = eig.eigenvalues()(m - 1 - k);
        no.coefficients.col(k) = eig.eigenvectors().col(m - 1 - k);
    }
    return no;
}

inline NaturalOrbitals natural_orbitals(const FciSolution& sol, int m) {
    if (sol.ground_vector.n_qubits() != 2 * m) throw DimensionError("solution does not span 2m spin-orbitals");
    return natural_orbitals(spatial_one_rdm(sol.ground_vector));
}

namespace detail {

// Best assignment row i -> column perm[i] maximizing sum |w(i, perm[i])|, by
// exhaustive search (groups are tiny).
inline std::vector<int> best_assignment(const Eigen::MatrixXd& w) {
    const int n = static_cast<int>(w.rows());
    if (n > 8) throw UnsupportedError("orbital matching is limited to groups of 8");
    std::vector<int> perm(static_cast<std::size_t>(n)), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_score = -1.0;
    do {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::abs(w(i, perm[static_cast<std::size_t>(i)]));
        if (s > best_score + 1e-14) {
            best_score = s;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline std::vector<int> zero_based(const std::vector<int>& group) {
    std::vector<int> out;
    for (int i : group) out.push_back(i - 1);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

/// Natural orbitals diagonalized within each symmetry group and placed in
/// the slots of the orbitals they overlap most; orbitals outside any
/// multi-member group stay fixed. Columns are sign-fixed to a non-negative
/// diagonal.
inline NaturalOrbitals natural_orbitals_in_groups(const Eigen::MatrixXd& density, const SymmetryGroups& groups) {
    const Eigen::Index m = density.rows();
    validate_symmetry_groups(groups, static_cast<int>(m));
    NaturalOrbitals no{density.diagonal(), Eigen::MatrixXd::Identity(m, m)};
    for (const auto& grp : groups.groups) {
        if (grp.size() < 2) continue;
        const auto idx = detail::zero_based(grp);
        const auto k = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd block(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b) block(a, b) = density(idx[a], idx[b]);
        const auto sub = natural_orbitals(block);
        const auto perm = detail::best_assignment(sub.coefficients); // slot a -> NO perm[a]
        for (Eigen::Index a = 0; a < k; ++a) {
            const Eigen::Index col = perm[static_cast<std::size_t>(a)];
            const double sign = sub.coefficients(a, col) < 0 ? -1.0 : 1.0;
            no.occupations(idx[a]) = sub.occupations(col);
            for (Eigen::Index b = 0; b < k; ++b) no.coefficients(idx[b], idx[a]) = sign * sub.coefficients(b, col);
        }
    }
    return no;
}

/// Reorders the columns of `w` within each symmetry group so that column i
/// is the orbital overlapping most with `reference` column i (the pairing
/// used by delta_metric), with signs chosen to make that overlap positive.
/// Orbitals within a group are interchangeable labels, so this only renames
/// qubits; use it before comparing per-qubit quantities across two bases.
inline Eigen::MatrixXd match_orbitals(const Eigen::MatrixXd& w, const Eigen::MatrixXd& reference,
                                      const SymmetryGroups& groups) {
    if (w.rows() != reference.rows() || w.cols() != reference.cols() || w.rows() != w.cols())
        throw DimensionError("orbital coefficient matrices must be square and equal in size");
    validate_symmetry_groups(groups, static_cast<int>(w.rows()));
    const Eigen::MatrixXd overlap = reference.transpose() * w;
    Eigen::MatrixXd out = w;
    for (const auto& grp : groups.groups) {
        if (grp.size() < 2) continue;
        const auto idx = detail::zero_based(grp);
        const auto k = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd block(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b) block(a, b) = overlap(idx[a], idx[b]);
        const auto perm = detail::best_assignment(block); // reference slot a <- w column perm[a]
        for (Eigen::Index a = 0; a < k; ++a) {
            const Eigen::Index src = idx[static_cast<std::size_t>(perm[static_cast<std::size_t>(a)])];
            const double sign = overlap(idx[a], src) < 0 ? -1.0 : 1.0;
            out.col(idx[a]) = sign * w.col(src);
        }
    }
    return out;
}

struct DeltaResult {
    std::optional<double> value; // empty when the Hartree-Fock and natural orbitals coincide
    double denominator = 0.0;
    double overlap_rotated = 0.0;
    double overlap_reference = 0.0;
    int n_orbitals = 0;

    bool hf_equals_no() const noexcept { return !value.has_value(); }
};

inline constexpr double default_delta_threshold = 1e-3;

/// Normalized distance of rotated orbitals `w` from natural orbitals `no`
/// (both as column coefficients in the Hartree-Fock basis):
///   delta = [sum |<W_i|NO_i>| - sum |<HF_i|NO_i>|] / [N - sum |<HF_i|NO_i>|]
/// over the N orbitals belonging to multi-member symmetry groups, each sum
/// using the maximal-overlap pairing within every group.
inline DeltaResult delta_metric(const Eigen::MatrixXd& w, const Eigen::MatrixXd& no, const SymmetryGroups& groups,
                                double threshold = default_delta_threshold) {
    if (w.rows() != no.rows() || w.cols() != no.cols() || w.rows() != w.cols())
        throw DimensionError("orbital coefficient matrices must be square and equal in size");
    validate_symmetry_groups(groups, static_cast<int>(w.rows()));
    const Eigen::MatrixXd ow = w.transpose() * no;
    DeltaResult r;
    for (const auto& grp : groups.groups) {
        if (grp.size() < 2) continue;
        const auto idx = detail::zero_based(grp);
        const auto k = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd bw(k, k), bh(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b) {
                bw(a, b) = ow(idx[a], idx[b]);
                bh(a, b) = no(idx[a], idx[b]);
            }
        const auto pw = detail::best_assignment(bw), ph = detail::best_assignment(bh);
        for (Eigen::Index a = 0; a < k; ++a) {
            r.overlap_rotated += std::abs(bw(a, pw[static_cast<std::size_t>(a)]));
            r.overlap_reference += std::abs(bh(a, ph[static_cast<std::size_t>(a)]));
        }
        r.n_orbitals += static_cast<int>(k);
    }
    r.denominator = r.n_orbitals - r.overlap_reference;
    if (r.denominator < threshold) return r;
    r.value = (r.overlap_rotated - r.overlap_reference) / r.denominator;
    return r;
}

/// (e - e_hf) / (e_fci - e_hf); unchanged by a common energy shift.
inline double correlation_fraction(double e, double e_hf, double e_fci) {
    const double denom = e_fci - e_hf;
    if (std::abs(denom) < 1e-14) throw DegenerateError("FCI and Hartree-Fock energies coincide");
    return (e - e_hf) / denom;
}

/// -Tr(rho ln rho) in nats; eigenvalues below 1e-14 count as zero.
inline double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
        const double p = std::max(0.0, eig.eigenvalues()(k));
        if (p > 1e-14) s -= p * std::log(p);
    }
    return s;
}

struct MutualInfoMatrix {
    int n_qubits = 0;
    Eigen::MatrixXd values; // nats, symmetric, zero diagonal

    int count_above(double threshold) const {
        int c = 0;
        for (int i = 0; i < n_qubits; ++i)
            for (int j = i + 1; j < n_qubits; ++j)
                if (values(i, j) > threshold) ++c;
        return c;
    }
};

/// I_ij = S(rho_i) + S(rho_j) - S(rho_ij) for i != j.
inline MutualInfoMatrix mutual_information(const Statevector& psi) {
    const int n = psi.n_qubits();
    if (n > 16) throw ScaleError("mutual information is limited to 16 qubits");
    MutualInfoMatrix mi{n, Eigen::MatrixXd::Zero(n, n)};
    std::vector<double> single(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) single[static_cast<std::size_t>(i)] = von_neumann_entropy(reduced_density_matrix(psi, {i}));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = single[static_cast<std::size_t>(i)] + single[static_cast<std::size_t>(j)] -
                             von_neumann_entropy(reduced_density_matrix(psi, {i, j}));
            mi.values(i, j) = mi.values(j, i) = v;
        }
    return mi;
}

/// Ground state of the Hamiltonian expressed in the orbitals given by the
/// columns of `c`, obtained by re-diagonalizing the transformed integrals.
inline FciSolution basis_change_state(const SpatialIntegrals& ints, const Eigen::MatrixXd& c) {
    return fci_solve(transform_integrals(ints, c));
}

inline void write_csv(std::ostream& out, const Eigen::MatrixXd& m) {
    const auto old = out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
    out.precision(old);
}

} // namespace wahtor
