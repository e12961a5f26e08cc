#pragma once

#include "wahtor/errors.hpp"
#include "wahtor/integrals.hpp"
#include "wahtor/statevector.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wahtor {

using QubitPair = std::pair<int, int>;

inline std::vector<QubitPair> ladder_entangler(int n_qubits) {
    std::vector<QubitPair> pairs;
    for (int q = 0; q + 1 < n_qubits; ++q) pairs.emplace_back(q, q + 1);
    return pairs;
}

/// Hardware-efficient ansatz: an Ry layer followed by `depth` blocks of
/// (CNOT entangler, Ry layer). Parameter b*n + q drives qubit q in layer b.
struct AnsatzCircuit {
    struct Gate {
        enum class Kind { ry, cnot } kind;
        int a;          // Ry target or CNOT control
        int b = -1;     // CNOT target
        int param = -1; // Ry parameter index
    };

    int n_qubits = 0;
    int depth = 0;
    std::vector<QubitPair> entangler;

    AnsatzCircuit() = default;
    AnsatzCircuit(int n, int d) : AnsatzCircuit(n, d, ladder_entangler(n)) {}
    AnsatzCircuit(int n, int d, std::vector<QubitPair> pairs) : n_qubits(n), depth(d), entangler(std::move(pairs)) {
        if (n < 1) throw DimensionError("ansatz needs at least one qubit");
        if (d < 0) throw DimensionError("ansatz depth must be non-negative");
        for (auto [c, t] : entangler)
            if (c < 0 || t < 0 || c >= n || t >= n || c == t)
                throw IndexError("invalid CNOT pair (" + std::to_string(c) + "," + std::to_string(t) + ")");
    }

    std::size_t n_params() const noexcept { return static_cast<std::size_t>(n_qubits) * (depth + 1); }

    std::vector<Gate> gates() const {
        std::vector<Gate> g;
        for (int q = 0; q < n_qubits; ++q) g.push_back({Gate::Kind::ry, q, -1, q});
        for (int layer = 1; layer <= depth; ++layer) {
            for (auto [c, t] : entangler) g.push_back({Gate::Kind::cnot, c, t, -1});
            for (int q = 0; q < n_qubits; ++q) g.push_back({Gate::Kind::ry, q, -1, layer * n_qubits + q});
        }
        return g;
    }
};

namespace gates {

/// Ry(phi) = exp(-i phi Y / 2).
inline void ry(std::span<cplx> a, int q, double phi) {
    const double c = std::cos(0.5 * phi), s = std::sin(0.5 * phi);
    const std::uint64_t bit = std::uint64_t{1} << q;
    for (std::uint64_t i = 0; i < a.size(); ++i) {
        if (i & bit) continue;
        const cplx a0 = a[i], a1 = a[i | bit];
        a[i] = c * a0 - s * a1;
        a[i | bit] = s * a0 + c * a1;
    }
}

inline void cnot(std::span<cplx> a, int control, int target) {
    const std::uint64_t cb = std::uint64_t{1} << control, tb = std::uint64_t{1} << target;
    for (std::uint64_t i = 0; i < a.size(); ++i)
        if ((i & cb) && !(i & tb)) std::swap(a[i], a[i | tb]);
}

/// a <- (-i Y / 2) a, the derivative generator of Ry.
inline void ry_generator(std::span<cplx> a, int q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    for (std::uint64_t i = 0; i < a.size(); ++i) {
        if (i & bit) continue;
        const cplx a0 = a[i], a1 = a[i | bit];
        a[i] = -0.5 * a1;
        a[i | bit] = 0.5 * a0;
    }
}

} // namespace gates

/// Closed-shell Hartree-Fock determinant: the lowest n/2 spin-up and the
/// lowest n/2 spin-down spin-orbitals occupied (spin-up block first).
inline Statevector hf_reference(int n_qubits, int n_electrons) {
    if (n_electrons % 2) throw UnsupportedError("open-shell references are not supported (odd electron count)");
    if (n_electrons < 0 || n_electrons > n_qubits || n_qubits % 2)
        throw DimensionError("cannot place " + std::to_string(n_electrons) + " electrons in " +
                             std::to_string(n_qubits) + " spin-orbitals");
    const int m = n_qubits / 2, half = n_electrons / 2;
    std::uint64_t idx = 0;
    for (int p = 0; p < half; ++p) idx |= (std::uint64_t{1} << p) | (std::uint64_t{1} << (p + m));
    return Statevector::basis_state(n_qubits, idx);
}

inline void apply_gates(const AnsatzCircuit& c, std::span<const double> theta, Statevector& psi) {
    for (const auto& g : c.gates()) {
        if (g.kind == AnsatzCircuit::Gate::Kind::ry)
            gates::ry(psi.amplitudes(), g.a, theta[static_cast<std::size_t>(g.param)]);
        else
            gates::cnot(psi.amplitudes(), g.a, g.b);
    }
}

inline Statevector apply_ansatz(const AnsatzCircuit& c, std::span<const double> theta, const Statevector& ref) {
    if (theta.size() != c.n_params())
        throw DimensionError("ansatz expects " + std::to_string(c.n_params()) + " parameters, got " +
                             std::to_string(theta.size()));
    if (ref.n_qubits() != c.n_qubits) throw DimensionError("reference state size does not match the ansatz");
    Statevector psi = ref;
    apply_gates(c, theta, psi);
    return psi;
}

/// Reduced density matrix of one or two qubits. Local bit k of the returned
/// matrix index is qubit keep[k].
inline Eigen::MatrixXcd reduced_density_matrix(const Statevector& psi, std::span<const int> keep) {
    const int n = psi.n_qubits();
    if (keep.empty() || keep.size() > 2) throw IndexError("reduced density matrix needs 1 or 2 qubits");
    for (int q : keep)
        if (q < 0 || q >= n) throw IndexError("qubit " + std::to_string(q) + " outside register");
    if (keep.size() == 2 && keep[0] == keep[1]) throw IndexError("qubit indices must be distinct");

    std::uint64_t mask = 0;
    for (int q : keep) mask |= std::uint64_t{1} << q;
    const int k = static_cast<int>(keep.size());
    auto embed = [&](std::uint64_t l) {
        std::uint64_t i = 0;
        for (int b = 0; b < k; ++b) i |= ((l >> b) & 1U) << keep[b];
        return i;
    };
    const Eigen::Index d = Eigen::Index{1} << k;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    for (std::uint64_t i = 0; i < psi.dim(); ++i) {
        if (i & mask) continue;
        for (Eigen::Index a = 0; a < d; ++a) {
            const cplx va = psi[i | embed(static_cast<std::uint64_t>(a))];
            if (va == cplx{}) continue;
            for (Eigen::Index b = 0; b < d; ++b) rho(a, b) += va * std::conj(psi[i | embed(static_cast<std::uint64_t>(b))]);
        }
    }
    return rho;
}

inline Eigen::MatrixXcd reduced_density_matrix(const Statevector& psi, std::initializer_list<int> keep) {
    std::vector<int> k(keep);
    return reduced_density_matrix(psi, std::span<const int>(k));
}

/// a_p psi (dagger = false) or a+_p psi (dagger = true) under Jordan-Wigner ordering.
inline Statevector apply_ladder(const Statevector& psi, int p, bool dagger) {
    Statevector out(psi.n_qubits());
    const std::uint64_t bit = std::uint64_t{1} << p;
    for (std::uint64_t i = 0; i < psi.dim(); ++i) {
        if (psi[i] == cplx{}) continue;
        if (static_cast<bool>(i & bit) == dagger) continue;
        const double sign = (std::popcount(i & (bit - 1)) & 1) ? -1.0 : 1.0;
        out[i ^ bit] = sign * psi[i];
    }
    return out;
}

/// Cached one- and two-particle expectation values of a fixed state:
///   gamma(i, j)            = <a+_i a_j>
///   gamma2(c, d, e, f)     = <a+_c a+_d a_e a_f>
/// together with their spin-summed spatial contractions used against
/// chemist-notation integrals:
///   one_spatial(p, q)      = sum_s <a+_{ps} a_{qs}>
///   two_spatial(p, q, r, s) = sum_{s,t} <a+_{ps} a+_{rt} a_{st} a_{qs}>
struct ReducedDensityMatrices {
    int n_modes = 0;
    Eigen::MatrixXcd gamma;
    std::vector<cplx> gamma2;
    Eigen::MatrixXd one_spatial;
    Tensor4 two_spatial;

    cplx two(int c, int d, int e, int f) const {
        const std::size_t M = static_cast<std::size_t>(n_modes);
        return gamma2[((c * M + d) * M + e) * M + f];
    }
};

/// Exact 1- and 2-RDMs by direct ladder-operator action on the statevector.
inline ReducedDensityMatrices fermionic_rdms(const Statevector& psi) {
    const int M = psi.n_qubits();
    if (M % 2) throw DimensionError("spin-orbital register must have an even number of qubits");
    const int m = M / 2;
    ReducedDensityMatrices r;
    r.n_modes = M;

    std::vector<Statevector> single;
    single.reserve(static_cast<std::size_t>(M));
    for (int p = 0; p < M; ++p) single.push_back(apply_ladder(psi, p, false));
    r.gamma = Eigen::MatrixXcd::Zero(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = i; j < M; ++j) {
            r.gamma(i, j) = inner_product(single[i], single[j]);
            r.gamma(j, i) = std::conj(r.gamma(i, j));
        }

    // pair[e][f] = a_e a_f psi for e < f; a_f a_e psi = -pair[e][f].
    std::vector<std::pair<int, int>> pairs;
    std::vector<Statevector> pair_states;
    for (int e = 0; e < M; ++e)
        for (int f = e + 1; f < M; ++f) {
            pairs.emplace_back(e, f);
            pair_states.push_back(apply_ladder(single[f], e, false));
        }
    const std::size_t Ms = static_cast<std::size_t>(M);
    r.gamma2.assign(Ms * Ms * Ms * Ms, cplx{});
    auto at = [&](int c, int d, int e, int f) -> cplx& { return r.gamma2[((c * Ms + d) * Ms + e) * Ms + f]; };
    for (std::size_t a = 0; a < pairs.size(); ++a)
        for (std::size_t b = a; b < pairs.size(); ++b) {
            // <a+_c a+_d a_e a_f> = <a_d a_c psi | a_e a_f psi>; take (d, c) = pairs[a], (e, f) = pairs[b].
            const cplx v = inner_product(pair_states[a], pair_states[b]);
            const auto [d, c] = pairs[a];
            const auto [e, f] = pairs[b];
            at(c, d, e, f) = v;
            at(d, c, e, f) = -v;
            at(c, d, f, e) = -v;
            at(d, c, f, e) = v;
            // Hermitian conjugate block
            at(f, e, d, c) = std::conj(v);
            at(e, f, d, c) = -std::conj(v);
            at(f, e, c, d) = -std::conj(v);
            at(e, f, c, d) = std::conj(v);
        }

    r.one_spatial = Eigen::MatrixXd::Zero(m, m);
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) r.one_spatial(p, q) = r.gamma(p, q).real() + r.gamma(p + m, q + m).real();
    r.two_spatial = Tensor4(m);
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
            for (int rr = 0; rr < m; ++rr)
                for (int s = 0; s < m; ++s) {
                    double v = 0.0;
                    for (int sg = 0; sg < 2; ++sg)
                        for (int tg = 0; tg < 2; ++tg) v += at(p + sg * m, rr + tg * m, s + tg * m, q + sg * m).real();
                    r.two_spatial(p, q, rr, s) = v;
                }
    return r;
}

/// Expectation of the spin-orbital occupation (I - Z_q)/2.
inline double occupation(const Statevector& psi, int q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    double s = 0.0;
    for (std::uint64_t i = 0; i < psi.dim(); ++i)
        if (i & bit) s += std::norm(psi[i]);
    return s;
}

inline double particle_number(const Statevector& psi) {
    double s = 0.0;
    for (std::uint64_t i = 0; i < psi.dim(); ++i) s += std::popcount(i) * std::norm(psi[i]);
    return s;
}

} // namespace wahtor
