#pragma once

#include "wahtor/errors.hpp"
#include "wahtor/integrals.hpp"
#include "wahtor/statevector.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace wahtor {

inline constexpr double pauli_prune_threshold = 1e-12;

/// Second-quantized operator
///   constant + sum h_ij a+_i a_j + 1/2 sum h_cdef a+_c a+_d a_e a_f
/// over `n_modes` spin-orbitals.
struct FermionOperator {
    struct OneBody {
        int i, j;
        double coeff;
    };
    struct TwoBody {
        int c, d, e, f;
        double coeff;
    };

    int n_modes = 0;
    double constant = 0.0;
    std::vector<OneBody> one_body;
    std::vector<TwoBody> two_body;

    bool empty() const noexcept { return constant == 0.0 && one_body.empty() && two_body.empty(); }
};

/// Spin-orbital Hamiltonian from spatial integrals. Spin-orbital p (p < m) is
/// spatial orbital p with spin up; p + m is the same orbital with spin down.
/// The core energy enters as the constant only when `include_core` is set.
inline FermionOperator spatial_to_spin_hamiltonian(const SpatialIntegrals& ints, bool include_core = false) {
    const int m = ints.n_orbitals;
    FermionOperator op;
    op.n_modes = 2 * m;
    if (include_core) op.constant = ints.core_energy;
    for (int sigma = 0; sigma < 2; ++sigma)
        for (int p = 0; p < m; ++p)
            for (int q = 0; q < m; ++q) {
                const double v = ints.one_body(p, q);
                if (std::abs(v) >= pauli_prune_threshold) op.one_body.push_back({p + sigma * m, q + sigma * m, v});
            }
    // (pq|rs) a+_{p s} a+_{r t} a_{s t} a_{q s}
    for (int sigma = 0; sigma < 2; ++sigma)
        for (int tau = 0; tau < 2; ++tau)
            for (int p = 0; p < m; ++p)
                for (int q = 0; q < m; ++q)
                    for (int r = 0; r < m; ++r)
                        for (int s = 0; s < m; ++s) {
                            const double v = ints.two_body(p, q, r, s);
                            if (std::abs(v) < pauli_prune_threshold) continue;
                            const int c = p + sigma * m, d = r + tau * m, e = s + tau * m, f = q + sigma * m;
                            if (c == d || e == f) continue;
                            op.two_body.push_back({c, d, e, f, v});
                        }
    return op;
}

/// Tensor product of single-qubit Paulis in symplectic form: qubit q carries
/// I (x=0,z=0), X (1,0), Z (0,1) or Y (1,1).
struct PauliString {
    int n_qubits = 0;
    std::uint64_t x = 0;
    std::uint64_t z = 0;

    /// Parses e.g. "XZIY", character k acting on qubit k.
    static PauliString from_letters(std::string_view s) {
        if (s.size() > 64) throw DimensionError("Pauli strings are limited to 64 qubits");
        PauliString p{static_cast<int>(s.size()), 0, 0};
        for (std::size_t k = 0; k < s.size(); ++k) {
            const std::uint64_t bit = std::uint64_t{1} << k;
            switch (s[k]) {
            case 'I': break;
            case 'X': p.x |= bit; break;
            case 'Z': p.z |= bit; break;
            case 'Y': p.x |= bit; p.z |= bit; break;
            default: throw ParseError(std::string("invalid Pauli letter '") + s[k] + "'");
            }
        }
        return p;
    }

    std::string letters() const {
        std::string s(static_cast<std::size_t>(n_qubits), 'I');
        for (int k = 0; k < n_qubits; ++k) {
            const bool bx = (x >> k) & 1U, bz = (z >> k) & 1U;
            s[k] = bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I');
        }
        return s;
    }

    int y_count() const noexcept { return std::popcount(x & z); }

    auto operator<=>(const PauliString&) const = default;
};

namespace detail {

inline cplx i_power(int k) {
    switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

// P(x,z) = i^{|x&z|} X^x Z^z, so the product phase follows from commuting Z^z1 past X^x2.
inline std::pair<cplx, PauliString> multiply(const PauliString& a, const PauliString& b) {
    PauliString c{a.n_qubits, a.x ^ b.x, a.z ^ b.z};
    const int k = a.y_count() + b.y_count() + 2 * std::popcount(a.z & b.x) - c.y_count();
    return {i_power(k), c};
}

using PauliTerms = std::vector<std::pair<cplx, PauliString>>;

// a_p = (X_p + iY_p)/2 Z_{p-1}...Z_0, a+_p = (X_p - iY_p)/2 Z_{p-1}...Z_0.
inline PauliTerms ladder(int mode, bool dagger, int n) {
    const std::uint64_t bit = std::uint64_t{1} << mode;
    const std::uint64_t chain = bit - 1;
    const PauliString xs{n, bit, chain};
    const PauliString ys{n, bit, chain | bit};
    return {{cplx{0.5, 0.0}, xs}, {cplx{0.0, dagger ? -0.5 : 0.5}, ys}};
}

inline PauliTerms product(const PauliTerms& a, const PauliTerms& b) {
    PauliTerms out;
    out.reserve(a.size() * b.size());
    for (const auto& [ca, pa] : a)
        for (const auto& [cb, pb] : b) {
            auto [phase, p] = multiply(pa, pb);
            out.emplace_back(ca * cb * phase, p);
        }
    return out;
}

} // namespace detail

/// Real-weighted sum of Pauli strings over a fixed register size.
class PauliSum {
public:
    using Key = std::pair<std::uint64_t, std::uint64_t>;

    PauliSum() = default;
    explicit PauliSum(int n_qubits) : n_(n_qubits) {}

    int n_qubits() const noexcept { return n_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }

    /// Terms keyed by (x, z) masks; iteration order is deterministic.
    const std::map<Key, double>& terms() const noexcept { return terms_; }

    void add(const PauliString& p, double c) {
        if (p.n_qubits != n_) throw DimensionError("Pauli string size does not match sum");
        auto [it, inserted] = terms_.try_emplace(Key{p.x, p.z}, c);
        if (!inserted) it->second += c;
        if (std::abs(it->second) < pauli_prune_threshold) terms_.erase(it);
    }

    double coefficient(const PauliString& p) const {
        auto it = terms_.find(Key{p.x, p.z});
        return it == terms_.end() ? 0.0 : it->second;
    }

    PauliSum& operator+=(const PauliSum& o) {
        if (o.n_ != n_) throw DimensionError("adding Pauli sums of different sizes");
        for (const auto& [k, c] : o.terms_) add(PauliString{n_, k.first, k.second}, c);
        return *this;
    }

    PauliSum& operator*=(double a) {
        for (auto& [k, c] : terms_) c *= a;
        std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < pauli_prune_threshold; });
        return *this;
    }

private:
    int n_ = 0;
    std::map<Key, double> terms_;
};

/// Jordan-Wigner image of a fermionic operator, with qubit q = mode q.
inline PauliSum jordan_wigner(const FermionOperator& op, int n_spin_orbitals) {
    if (n_spin_orbitals > 62) throw DimensionError("too many spin-orbitals for 64-bit Pauli masks");
    const int n = n_spin_orbitals;
    std::map<PauliSum::Key, cplx> acc;
    auto accumulate = [&](const detail::PauliTerms& terms, double scale) {
        for (const auto& [c, p] : terms) acc[{p.x, p.z}] += c * scale;
    };
    auto check = [n](int idx) {
        if (idx < 0 || idx >= n) throw IndexError("fermion mode " + std::to_string(idx) + " outside register");
    };

    if (op.constant != 0.0) acc[{0, 0}] += op.constant;
    for (const auto& t : op.one_body) {
        check(t.i);
        check(t.j);
        accumulate(detail::product(detail::ladder(t.i, true, n), detail::ladder(t.j, false, n)), t.coeff);
    }
    for (const auto& t : op.two_body) {
        for (int idx : {t.c, t.d, t.e, t.f}) check(idx);
        const auto left = detail::product(detail::ladder(t.c, true, n), detail::ladder(t.d, true, n));
        const auto right = detail::product(detail::ladder(t.e, false, n), detail::ladder(t.f, false, n));
        accumulate(detail::product(left, right), 0.5 * t.coeff);
    }

    PauliSum out(n);
    for (const auto& [k, c] : acc) {
        if (std::abs(c.imag()) > 1e-10)
            throw EncodingError("Pauli coefficient with imaginary part " + std::to_string(c.imag()) +
                                " (non-Hermitian or complex input)");
        out.add(PauliString{n, k.first, k.second}, c.real());
    }
    return out;
}

/// Qubit Hamiltonian for the given integrals (core energy excluded unless requested).
inline PauliSum qubit_hamiltonian(const SpatialIntegrals& ints, bool include_core = false) {
    return jordan_wigner(spatial_to_spin_hamiltonian(ints, include_core), 2 * ints.n_orbitals);
}

namespace detail {

// <i ^ x| P |i> for P = i^{|x&z|} X^x Z^z.
inline cplx pauli_phase(const PauliString& p, std::uint64_t i) {
    const int k = p.y_count() + 2 * (std::popcount(p.z & i) & 1);
    return i_power(k);
}

} // namespace detail

/// sum_k c_k <psi|P_k|psi>, evaluated term by term.
inline double pauli_expectation(const PauliSum& h, const Statevector& psi) {
    if (h.n_qubits() != psi.n_qubits())
        throw DimensionError("Hamiltonian acts on " + std::to_string(h.n_qubits()) + " qubits, state has " +
                             std::to_string(psi.n_qubits()));
    double e = 0.0;
    for (const auto& [k, c] : h.terms()) {
        const PauliString p{h.n_qubits(), k.first, k.second};
        cplx s{};
        for (std::uint64_t i = 0; i < psi.dim(); ++i) s += std::conj(psi[i ^ p.x]) * detail::pauli_phase(p, i) * psi[i];
        e += c * s.real();
    }
    return e;
}

/// Pauli sum regrouped by X mask, with each group's diagonal factor tabulated
/// over the basis. Applying the operator costs (number of X masks) * 2^n.
class CompiledOperator {
public:
    CompiledOperator() = default;
    explicit CompiledOperator(const PauliSum& h) : n_(h.n_qubits()) {
        const std::size_t dim = std::size_t{1} << n_;
        std::map<std::uint64_t, std::vector<std::pair<PauliString, double>>> by_x;
        for (const auto& [k, c] : h.terms()) by_x[k.first].emplace_back(PauliString{n_, k.first, k.second}, c);
        groups_.reserve(by_x.size());
        for (const auto& [x, terms] : by_x) {
            Group g;
            g.x = x;
            g.diag.assign(dim, cplx{});
            for (const auto& [p, c] : terms) {
                const cplx base = detail::i_power(p.y_count()) * c;
                for (std::uint64_t i = 0; i < dim; ++i)
                    g.diag[i] += (std::popcount(p.z & i) & 1) ? -base : base;
            }
            groups_.push_back(std::move(g));
        }
    }

    int n_qubits() const noexcept { return n_; }
    std::size_t group_count() const noexcept { return groups_.size(); }

    /// out = H psi.
    void apply(const Statevector& psi, Statevector& out) const {
        check(psi);
        if (out.n_qubits() != n_) out = Statevector(n_);
        auto o = out.amplitudes();
        std::fill(o.begin(), o.end(), cplx{});
        const auto a = psi.amplitudes();
        const std::int64_t dim = static_cast<std::int64_t>(a.size());
        for (const auto& g : groups_) {
#pragma omp parallel for if (dim >= 4096)
            for (std::int64_t i = 0; i < dim; ++i) o[static_cast<std::uint64_t>(i) ^ g.x] += g.diag[i] * a[i];
        }
    }

    Statevector apply(const Statevector& psi) const {
        Statevector out(n_);
        apply(psi, out);
        return out;
    }

    double expectation(const Statevector& psi) const {
        check(psi);
        const auto a = psi.amplitudes();
        double e = 0.0;
        for (const auto& g : groups_) {
            double s = 0.0;
            for (std::uint64_t i = 0; i < a.size(); ++i) s += (std::conj(a[i ^ g.x]) * g.diag[i] * a[i]).real();
            e += s;
        }
        return e;
    }

    /// Visits nonzero matrix elements (row, col, value) with row = col ^ x.
    template <class F>
    void for_each_in_column(std::uint64_t col, F&& f) const {
        for (const auto& g : groups_)
            if (g.diag[col] != cplx{}) f(col ^ g.x, g.diag[col]);
    }

private:
    struct Group {
        std::uint64_t x = 0;
        std::vector<cplx> diag;
    };

    void check(const Statevector& psi) const {
        if (psi.n_qubits() != n_)
            throw DimensionError("operator acts on " + std::to_string(n_) + " qubits, state has " +
                                 std::to_string(psi.n_qubits()));
    }

    int n_ = 0;
    std::vector<Group> groups_;
};

/// Dense 2^n x 2^n matrix of a Pauli sum (small n only).
inline Eigen::MatrixXcd to_dense(const PauliSum& h) {
    if (h.n_qubits() > 12) throw ScaleError("dense Pauli matrix limited to 12 qubits");
    const std::size_t dim = std::size_t{1} << h.n_qubits();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& [k, c] : h.terms()) {
        const PauliString p{h.n_qubits(), k.first, k.second};
        for (std::uint64_t i = 0; i < dim; ++i)
            m(static_cast<Eigen::Index>(i ^ p.x), static_cast<Eigen::Index>(i)) += c * detail::pauli_phase(p, i);
    }
    return m;
}

/// [{"string": "XZIY", "coeff": 0.1}, ...]; character k is qubit k.
inline nlohmann::json to_json(const PauliSum& h) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [k, c] : h.terms())
        out.push_back({{"string", PauliString{h.n_qubits(), k.first, k.second}.letters()}, {"coeff", c}});
    return out;
}

inline PauliSum pauli_sum_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("Pauli sum JSON must be an array");
    if (j.empty()) return PauliSum(0);
    PauliSum out(static_cast<int>(j.front().at("string").get<std::string>().size()));
    for (const auto& t : j) out.add(PauliString::from_letters(t.at("string").get<std::string>()), t.at("coeff").get<double>());
    return out;
}

} // namespace wahtor
