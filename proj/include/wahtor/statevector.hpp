#pragma once

#include "wahtor/errors.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wahtor {

using cplx = std::complex<double>;

/// Amplitudes of an n-qubit register. Qubit q is bit q of the basis index.
class Statevector {
public:
    Statevector() = default;
    explicit Statevector(int n_qubits) : n_(n_qubits), amps_(std::size_t{1} << n_qubits, cplx{}) {
        if (n_qubits < 0 || n_qubits > 30) throw DimensionError("unsupported qubit count " + std::to_string(n_qubits));
    }
    Statevector(int n_qubits, std::vector<cplx> amplitudes) : n_(n_qubits), amps_(std::move(amplitudes)) {
        if (amps_.size() != (std::size_t{1} << n_qubits))
            throw DimensionError("amplitude count does not match 2^" + std::to_string(n_qubits));
    }

    static Statevector basis_state(int n_qubits, std::uint64_t index) {
        Statevector s(n_qubits);
        if (index >= s.dim()) throw IndexError("basis index out of range");
        s.amps_[index] = 1.0;
        return s;
    }

    int n_qubits() const noexcept { return n_; }
    std::size_t dim() const noexcept { return amps_.size(); }

    cplx& operator[](std::size_t i) noexcept { return amps_[i]; }
    const cplx& operator[](std::size_t i) const noexcept { return amps_[i]; }

    std::span<cplx> amplitudes() noexcept { return amps_; }
    std::span<const cplx> amplitudes() const noexcept { return amps_; }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return std::sqrt(s);
    }

    void normalize() {
        const double n = norm();
        if (!(n > 0.0)) throw NumericalError("cannot normalize a zero vector");
        for (auto& a : amps_) a /= n;
    }

private:
    int n_ = 0;
    std::vector<cplx> amps_;
};

inline cplx inner_product(const Statevector& a, const Statevector& b) {
    if (a.dim() != b.dim()) throw DimensionError("inner product of states with different sizes");
    cplx s{};
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

} // namespace wahtor
