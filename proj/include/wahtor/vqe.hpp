#pragma once

#include "wahtor/errors.hpp"
#include "wahtor/lbfgs.hpp"
#include "wahtor/pauli.hpp"
#include "wahtor/simulator.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace wahtor {

/// E(theta) = <ref| U(theta)^+ H U(theta) |ref> for a fixed Hamiltonian and ansatz.
class AnsatzEnergy {
public:
    AnsatzEnergy(const CompiledOperator& h, AnsatzCircuit circuit, Statevector ref)
        : h_(&h), circuit_(std::move(circuit)), ref_(std::move(ref)), gates_(circuit_.gates()) {
        if (h.n_qubits() != circuit_.n_qubits || ref_.n_qubits() != circuit_.n_qubits)
            throw DimensionError("Hamiltonian, ansatz and reference must share a register size");
    }

    const AnsatzCircuit& circuit() const noexcept { return circuit_; }
    std::size_t n_params() const noexcept { return circuit_.n_params(); }

    Statevector state(std::span<const double> theta) const { return apply_ansatz(circuit_, theta, ref_); }

    double energy(std::span<const double> theta) const { return h_->expectation(state(theta)); }

    /// Energy and exact gradient by reverse-mode (adjoint) propagation through the circuit.
    double energy_and_gradient(std::span<const double> theta, std::span<double> grad) const {
        if (grad.size() != n_params()) throw DimensionError("gradient buffer has the wrong size");
        Statevector psi = state(theta);
        Statevector lambda = h_->apply(psi);
        const double e = inner_product(psi, lambda).real();
        Statevector mu(psi.n_qubits());
        for (auto g = gates_.rbegin(); g != gates_.rend(); ++g) {
            if (g->kind == AnsatzCircuit::Gate::Kind::cnot) {
                gates::cnot(psi.amplitudes(), g->a, g->b);
                gates::cnot(lambda.amplitudes(), g->a, g->b);
                continue;
            }
            const double phi = theta[static_cast<std::size_t>(g->param)];
            std::copy(psi.amplitudes().begin(), psi.amplitudes().end(), mu.amplitudes().begin());
            gates::ry_generator(mu.amplitudes(), g->a);
            grad[static_cast<std::size_t>(g->param)] = 2.0 * inner_product(lambda, mu).real();
            gates::ry(psi.amplitudes(), g->a, -phi);
            gates::ry(lambda.amplitudes(), g->a, -phi);
        }
        return e;
    }

    /// dE/dtheta_k = [E(theta_k + pi/2) - E(theta_k - pi/2)] / 2.
    std::vector<double> parameter_shift_gradient(std::span<const double> theta) const {
        std::vector<double> shifted(theta.begin(), theta.end()), grad(theta.size());
        constexpr double half_pi = std::numbers::pi / 2.0;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            shifted[k] = theta[k] + half_pi;
            const double plus = energy(shifted);
            shifted[k] = theta[k] - half_pi;
            const double minus = energy(shifted);
            shifted[k] = theta[k];
            grad[k] = 0.5 * (plus - minus);
        }
        return grad;
    }

private:
    const CompiledOperator* h_;
    AnsatzCircuit circuit_;
    Statevector ref_;
    std::vector<AnsatzCircuit::Gate> gates_;
};

enum class GradientMethod { adjoint, parameter_shift };

struct VqeOptions {
    LbfgsOptions optimizer;
    GradientMethod gradient = GradientMethod::adjoint;
};

struct VqeResult {
    double energy = 0.0;
    std::vector<double> theta;
    int n_evaluations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
};

inline VqeResult vqe_minimize(const CompiledOperator& h, const AnsatzCircuit& c, const Statevector& ref,
                              std::span<const double> theta0, const VqeOptions& opts = {}) {
    if (theta0.size() != c.n_params())
        throw DimensionError("initial parameters: expected " + std::to_string(c.n_params()) + ", got " +
                             std::to_string(theta0.size()));
    const AnsatzEnergy objective(h, c, ref);
    auto fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const std::span<const double> t(x.data(), static_cast<std::size_t>(x.size()));
        if (opts.gradient == GradientMethod::parameter_shift) {
            const auto ps = objective.parameter_shift_gradient(t);
            g = Eigen::Map<const Eigen::VectorXd>(ps.data(), static_cast<Eigen::Index>(ps.size()));
            return objective.energy(t);
        }
        g.resize(x.size());
        return objective.energy_and_gradient(t, std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
    };
    Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(theta0.data(), static_cast<Eigen::Index>(theta0.size()));
    const auto r = lbfgs_minimize(fg, std::move(x0), opts.optimizer);
    VqeResult out;
    out.energy = r.f;
    out.theta.assign(r.x.data(), r.x.data() + r.x.size());
    out.n_evaluations = r.n_evaluations;
    out.converged = r.converged;
    return out;
}

inline VqeResult vqe_minimize(const PauliSum& h, const AnsatzCircuit& c, const Statevector& ref,
                              std::span<const double> theta0, const VqeOptions& opts = {}) {
    return vqe_minimize(CompiledOperator(h), c, ref, theta0, opts);
}

/// Initial parameters for start `seed`: uniform on [-pi, pi) per component.
inline std::vector<double> random_parameters(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-std::numbers::pi, std::numbers::pi);
    std::vector<double> theta(n);
    for (auto& t : theta) t = dist(rng);
    return theta;
}

struct MultistartResult {
    VqeResult best;
    std::vector<VqeResult> runs; // in start order
};

/// Runs `n_starts` independent minimizations; start k draws its parameters
/// with seed `seed + k`. Ties on energy resolve to the smaller seed.
inline MultistartResult vqe_multistart(const CompiledOperator& h, const AnsatzCircuit& c, const Statevector& ref,
                                       int n_starts, std::uint64_t seed, const VqeOptions& opts = {}) {
    if (n_starts < 1) throw DimensionError("n_starts must be at least 1");
    MultistartResult out;
    out.runs.resize(static_cast<std::size_t>(n_starts));
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n_starts; ++k) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
        const auto theta0 = random_parameters(c.n_params(), s);
        auto r = vqe_minimize(h, c, ref, theta0, opts);
        r.seed = s;
        out.runs[static_cast<std::size_t>(k)] = std::move(r);
    }
    out.best = out.runs.front();
    for (const auto& r : out.runs)
        if (r.energy < out.best.energy || (r.energy == out.best.energy && r.seed < out.best.seed)) out.best = r;
    return out;
}

inline MultistartResult vqe_multistart(const PauliSum& h, const AnsatzCircuit& c, const Statevector& ref,
                                       int n_starts, std::uint64_t seed, const VqeOptions& opts = {}) {
    return vqe_multistart(CompiledOperator(h), c, ref, n_starts, seed, opts);
}

} // namespace wahtor
