#pragma once

#include "wahtor/errors.hpp"
#include "wahtor/integrals.hpp"
#include "wahtor/pauli.hpp"
#include "wahtor/rotation.hpp"
#include "wahtor/simulator.hpp"
#include "wahtor/trust_region.hpp"
#include "wahtor/vqe.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace wahtor {

/// <psi|H(R)|psi> from cached RDMs: sum h1 . D + 1/2 sum (pq|rs) P_pqrs, where
/// D and P are the spin-summed spatial 1- and 2-RDMs.
inline double fixed_state_energy(const ReducedDensityMatrices& rdms, const SpatialIntegrals& ints,
                                 bool include_core = false) {
    const int m = ints.n_orbitals;
    if (rdms.n_modes != 2 * m) throw DimensionError("RDMs and integrals describe different orbital counts");
    double e = (ints.one_body.array() * rdms.one_spatial.array()).sum();
    double two = 0.0;
    const auto& a = ints.two_body.data();
    const auto& b = rdms.two_spatial.data();
    for (std::size_t i = 0; i < a.size(); ++i) two += a[i] * b[i];
    e += 0.5 * two;
    if (include_core) e += ints.core_energy;
    return e;
}

namespace detail {

inline double contract(const Tensor4& a, const Tensor4& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

} // namespace detail

struct EnergyDerivatives {
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// Gradient and Hessian of the fixed-state energy with respect to the
/// rotation parameters at R = 0.
inline EnergyDerivatives energy_gradient_hessian(const ReducedDensityMatrices& rdms, const RotationDerivatives& d) {
    const auto n = static_cast<Eigen::Index>(d.grad_h1.size());
    EnergyDerivatives out{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index l = 0; l < n; ++l) {
        const auto ul = static_cast<std::size_t>(l);
        out.gradient(l) = (d.grad_h1[ul].array() * rdms.one_spatial.array()).sum() +
                          0.5 * detail::contract(d.grad_h2[ul], rdms.two_spatial);
    }
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a; b < n; ++b) {
            const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
            const double v = (d.hess_h1[ua][ub].array() * rdms.one_spatial.array()).sum() +
                             0.5 * detail::contract(d.hess_h2[ua][ub], rdms.two_spatial);
            out.hessian(a, b) = out.hessian(b, a) = v;
        }
    return out;
}

inline EnergyDerivatives energy_gradient_hessian(const ReducedDensityMatrices& rdms, const SpatialIntegrals& ints,
                                                 const GeneratorSet& g) {
    return energy_gradient_hessian(rdms, derivatives_at_zero(ints, g));
}

/// Progress of the alternating optimization.
///
/// `accumulated_rotation` holds the current orbitals as columns expressed in
/// the starting (Hartree-Fock) basis, so that
/// current_integrals = transform_integrals(hf_integrals, accumulated_rotation).
struct WahtorState {
    Eigen::MatrixXd accumulated_rotation;
    SpatialIntegrals current_integrals;
    std::vector<double> theta;
    std::vector<double> energy_history;
    int outer_iteration = 0;

    static WahtorState initial(const SpatialIntegrals& hf) {
        WahtorState s;
        s.accumulated_rotation = Eigen::MatrixXd::Identity(hf.n_orbitals, hf.n_orbitals);
        s.current_integrals = hf;
        return s;
    }
};

struct TrustRegionOptions {
    double initial_radius = 0.1;
    double eta = 0.1;           // acceptance threshold on actual/predicted
    double expand_ratio = 0.75; // expand when the ratio exceeds this and the step hit the boundary
    double expand = 2.0;
    double shrink = 0.25;
    double max_radius = std::numbers::pi;
    double gradient_tolerance = 1e-8;
    double energy_tolerance = 1e-9;
    int max_iterations = 100;
};

struct HamiltonianOptimization {
    double energy_before = 0.0;
    double energy_after = 0.0;
    double initial_gradient_norm = 0.0;
    double final_gradient_norm = 0.0;
    double radius = 0.0;
    int iterations = 0;
    int accepted_steps = 0;
};

/// Trust-region minimization of the fixed-state energy over orbital
/// rotations. Every accepted step is folded into the state's integrals and
/// accumulated rotation, and the expansion restarts at R = 0.
inline HamiltonianOptimization optimize_hamiltonian(const ReducedDensityMatrices& rdms, WahtorState& state,
                                                    const GeneratorSet& g, const TrustRegionOptions& opts = {}) {
    HamiltonianOptimization rep;
    rep.radius = opts.initial_radius;
    double energy = fixed_state_energy(rdms, state.current_integrals);
    rep.energy_before = rep.energy_after = energy;
    if (g.empty()) return rep;

    auto derivs = energy_gradient_hessian(rdms, state.current_integrals, g);
    rep.initial_gradient_norm = rep.final_gradient_norm = derivs.gradient.norm();
    double radius = opts.initial_radius;
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (derivs.gradient.norm() < opts.gradient_tolerance) break;
        ++rep.iterations;
        const auto tr = trust_region_step(derivs.gradient, derivs.hessian, radius);
        if (!(tr.predicted_decrease > 0.0)) break;
        const std::vector<double> r(tr.step.data(), tr.step.data() + tr.step.size());
        const Eigen::MatrixXd u = rotation_matrix(g, r);
        SpatialIntegrals candidate = transform_integrals(state.current_integrals, u.transpose());
        const double trial = fixed_state_energy(rdms, candidate);
        const double actual = energy - trial;
        const double ratio = actual / tr.predicted_decrease;

        if (ratio < opts.eta)
            radius *= opts.shrink;
        else if (ratio > opts.expand_ratio && tr.on_boundary)
            radius = std::min(opts.max_radius, radius * opts.expand);

        if (ratio > opts.eta && actual > 0.0) {
            state.current_integrals = std::move(candidate);
            state.accumulated_rotation = state.accumulated_rotation * u.transpose();
            if (orthogonality_error(state.accumulated_rotation) > 1e-9)
                state.accumulated_rotation = reorthogonalize(state.accumulated_rotation);
            energy = trial;
            ++rep.accepted_steps;
            derivs = energy_gradient_hessian(rdms, state.current_integrals, g);
            rep.final_gradient_norm = derivs.gradient.norm();
            if (actual < opts.energy_tolerance) break;
        }
        if (radius < 1e-14) break;
    }
    rep.energy_after = energy;
    rep.radius = radius;
    return rep;
}

struct WahtorOptions {
    int n_starts = 20;
    std::uint64_t seed = 0;
    VqeOptions vqe;
    TrustRegionOptions trust_region;
    double convergence = 1e-6; // between successive VQE energies (Hartree)
    int max_outer_iterations = 50;
    /// Skips the multistart stage and starts from these parameters.
    std::optional<std::vector<double>> initial_theta;
};

struct WahtorIteration {
    double vqe_energy = 0.0;
    double post_rotation_energy = 0.0;
    double grad_norm = 0.0;
    double radius = 0.0;
    int trust_region_iterations = 0;
};

struct WahtorReport {
    WahtorState state;
    VqeResult initial_vqe;
    std::vector<VqeResult> initial_runs;
    std::vector<WahtorIteration> iterations;
    Statevector final_state;
    bool converged = false;
};

/// Alternates VQE at fixed orbitals with trust-region orbital optimization
/// at a fixed state until two successive VQE energies agree.
inline WahtorReport wahtor_run(const SpatialIntegrals& ints, const SymmetryGroups& groups, const AnsatzCircuit& ansatz,
                               const WahtorOptions& opts = {}) {
    const GeneratorSet g = build_generators(groups, ints.n_orbitals);
    const int n_qubits = 2 * ints.n_orbitals;
    if (ansatz.n_qubits != n_qubits) throw DimensionError("ansatz register does not match the orbital count");
    const Statevector ref = hf_reference(n_qubits, ints.n_electrons);

    WahtorReport rep;
    rep.state = WahtorState::initial(ints);
    {
        const CompiledOperator h(qubit_hamiltonian(ints));
        if (opts.initial_theta) {
            rep.initial_vqe = vqe_minimize(h, ansatz, ref, *opts.initial_theta, opts.vqe);
            rep.initial_vqe.seed = opts.seed;
            rep.initial_runs = {rep.initial_vqe};
        } else {
            auto ms = vqe_multistart(h, ansatz, ref, opts.n_starts, opts.seed, opts.vqe);
            rep.initial_vqe = ms.best;
            rep.initial_runs = std::move(ms.runs);
        }
    }
    rep.state.theta = rep.initial_vqe.theta;
    rep.state.energy_history.push_back(rep.initial_vqe.energy);

    if (g.empty()) {
        rep.converged = true;
        rep.final_state = apply_ansatz(ansatz, rep.state.theta, ref);
        return rep;
    }

    for (int outer = 0; outer < opts.max_outer_iterations; ++outer) {
        const Statevector psi = apply_ansatz(ansatz, rep.state.theta, ref);
        const ReducedDensityMatrices rdms = fermionic_rdms(psi);
        const auto hopt = optimize_hamiltonian(rdms, rep.state, g, opts.trust_region);

        const CompiledOperator h(qubit_hamiltonian(rep.state.current_integrals));
        const VqeResult vqe = vqe_minimize(h, ansatz, ref, rep.state.theta, opts.vqe);
        rep.state.theta = vqe.theta;
        ++rep.state.outer_iteration;

        const double previous = rep.state.energy_history.back();
        rep.state.energy_history.push_back(vqe.energy);
        rep.iterations.push_back({vqe.energy, hopt.energy_after, hopt.initial_gradient_norm, hopt.radius, hopt.iterations});
        if (std::abs(previous - vqe.energy) < opts.convergence) {
            rep.converged = true;
            break;
        }
    }
    rep.final_state = apply_ansatz(ansatz, rep.state.theta, ref);
    return rep;
}

} // namespace wahtor
