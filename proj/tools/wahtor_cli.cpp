// Command-line front end: fci | vqe | wahtor | mutual-info.
//
// Exit codes: 0 success (and, for iterative runs, converged), 2 bad input
// (parse error, missing file, inconsistent data), 3 numerical failure,
// 4 finished without converging.

#include "wahtor/analysis.hpp"
#include "wahtor/config.hpp"
#include "wahtor/wahtor.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace wahtor;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_numerical = 3;
constexpr int exit_not_converged = 4;

struct Inputs {
    RunConfig config;
    SpatialIntegrals ints;
    MoleculeMetadata meta;
    double shift = 0.0; // added to every reported energy

    double report(double e) const { return e + shift; }
};

Inputs load_inputs(const std::string& config_path, std::optional<std::uint64_t> seed,
                   const std::optional<std::string>& output) {
    Inputs in;
    in.config = load_config(config_path);
    if (seed) in.config.seed = *seed;
    if (output) in.config.output_path = *output;
    in.ints = load_fcidump(in.config.fcidump_path);
    in.meta = load_metadata(in.config.metadata_path);
    if (in.meta.n_qubits != 2 * in.ints.n_orbitals || in.meta.n_electrons != in.ints.n_electrons)
        throw ConsistencyError("metadata " + in.config.metadata_path.string() + " does not match the FCIDUMP header");
    validate_symmetry_groups(in.meta.symmetry_groups, in.ints.n_orbitals);
    in.shift = in.config.include_core_energy ? in.ints.core_energy : 0.0;
    return in;
}

AnsatzCircuit make_ansatz(const Inputs& in) {
    const int n = 2 * in.ints.n_orbitals;
    const int depth = in.config.ansatz_depth.value_or(in.meta.ansatz_depth);
    return {n, depth, in.config.entangler.value_or(ladder_entangler(n))};
}

VqeOptions vqe_options(const RunConfig& c) {
    VqeOptions o;
    o.optimizer.max_evaluations = c.max_evaluations;
    o.optimizer.gradient_tolerance = c.gradient_tolerance;
    o.optimizer.energy_tolerance = c.energy_tolerance;
    return o;
}

// Hartree-Fock and FCI energies are always recomputed from the integrals so
// that the fractions refer to the same Hamiltonian as the run.
struct References {
    double hf = 0.0;
    FciSolution fci;
};

References references(const Inputs& in) { return {hartree_fock_energy(in.ints), fci_solve(in.ints)}; }

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

fs::path prepare_output(const RunConfig& c) {
    fs::create_directories(c.output_path);
    return c.output_path;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string(), 0);
    out << j.dump(2) << '\n';
}

void write_matrix(const fs::path& dir, const std::string& stem, const MutualInfoMatrix& mi) {
    std::ofstream csv(dir / (stem + ".csv"));
    if (!csv) throw ParseError("cannot write " + (dir / (stem + ".csv")).string(), 0);
    write_csv(csv, mi.values);
    write_json(dir / (stem + ".json"), json{{"n_qubits", mi.n_qubits}, {"values", matrix_json(mi.values)}});
}

json delta_json(const DeltaResult& d) {
    json j;
    j["delta"] = d.value ? json(*d.value) : json(nullptr);
    j["hf_equals_natural_orbitals"] = d.hf_equals_no();
    j["delta_denominator"] = d.denominator;
    return j;
}

int cmd_fci(const Inputs& in) {
    const auto ref = references(in);
    const auto no = natural_orbitals(ref.fci, in.ints.n_orbitals);
    std::cout.precision(10);
    std::cout << "molecule " << in.meta.name << '\n'
              << "energy " << in.report(ref.fci.energy) << '\n'
              << "hartree_fock " << in.report(ref.hf) << '\n'
              << "occupations";
    for (Eigen::Index k = 0; k < no.occupations.size(); ++k) std::cout << ' ' << no.occupations(k);
    std::cout << '\n';

    const auto dir = prepare_output(in.config);
    json j;
    j["molecule"] = in.meta.name;
    j["fci_energy"] = in.report(ref.fci.energy);
    j["hf_energy"] = in.report(ref.hf);
    j["residual"] = ref.fci.residual;
    j["natural_occupations"] = std::vector<double>(no.occupations.data(), no.occupations.data() + no.occupations.size());
    j["include_core_energy"] = in.config.include_core_energy;
    write_json(dir / "fci.json", j);
    return exit_ok;
}

int cmd_vqe(const Inputs& in) {
    const auto ref = references(in);
    const auto circuit = make_ansatz(in);
    const auto ms = vqe_multistart(CompiledOperator(qubit_hamiltonian(in.ints)), circuit,
                                   hf_reference(circuit.n_qubits, in.ints.n_electrons), in.config.n_starts,
                                   in.config.seed, vqe_options(in.config));
    const double eps = correlation_fraction(ms.best.energy, ref.hf, ref.fci.energy);
    std::cout.precision(10);
    std::cout << "molecule " << in.meta.name << '\n'
              << "vqe_energy " << in.report(ms.best.energy) << '\n'
              << "epsilon " << eps << '\n';

    const auto dir = prepare_output(in.config);
    json j;
    j["molecule"] = in.meta.name;
    j["vqe_energy"] = in.report(ms.best.energy);
    j["hf_energy"] = in.report(ref.hf);
    j["fci_energy"] = in.report(ref.fci.energy);
    j["epsilon"] = eps;
    j["best_seed"] = ms.best.seed;
    j["theta"] = ms.best.theta;
    json runs = json::array();
    for (const auto& r : ms.runs)
        runs.push_back({{"seed", r.seed}, {"energy", in.report(r.energy)}, {"evaluations", r.n_evaluations},
                        {"converged", r.converged}});
    j["runs"] = runs;
    j["converged"] = ms.best.converged;
    write_json(dir / "vqe.json", j);
    return ms.best.converged ? exit_ok : exit_not_converged;
}

WahtorOptions wahtor_options(const RunConfig& c) {
    WahtorOptions o;
    o.n_starts = c.n_starts;
    o.seed = c.seed;
    o.vqe = vqe_options(c);
    o.convergence = c.wahtor_convergence;
    o.max_outer_iterations = c.max_outer_iterations;
    o.trust_region.initial_radius = c.trust_radius;
    return o;
}

// The five mutual-information panels of a finished run.
struct Panels {
    MutualInfoMatrix vqe_hf, wahtor_rotated, ground_hf, ground_rotated, ground_natural;
};

Panels mutual_info_panels(const Inputs& in, const References& ref, const WahtorReport& rep, const NaturalOrbitals& no) {
    const auto circuit = make_ansatz(in);
    const auto hf = hf_reference(circuit.n_qubits, in.ints.n_electrons);
    return {mutual_information(apply_ansatz(circuit, rep.initial_vqe.theta, hf)),
            mutual_information(rep.final_state),
            mutual_information(ref.fci.ground_vector),
            mutual_information(basis_change_state(in.ints, rep.state.accumulated_rotation).ground_vector),
            mutual_information(basis_change_state(in.ints, no.coefficients).ground_vector)};
}

int cmd_wahtor(const Inputs& in) {
    const auto ref = references(in);
    const auto circuit = make_ansatz(in);
    const auto rep = wahtor_run(in.ints, in.meta.symmetry_groups, circuit, wahtor_options(in.config));
    const auto no = natural_orbitals_in_groups(spatial_one_rdm(ref.fci.ground_vector), in.meta.symmetry_groups);
    const auto delta = delta_metric(rep.state.accumulated_rotation, no.coefficients, in.meta.symmetry_groups);
    const double e_vqe = rep.initial_vqe.energy, e_w = rep.state.energy_history.back();
    const double eps_vqe = correlation_fraction(e_vqe, ref.hf, ref.fci.energy);
    const double eps_w = correlation_fraction(e_w, ref.hf, ref.fci.energy);

    std::cout.precision(10);
    std::cout << "molecule " << in.meta.name << '\n'
              << "vqe_energy " << in.report(e_vqe) << " epsilon " << eps_vqe << '\n'
              << "wahtor_energy " << in.report(e_w) << " epsilon " << eps_w << '\n'
              << "outer_iterations " << rep.iterations.size() << " converged " << rep.converged << '\n'
              << "delta " << (delta.value ? std::to_string(*delta.value) : std::string("hf=no")) << '\n';

    const auto dir = prepare_output(in.config);
    json j;
    json iterations = json::array();
    for (const auto& it : rep.iterations)
        iterations.push_back({{"vqe_energy", in.report(it.vqe_energy)},
                              {"post_rotation_energy", in.report(it.post_rotation_energy)},
                              {"grad_norm", it.grad_norm},
                              {"radius", it.radius}});
    j["iterations"] = iterations;
    j["final_rotation"] = matrix_json(rep.state.accumulated_rotation);
    j["final_theta"] = rep.state.theta;
    j["converged"] = rep.converged;
    j["molecule"] = in.meta.name;
    j["hf_energy"] = in.report(ref.hf);
    j["fci_energy"] = in.report(ref.fci.energy);
    j["vqe_energy"] = in.report(e_vqe);
    j["wahtor_energy"] = in.report(e_w);
    j["epsilon_vqe"] = eps_vqe;
    j["epsilon_wahtor"] = eps_w;
    j.update(delta_json(delta));
    json history = json::array();
    for (double e : rep.state.energy_history) history.push_back(in.report(e));
    j["energy_history"] = history;
    write_json(dir / "wahtor.json", j);

    const auto p = mutual_info_panels(in, ref, rep, no);
    write_matrix(dir, "mi_vqe_hf", p.vqe_hf);
    write_matrix(dir, "mi_wahtor_rotated", p.wahtor_rotated);
    write_matrix(dir, "mi_ground_hf", p.ground_hf);
    write_matrix(dir, "mi_ground_rotated", p.ground_rotated);
    write_matrix(dir, "mi_ground_natural", p.ground_natural);
    return rep.converged ? exit_ok : exit_not_converged;
}

int cmd_mutual_info(const Inputs& in, const std::string& which) {
    const auto ref = references(in);
    const auto dir = prepare_output(in.config);
    auto no = [&] { return natural_orbitals_in_groups(spatial_one_rdm(ref.fci.ground_vector), in.meta.symmetry_groups); };
    if (which == "ground-hf") {
        write_matrix(dir, "mi_ground_hf", mutual_information(ref.fci.ground_vector));
        return exit_ok;
    }
    if (which == "ground-natural") {
        write_matrix(dir, "mi_ground_natural",
                     mutual_information(basis_change_state(in.ints, no().coefficients).ground_vector));
        return exit_ok;
    }
    const auto circuit = make_ansatz(in);
    if (which == "vqe-hf") {
        const auto hf = hf_reference(circuit.n_qubits, in.ints.n_electrons);
        const auto ms = vqe_multistart(CompiledOperator(qubit_hamiltonian(in.ints)), circuit, hf, in.config.n_starts,
                                       in.config.seed, vqe_options(in.config));
        write_matrix(dir, "mi_vqe_hf", mutual_information(apply_ansatz(circuit, ms.best.theta, hf)));
        return ms.best.converged ? exit_ok : exit_not_converged;
    }
    // The remaining panels need a finished orbital optimization.
    const auto rep = wahtor_run(in.ints, in.meta.symmetry_groups, circuit, wahtor_options(in.config));
    if (which == "wahtor-rotated") {
        write_matrix(dir, "mi_wahtor_rotated", mutual_information(rep.final_state));
    } else if (which == "ground-rotated") {
        write_matrix(dir, "mi_ground_rotated",
                     mutual_information(basis_change_state(in.ints, rep.state.accumulated_rotation).ground_vector));
    } else { // all
        const auto p = mutual_info_panels(in, ref, rep, no());
        write_matrix(dir, "mi_vqe_hf", p.vqe_hf);
        write_matrix(dir, "mi_wahtor_rotated", p.wahtor_rotated);
        write_matrix(dir, "mi_ground_hf", p.ground_hf);
        write_matrix(dir, "mi_ground_rotated", p.ground_rotated);
        write_matrix(dir, "mi_ground_natural", p.ground_natural);
    }
    return rep.converged ? exit_ok : exit_not_converged;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Orbital-rotation assisted VQE on a statevector simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    int threads = 0;
    std::string which = "all";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--seed", seed, "override the multistart seed");
        sub->add_option("--output", output, "output directory");
        sub->add_option("--threads", threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    };
    auto* fci = app.add_subcommand("fci", "exact ground state in the Hartree-Fock basis");
    auto* vqe = app.add_subcommand("vqe", "multistart VQE at fixed orbitals");
    auto* wahtor = app.add_subcommand("wahtor", "VQE alternated with orbital optimization");
    auto* mi = app.add_subcommand("mutual-info", "qubit mutual-information matrix of one state");
    for (auto* sub : {fci, vqe, wahtor, mi}) add_common(sub);
    mi->add_option("--state", which, "which state and basis")
        ->check(CLI::IsMember({"vqe-hf", "wahtor-rotated", "ground-hf", "ground-rotated", "ground-natural", "all"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_input;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        const Inputs in = load_inputs(config_path, seed, output);
        if (*fci) return cmd_fci(in);
        if (*vqe) return cmd_vqe(in);
        if (*wahtor) return cmd_wahtor(in);
        return cmd_mutual_info(in, which);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const DegenerateError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    }
}
