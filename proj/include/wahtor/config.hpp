#pragma once

#include "wahtor/errors.hpp"
#include "wahtor/integrals.hpp"
#include "wahtor/simulator.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace wahtor {

/// One row of published reference energies for a molecule.
struct ReferenceRow {
    double vqe = 0.0;
    double vqe_percent = 0.0;
    double wahtor = 0.0;
    double wahtor_percent = 0.0;
    std::optional<double> delta; // empty when the orbitals coincide with the natural ones
};

/// Sidecar metadata shipped next to each FCIDUMP fixture.
struct MoleculeMetadata {
    std::string name;
    std::string geometry;
    std::string basis;
    int n_qubits = 0;
    int n_electrons = 0;
    int frozen_core_orbitals = 0;
    SymmetryGroups symmetry_groups;
    int ansatz_depth = 1;
    double hf_energy = 0.0;
    double fci_energy = 0.0;
    std::vector<ReferenceRow> reference_rows;
};

inline MoleculeMetadata parse_metadata(const nlohmann::json& j) {
    try {
        MoleculeMetadata m;
        m.name = j.at("name").get<std::string>();
        m.geometry = j.value("geometry", "");
        m.basis = j.value("basis", "");
        m.n_qubits = j.at("n_qubits").get<int>();
        m.n_electrons = j.at("n_electrons").get<int>();
        m.frozen_core_orbitals = j.value("frozen_core_orbitals", 0);
        m.symmetry_groups.groups = j.at("symmetry_groups").get<std::vector<std::vector<int>>>();
        m.ansatz_depth = j.value("ansatz_depth", 1);
        m.hf_energy = j.at("hf_energy").get<double>();
        const auto& ref = j.at("reference");
        m.fci_energy = ref.at("fci").get<double>();
        for (const auto& row : ref.value("rows", nlohmann::json::array())) {
            ReferenceRow r;
            r.vqe = row.at("vqe").get<double>();
            r.vqe_percent = row.at("vqe_percent").get<double>();
            r.wahtor = row.at("wahtor").get<double>();
            r.wahtor_percent = row.at("wahtor_percent").get<double>();
            if (row.contains("delta") && !row.at("delta").is_null()) r.delta = row.at("delta").get<double>();
            m.reference_rows.push_back(r);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("metadata: ") + e.what(), 0);
    }
}

inline MoleculeMetadata load_metadata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open metadata file " + path.string(), 0);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("metadata " + path.string() + ": " + e.what(), 0);
    }
    return parse_metadata(j);
}

/// Settings for one command-line run, read from a `key = value` file.
struct RunConfig {
    std::filesystem::path fcidump_path;
    std::filesystem::path metadata_path;
    std::optional<int> ansatz_depth;               // defaults to the metadata value
    std::optional<std::vector<QubitPair>> entangler; // empty = ladder
    int n_starts = 20;
    std::uint64_t seed = 0;
    int max_evaluations = 10000;
    double gradient_tolerance = 1e-8;
    double energy_tolerance = 1e-10;
    double wahtor_convergence = 1e-6;
    int max_outer_iterations = 50;
    double trust_radius = 0.1;
    bool include_core_energy = false;
    std::filesystem::path output_path = "out";
};

namespace detail {

inline int config_int(const std::string& v, int line) {
    long out = 0;
    if (!parse_int(v, out)) throw ParseError("expected an integer, got '" + v + "'", static_cast<std::size_t>(line));
    return static_cast<int>(out);
}

inline double config_real(const std::string& v, int line) {
    double out = 0.0;
    if (!parse_real(v, out)) throw ParseError("expected a number, got '" + v + "'", static_cast<std::size_t>(line));
    return out;
}

inline bool parse_bool(const std::string& v, int line) {
    const std::string u = upper(v);
    if (u == "TRUE" || u == "YES" || u == "1" || u == "ON") return true;
    if (u == "FALSE" || u == "NO" || u == "0" || u == "OFF") return false;
    throw ParseError("expected a boolean, got '" + v + "'", line);
}

// "ladder" or a list such as "0-1, 1-2, 2-3".
inline std::optional<std::vector<QubitPair>> parse_entangler(const std::string& v, int line) {
    if (upper(v) == "LADDER") return std::nullopt;
    std::vector<QubitPair> pairs;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = std::string(trim(item));
        if (item.empty()) continue;
        const auto dash = item.find('-');
        if (dash == std::string::npos) throw ParseError("entangler pair '" + item + "' must look like a-b", line);
        pairs.push_back({config_int(std::string(trim(item.substr(0, dash))), line),
                         config_int(std::string(trim(item.substr(dash + 1))), line)});
    }
    if (pairs.empty()) throw ParseError("empty entangler list", line);
    return pairs;
}

} // namespace detail

/// Parses `key = value` lines; `#` starts a comment. Relative paths are
/// resolved against `base_dir`.
inline RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    bool have_fcidump = false, have_metadata = false;
    std::string raw;
    int line = 0;
    auto resolve = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string text(detail::trim(raw));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line);
        const std::string key(detail::trim(std::string_view(text).substr(0, eq)));
        const std::string value(detail::trim(std::string_view(text).substr(eq + 1)));
        if (value.empty()) throw ParseError("missing value for '" + key + "'", line);

        if (key == "fcidump") {
            c.fcidump_path = resolve(value);
            have_fcidump = true;
        } else if (key == "metadata") {
            c.metadata_path = resolve(value);
            have_metadata = true;
        } else if (key == "ansatz_depth") {
            c.ansatz_depth = detail::config_int(value, line);
        } else if (key == "entangler") {
            c.entangler = detail::parse_entangler(value, line);
        } else if (key == "n_starts") {
            c.n_starts = detail::config_int(value, line);
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(detail::config_int(value, line));
        } else if (key == "max_evaluations") {
            c.max_evaluations = detail::config_int(value, line);
        } else if (key == "gradient_tolerance") {
            c.gradient_tolerance = detail::config_real(value, line);
        } else if (key == "energy_tolerance") {
            c.energy_tolerance = detail::config_real(value, line);
        } else if (key == "wahtor_convergence") {
            c.wahtor_convergence = detail::config_real(value, line);
        } else if (key == "max_outer_iterations") {
            c.max_outer_iterations = detail::config_int(value, line);
        } else if (key == "trust_radius") {
            c.trust_radius = detail::config_real(value, line);
        } else if (key == "include_core_energy") {
            c.include_core_energy = detail::parse_bool(value, line);
        } else if (key == "output") {
            c.output_path = resolve(value);
        } else {
            throw ParseError("unknown key '" + key + "'", line);
        }
    }
    if (!have_fcidump) throw ParseError("config is missing 'fcidump'", line);
    if (!have_metadata) throw ParseError("config is missing 'metadata'", line);
    if (c.ansatz_depth && *c.ansatz_depth < 1) throw ParseError("ansatz_depth must be at least 1", 0);
    if (c.n_starts < 1) throw ParseError("n_starts must be at least 1", 0);
    if (!(c.trust_radius > 0.0)) throw ParseError("trust_radius must be positive", 0);
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string(), 0);
    return parse_config(in, path.parent_path());
}

} // namespace wahtor
