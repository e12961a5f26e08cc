#pragma once

#include "wahtor/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wahtor {

/// Dense real rank-4 tensor over `m` orbitals, row-major in (p, q, r, s).
class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(int m) : m_(m), data_(static_cast<std::size_t>(m) * m * m * m, 0.0) {}

    int dim() const noexcept { return m_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(int p, int q, int r, int s) noexcept { return data_[index(p, q, r, s)]; }
    double operator()(int p, int q, int r, int s) const noexcept { return data_[index(p, q, r, s)]; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    std::size_t index(int p, int q, int r, int s) const noexcept {
        return ((static_cast<std::size_t>(p) * m_ + q) * m_ + r) * m_ + s;
    }

    Tensor4& operator+=(const Tensor4& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Tensor4& operator*=(double a) {
        for (auto& v : data_) v *= a;
        return *this;
    }
    double max_abs() const {
        double r = 0.0;
        for (double v : data_) r = std::max(r, std::abs(v));
        return r;
    }

private:
    int m_ = 0;
    std::vector<double> data_;
};

/// One- and two-electron integrals over `n_orbitals` spatial orbitals.
///
/// `two_body` is stored in chemist notation (pq|rs) with all eight real
/// permutational images populated. Indices are 0-based.
struct SpatialIntegrals {
    int n_orbitals = 0;
    int n_electrons = 0;
    int ms2 = 0;
    double core_energy = 0.0;
    Eigen::MatrixXd one_body;
    Tensor4 two_body;
    std::vector<int> orbital_symmetry;

    SpatialIntegrals() = default;
    SpatialIntegrals(int m, int electrons, int ms2_ = 0)
        : n_orbitals(m), n_electrons(electrons), ms2(ms2_), one_body(Eigen::MatrixXd::Zero(m, m)),
          two_body(m), orbital_symmetry(static_cast<std::size_t>(m), 1) {}

    /// Sets (pq|rs) and its seven symmetry images.
    void set_two_body(int p, int q, int r, int s, double v) {
        for (auto [a, b] : {std::pair{p, q}, std::pair{q, p}})
            for (auto [c, d] : {std::pair{r, s}, std::pair{s, r}}) {
                two_body(a, b, c, d) = v;
                two_body(c, d, a, b) = v;
            }
    }
};

/// Largest violation of the h1 symmetry and 8-fold h2 symmetry.
inline double symmetry_violation(const SpatialIntegrals& ints) {
    const int m = ints.n_orbitals;
    double worst = (ints.one_body - ints.one_body.transpose()).cwiseAbs().maxCoeff();
    const auto& g = ints.two_body;
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
            for (int r = 0; r < m; ++r)
                for (int s = 0; s < m; ++s) {
                    const double v = g(p, q, r, s);
                    for (double w : {g(q, p, r, s), g(p, q, s, r), g(q, p, s, r), g(r, s, p, q), g(s, r, p, q),
                                     g(r, s, q, p), g(s, r, q, p)})
                        worst = std::max(worst, std::abs(v - w));
                }
    return worst;
}

namespace detail {

inline std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool parse_int(std::string_view s, long& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

// Accepts Fortran-style 'D' exponents.
inline bool parse_real(std::string_view s, double& out) {
    std::string t(trim(s));
    for (auto& c : t)
        if (c == 'D' || c == 'd') c = 'E';
    if (!t.empty() && t.front() == '+') t.erase(0, 1);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc{} && ptr == t.data() + t.size() && !t.empty();
}

// Canonical representative of the 8 images of (pq|rs).
inline std::array<int, 4> canonical_pair(int p, int q, int r, int s) {
    if (p < q) std::swap(p, q);
    if (r < s) std::swap(r, s);
    if (std::pair{p, q} < std::pair{r, s}) {
        std::swap(p, r);
        std::swap(q, s);
    }
    return {p, q, r, s};
}

} // namespace detail

/// Parses FCIDUMP text. Indices are converted to 0-based.
///
/// Lines `x 0 0 0 0` set the core energy, `x i j 0 0` set h1 (symmetrized),
/// `x i 0 0 0` (orbital energies) are ignored, everything else sets (ij|kl).
inline SpatialIntegrals parse_fcidump(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::string header;
    bool started = false, finished = false;
    std::size_t header_line = 0;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string up = detail::upper(line);
        if (!started) {
            if (detail::trim(up).empty()) continue;
            const auto pos = up.find("&FCI");
            if (pos == std::string::npos) throw ParseError("expected &FCI namelist", line_no);
            started = true;
            header_line = line_no;
            std::string rest = up.substr(pos + 4);
            if (auto e = rest.find("&END"); e != std::string::npos) {
                header += rest.substr(0, e);
                finished = true;
                break;
            }
            header += rest + ",";
            continue;
        }
        auto e = up.find("&END");
        if (e == std::string::npos && detail::trim(up) == "/") e = up.find('/');
        if (e != std::string::npos) {
            header += up.substr(0, e);
            finished = true;
            break;
        }
        header += up + ",";
    }
    if (!started) throw ParseError("empty input: no &FCI namelist");
    if (!finished) throw ParseError("unterminated &FCI namelist", header_line);

    // Split on commas and whitespace; a token with '=' opens a new key.
    std::map<std::string, std::vector<std::string>> keys;
    std::string current;
    std::string token;
    auto flush = [&](const std::string& tok) {
        if (tok.empty()) return;
        if (auto eq = tok.find('='); eq != std::string::npos) {
            current = std::string(detail::trim(tok.substr(0, eq)));
            if (current.empty()) throw ParseError("namelist entry without a key", header_line);
            keys[current];
            auto value = std::string(detail::trim(tok.substr(eq + 1)));
            if (!value.empty()) keys[current].push_back(value);
        } else {
            if (current.empty()) throw ParseError("namelist value '" + tok + "' without a key", header_line);
            keys[current].push_back(tok);
        }
    };
    // "NORB =4" would otherwise split the key from its '='.
    std::string compact;
    for (char c : header) {
        if (c == '=')
            while (!compact.empty() && std::isspace(static_cast<unsigned char>(compact.back()))) compact.pop_back();
        compact.push_back(c);
    }
    for (char c : compact) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            flush(token);
            token.clear();
        } else {
            token.push_back(c);
        }
    }
    flush(token);
    auto scalar = [&](const std::string& key, bool required, long fallback) -> long {
        auto it = keys.find(key);
        if (it == keys.end() || it->second.empty()) {
            if (required) throw ParseError("namelist is missing " + key, header_line);
            return fallback;
        }
        long v = 0;
        if (!detail::parse_int(it->second.front(), v))
            throw ParseError("malformed value for " + key + ": '" + it->second.front() + "'", header_line);
        return v;
    };
    const long norb = scalar("NORB", true, 0);
    const long nelec = scalar("NELEC", true, 0);
    const long ms2 = scalar("MS2", false, 0);
    if (norb < 1) throw ParseError("NORB must be positive", header_line);
    if (nelec < 0 || nelec > 2 * norb) throw ParseError("NELEC out of range 0..2*NORB", header_line);

    SpatialIntegrals ints(static_cast<int>(norb), static_cast<int>(nelec), static_cast<int>(ms2));
    if (auto it = keys.find("ORBSYM"); it != keys.end() && !it->second.empty()) {
        if (static_cast<long>(it->second.size()) != norb)
            throw ParseError("ORBSYM has " + std::to_string(it->second.size()) + " entries, expected NORB",
                             header_line);
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            long v = 0;
            if (!detail::parse_int(it->second[i], v)) throw ParseError("malformed ORBSYM entry", header_line);
            ints.orbital_symmetry[i] = static_cast<int>(v);
        }
    }

    const int m = ints.n_orbitals;
    std::vector<char> seen2(ints.two_body.size(), 0);
    std::vector<char> seen1(static_cast<std::size_t>(m) * m, 0);
    bool seen_core = false;
    constexpr double conflict_tol = 1e-10;

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string fields[5];
        int n = 0;
        std::string extra;
        while (n < 5 && ls >> fields[n]) ++n;
        if (n == 0) continue;
        if (n != 5 || (ls >> extra)) throw ParseError("expected 'value i j k l'", line_no);
        double value = 0.0;
        if (!detail::parse_real(fields[0], value) || !std::isfinite(value))
            throw ParseError("malformed value '" + fields[0] + "'", line_no);
        long idx[4];
        for (int k = 0; k < 4; ++k) {
            if (!detail::parse_int(fields[k + 1], idx[k]))
                throw ParseError("malformed index '" + fields[k + 1] + "'", line_no);
            if (idx[k] < 0 || idx[k] > norb)
                throw IndexError("line " + std::to_string(line_no) + ": index " + std::to_string(idx[k]) +
                                 " outside 0.." + std::to_string(norb));
        }
        const auto [i, j, k, l] = idx;
        auto conflict = [&](double old) {
            if (std::abs(old - value) > conflict_tol)
                throw ConsistencyError("line " + std::to_string(line_no) + ": conflicting duplicate entry (" +
                                       std::to_string(old) + " vs " + std::to_string(value) + ")");
        };
        if (i == 0 && j == 0 && k == 0 && l == 0) {
            if (seen_core) conflict(ints.core_energy);
            ints.core_energy = value;
            seen_core = true;
        } else if (i > 0 && j == 0 && k == 0 && l == 0) {
            continue;
        } else if (i > 0 && j > 0 && k == 0 && l == 0) {
            const int p = static_cast<int>(std::max(i, j)) - 1, q = static_cast<int>(std::min(i, j)) - 1;
            auto& flag = seen1[static_cast<std::size_t>(p) * m + q];
            if (flag) conflict(ints.one_body(p, q));
            ints.one_body(p, q) = ints.one_body(q, p) = value;
            flag = 1;
        } else if (i > 0 && j > 0 && k > 0 && l > 0) {
            const auto c = detail::canonical_pair(static_cast<int>(i) - 1, static_cast<int>(j) - 1,
                                                  static_cast<int>(k) - 1, static_cast<int>(l) - 1);
            auto& flag = seen2[ints.two_body.index(c[0], c[1], c[2], c[3])];
            if (flag) conflict(ints.two_body(c[0], c[1], c[2], c[3]));
            ints.set_two_body(c[0], c[1], c[2], c[3], value);
            flag = 1;
        } else {
            throw ParseError("unsupported index pattern", line_no);
        }
    }
    return ints;
}

inline SpatialIntegrals parse_fcidump(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_fcidump(in);
}

inline SpatialIntegrals load_fcidump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open FCIDUMP file '" + path + "'");
    return parse_fcidump(in);
}

/// Writes the unique (canonical) nonzero entries in FCIDUMP format.
inline void write_fcidump(std::ostream& out, const SpatialIntegrals& ints, double threshold = 0.0) {
    const int m = ints.n_orbitals;
    out << " &FCI NORB=" << m << ",NELEC=" << ints.n_electrons << ",MS2=" << ints.ms2 << ",\n  ORBSYM=";
    for (int s : ints.orbital_symmetry) out << s << ',';
    out << "\n  ISYM=1,\n &END\n";
    out << std::scientific << std::setprecision(17);
    auto line = [&](double v, int i, int j, int k, int l) {
        out << std::setw(25) << v << ' ' << i << ' ' << j << ' ' << k << ' ' << l << '\n';
    };
    for (int p = 0; p < m; ++p)
        for (int q = 0; q <= p; ++q)
            for (int r = 0; r <= p; ++r)
                for (int s = 0; s <= r; ++s) {
                    if (std::pair{p, q} < std::pair{r, s}) continue;
                    const double v = ints.two_body(p, q, r, s);
                    if (std::abs(v) > threshold) line(v, p + 1, q + 1, r + 1, s + 1);
                }
    for (int p = 0; p < m; ++p)
        for (int q = 0; q <= p; ++q)
            if (std::abs(ints.one_body(p, q)) > threshold) line(ints.one_body(p, q), p + 1, q + 1, 0, 0);
    line(ints.core_energy, 0, 0, 0, 0);
}

/// Disjoint groups of 1-based orbital indices that may be mixed by rotations.
struct SymmetryGroups {
    std::vector<std::vector<int>> groups;
};

/// Throws GroupError on overlapping or out-of-range indices.
inline void validate_symmetry_groups(const SymmetryGroups& g, int n_orbitals) {
    std::vector<int> owner(static_cast<std::size_t>(n_orbitals) + 1, -1);
    for (std::size_t gi = 0; gi < g.groups.size(); ++gi)
        for (int idx : g.groups[gi]) {
            if (idx < 1 || idx > n_orbitals)
                throw GroupError("orbital index " + std::to_string(idx) + " in group " + std::to_string(gi + 1) +
                                 " is outside 1.." + std::to_string(n_orbitals));
            if (owner[idx] >= 0)
                throw GroupError("orbital " + std::to_string(idx) + " appears in groups " +
                                 std::to_string(owner[idx] + 1) + " and " + std::to_string(gi + 1));
            owner[idx] = static_cast<int>(gi);
        }
}

inline void validate_symmetry_groups(const SymmetryGroups& g, const SpatialIntegrals& ints) {
    validate_symmetry_groups(g, ints.n_orbitals);
}

} // namespace wahtor
