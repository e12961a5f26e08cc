#include "oracles.hpp"
#include "wahtor/analysis.hpp"
#include "wahtor/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace wahtor;

namespace {

Eigen::MatrixXd rotation2(double phi) {
    Eigen::MatrixXd r(2, 2);
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return r;
}

Statevector random_state(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Statevector psi(n);
    for (auto& a : psi.amplitudes()) a = {d(rng), d(rng)};
    psi.normalize();
    return psi;
}

} // namespace

TEST(Fci, ToyHamiltonianGroundEnergy) {
    // Single orbital, two electrons: E = 2 h + (00|00) = -2 + 0.5.
    SpatialIntegrals ints(1, 2);
    ints.one_body(0, 0) = -1.0;
    ints.set_two_body(0, 0, 0, 0, 0.5);
    EXPECT_NEAR(fci_solve(ints).energy, -1.5, 1e-12);
}

TEST(Fci, AgreesWithDenseSectorDiagonalization) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto ints = oracle::random_integrals(3, 40 + seed);
        EXPECT_NEAR(fci_solve(ints, false).energy, oracle::sector_ground_energy(oracle::dense_hamiltonian(ints), 2),
                    1e-10);
    }
}

TEST(Fci, TabulatedEnergiesForSmallFixtures) {
    for (const char* name : {"h2", "lih"}) {
        const auto ints = load_fcidump(oracle::fixture(name, "fcidump"));
        const auto meta = load_metadata(oracle::fixture(name, "json"));
        const auto sol = fci_solve(ints);
        EXPECT_NEAR(sol.energy, meta.fci_energy, 1e-3) << name;
        EXPECT_LT(sol.residual, 1e-8) << name;
        EXPECT_NEAR(particle_number(sol.ground_vector), meta.n_electrons, 1e-10) << name;
        EXPECT_NEAR(hartree_fock_energy(ints), meta.hf_energy, 1e-8) << name;
    }
}

TEST(Fci, SpinRestrictionDoesNotChangeTheSingletGroundState) {
    const auto ints = load_fcidump(oracle::fixture("lih", "fcidump"));
    EXPECT_NEAR(fci_solve(ints, true).energy, fci_solve(ints, false).energy, 1e-10);
}

TEST(Fci, OversizedRegisterIsScaleError) {
    EXPECT_THROW(fci_solve(PauliSum(18), 2), ScaleError);
}

TEST(Fci, PhaseIsFixed) {
    const auto sol = fci_solve(load_fcidump(oracle::fixture("h2", "fcidump")));
    std::size_t arg = 0;
    for (std::size_t i = 0; i < sol.ground_vector.dim(); ++i)
        if (std::abs(sol.ground_vector[i]) > std::abs(sol.ground_vector[arg]) + 1e-12) arg = i;
    EXPECT_GT(sol.ground_vector[arg].real(), 0.0);
    EXPECT_NEAR(sol.ground_vector[arg].imag(), 0.0, 1e-14);
}

TEST(NaturalOrbitals, DeterminantHasIntegerOccupations) {
    const auto no = natural_orbitals(spatial_one_rdm(hf_reference(8, 4)));
    Eigen::VectorXd expected(4);
    expected << 2, 2, 0, 0;
    EXPECT_LT((no.occupations - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NaturalOrbitals, OccupationsSumToElectronCountAndAreBounded) {
    for (const char* name : {"h2", "lih"}) {
        const auto ints = load_fcidump(oracle::fixture(name, "fcidump"));
        const auto no = natural_orbitals(fci_solve(ints), ints.n_orbitals);
        EXPECT_NEAR(no.occupations.sum(), ints.n_electrons, 1e-10) << name;
        EXPECT_LE(no.occupations.maxCoeff(), 2.0 + 1e-12);
        EXPECT_GE(no.occupations.minCoeff(), -1e-12);
        for (Eigen::Index k = 1; k < no.occupations.size(); ++k) EXPECT_GE(no.occupations(k - 1), no.occupations(k));
        EXPECT_LT((no.coefficients.transpose() * no.coefficients -
                   Eigen::MatrixXd::Identity(ints.n_orbitals, ints.n_orbitals))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-12);
    }
}

TEST(NaturalOrbitals, SpatialDensityMatchesDenseLadderOracle) {
    const auto ints = load_fcidump(oracle::fixture("h2", "fcidump"));
    const auto sol = fci_solve(ints);
    const int m = ints.n_orbitals, n = 2 * m;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(sol.ground_vector.dim()));
    for (std::size_t i = 0; i < sol.ground_vector.dim(); ++i) v(static_cast<Eigen::Index>(i)) = sol.ground_vector[i];
    const auto d = spatial_one_rdm(sol.ground_vector);
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
            double want = 0.0;
            for (int s = 0; s < 2; ++s) {
                const Eigen::SparseMatrix<double> ap = oracle::annihilator(n, p + s * m);
                const Eigen::SparseMatrix<double> aq = oracle::annihilator(n, q + s * m);
                const Eigen::SparseMatrix<double> op = Eigen::SparseMatrix<double>(ap.transpose()) * aq;
                want += v.dot(op.cast<cplx>() * v).real();
            }
            EXPECT_NEAR(d(p, q), want, 1e-12);
        }
}

TEST(NaturalOrbitals, GroupwiseKeepsSlotsAndLeavesOtherOrbitals) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 4);
    d.diagonal() << 1.9, 0.05, 1.0, 0.05;
    d(0, 1) = d(1, 0) = 0.1;
    d(2, 3) = d(3, 2) = 0.3;
    const auto no = natural_orbitals_in_groups(d, SymmetryGroups{{{1, 2}}});
    EXPECT_TRUE(no.coefficients.block(2, 2, 2, 2).isIdentity(0.0)); // not in a group
    EXPECT_GT(no.coefficients(0, 0), 0.9);                                          // stays in slot 1
    EXPECT_GT(no.coefficients(1, 1), 0.9);
    EXPECT_GT(no.occupations(0), 1.9);
    EXPECT_EQ(no.coefficients(0, 2), 0.0);
}

TEST(Delta, RotatedEqualToNaturalGivesOne) {
    const SymmetryGroups g{{{1, 2}}};
    const Eigen::MatrixXd no = rotation2(0.3);
    const auto r = delta_metric(no, no, g);
    ASSERT_TRUE(r.value.has_value());
    EXPECT_NEAR(*r.value, 1.0, 1e-14);
}

TEST(Delta, UnrotatedGivesZero) {
    const SymmetryGroups g{{{1, 2}}};
    const auto r = delta_metric(Eigen::MatrixXd::Identity(2, 2), rotation2(0.3), g);
    ASSERT_TRUE(r.value.has_value());
    EXPECT_NEAR(*r.value, 0.0, 1e-14);
}

TEST(Delta, HalfwayRotationIsBetweenZeroAndOne) {
    const SymmetryGroups g{{{1, 2}}};
    const auto r = delta_metric(rotation2(0.15), rotation2(0.3), g);
    ASSERT_TRUE(r.value.has_value());
    const double expected = (2 * std::cos(0.15) - 2 * std::cos(0.3)) / (2 - 2 * std::cos(0.3));
    EXPECT_NEAR(*r.value, expected, 1e-13);
}

TEST(Delta, CoincidentOrbitalsReportSentinel) {
    const SymmetryGroups g{{{1, 2}}};
    const auto r = delta_metric(rotation2(0.2), Eigen::MatrixXd::Identity(2, 2), g);
    EXPECT_TRUE(r.hf_equals_no());
    EXPECT_NEAR(r.denominator, 0.0, 1e-15);
    // A looser threshold still reports small, finite denominators as values.
    EXPECT_FALSE(delta_metric(rotation2(0.2), rotation2(0.05), g, 1e-6).hf_equals_no());
}

TEST(Delta, InvariantUnderColumnSignsAndGroupPermutation) {
    const SymmetryGroups g{{{1, 2}}};
    Eigen::MatrixXd w = rotation2(0.25);
    const Eigen::MatrixXd no = rotation2(0.3);
    const double base = *delta_metric(w, no, g).value;
    w.col(0) *= -1.0;
    EXPECT_NEAR(*delta_metric(w, no, g).value, base, 1e-14);
    w.col(0).swap(w.col(1));
    EXPECT_NEAR(*delta_metric(w, no, g).value, base, 1e-14);
}

TEST(Delta, MismatchedSizesAreDimensionErrors) {
    EXPECT_THROW(delta_metric(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3), SymmetryGroups{}),
                 DimensionError);
}

TEST(MatchOrbitals, UndoesPermutationAndSignWithinGroups) {
    Eigen::MatrixXd ref = Eigen::MatrixXd::Identity(4, 4);
    ref.block(0, 0, 2, 2) = rotation2(0.2);
    Eigen::MatrixXd w = ref;
    w.col(0).swap(w.col(1));
    w.col(0) *= -1.0;
    const auto matched = match_orbitals(w, ref, SymmetryGroups{{{1, 2}}});
    EXPECT_LT((matched - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MatchOrbitals, LeavesUngroupedOrbitalsAlone) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(3, 3);
    w.col(1).swap(w.col(2));
    EXPECT_EQ(match_orbitals(w, Eigen::MatrixXd::Identity(3, 3), SymmetryGroups{}), w);
    EXPECT_THROW(match_orbitals(w, Eigen::MatrixXd::Identity(2, 2), SymmetryGroups{}), DimensionError);
}

TEST(MatchOrbitals, PreservesDelta) {
    const SymmetryGroups g{{{1, 2}}};
    Eigen::MatrixXd w = rotation2(0.1);
    w.col(0).swap(w.col(1));
    const Eigen::MatrixXd no = rotation2(0.3);
    EXPECT_NEAR(*delta_metric(match_orbitals(w, no, g), no, g).value, *delta_metric(w, no, g).value, 1e-14);
}

TEST(CorrelationFraction, EndpointsAndShiftInvariance) {
    EXPECT_DOUBLE_EQ(correlation_fraction(-1.0, -1.0, -2.0), 0.0);
    EXPECT_DOUBLE_EQ(correlation_fraction(-2.0, -1.0, -2.0), 1.0);
    EXPECT_NEAR(correlation_fraction(-1.5, -1.0, -2.0), correlation_fraction(-101.5, -101.0, -102.0), 1e-12);
    EXPECT_THROW(correlation_fraction(-1.0, -1.0, -1.0), DegenerateError);
}

TEST(MutualInformation, ProductStateIsZero) {
    const auto mi = mutual_information(hf_reference(6, 2));
    EXPECT_LT(mi.values.cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_EQ(mi.count_above(1e-6), 0);
}

TEST(MutualInformation, BellPairIsTwoLnTwo) {
    Statevector psi(3);
    psi[0b000] = psi[0b101] = 1.0 / std::sqrt(2.0);
    const auto mi = mutual_information(psi);
    EXPECT_NEAR(mi.values(0, 2), 2.0 * std::numbers::ln2, 1e-12);
    EXPECT_NEAR(mi.values(0, 1), 0.0, 1e-13);
    EXPECT_EQ(mi.count_above(1e-6), 1);
}

TEST(MutualInformation, BoundedAndSymmetricForRandomStates) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto mi = mutual_information(random_state(5, seed));
        EXPECT_EQ((mi.values - mi.values.transpose()).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(mi.values.diagonal().cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GE(mi.values.minCoeff(), -1e-12);
        EXPECT_LE(mi.values.maxCoeff(), 2.0 * std::numbers::ln2 + 1e-12);
    }
}

TEST(Entropy, PureAndMaximallyMixed) {
    Eigen::MatrixXcd pure = Eigen::MatrixXcd::Zero(2, 2);
    pure(0, 0) = 1.0;
    EXPECT_EQ(von_neumann_entropy(pure), 0.0);
    EXPECT_NEAR(von_neumann_entropy(0.25 * Eigen::MatrixXcd::Identity(4, 4)), 2.0 * std::numbers::ln2, 1e-14);
}

TEST(BasisChange, IdentityReproducesTheGroundState) {
    const auto ints = load_fcidump(oracle::fixture("h2", "fcidump"));
    const auto a = fci_solve(ints);
    const auto b = basis_change_state(ints, Eigen::MatrixXd::Identity(ints.n_orbitals, ints.n_orbitals));
    EXPECT_NEAR(a.energy, b.energy, 1e-12);
    EXPECT_NEAR(std::abs(inner_product(a.ground_vector, b.ground_vector)), 1.0, 1e-10);
}

TEST(BasisChange, NaturalOrbitalBasisDiagonalizesTheDensity) {
    const auto ints = load_fcidump(oracle::fixture("lih", "fcidump"));
    const auto sol = fci_solve(ints);
    const auto no = natural_orbitals(sol, ints.n_orbitals);
    const auto in_no = basis_change_state(ints, no.coefficients);
    EXPECT_NEAR(in_no.energy, sol.energy, 1e-9);
    const auto d = spatial_one_rdm(in_no.ground_vector);
    EXPECT_LT((d - Eigen::MatrixXd(no.occupations.asDiagonal())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Csv, FullPrecisionRows) {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 0.1, -2.5, 1e-20;
    std::ostringstream out;
    write_csv(out, m);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "1,0.10000000000000001");
    std::getline(in, line);
    EXPECT_EQ(line, "-2.5,9.9999999999999995e-21");
}
