#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dicke/model.hpp"
#include "dicke/spectrum.hpp"
#include "oracles.hpp"

using namespace dicke;

TEST_CASE("dense solver matches a Jacobi reference on a small sector") {
    ModelParams p{1.1, 0.9, 0.6, 1.5};
    const BasisSpec basis = build_basis(p, 5);
    HamiltonianMatrix h = build_hamiltonian(p, basis);
    const Eigen::MatrixXd h_copy = h.entries;

    Eigen::VectorXd ref_vals;
    Eigen::MatrixXd ref_vecs;
    oracle::jacobi_eigen(h_copy, ref_vals, ref_vecs);

    const EigenSystem es = diagonalize(std::move(h));
    REQUIRE(es.dim() == basis.dim());
    const double scale = es.spectral_scale();
    for (int k = 0; k < es.dim(); ++k)
        CHECK(std::abs(es.energies[k] - ref_vals[k]) < 1e-12 * scale);

    // orthonormal eigenvectors with small residuals
    const Eigen::MatrixXd gram = es.vectors.transpose() * es.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(es.dim(), es.dim())).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd residual =
        h_copy * es.vectors - es.vectors * es.energies.asDiagonal();
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-11 * scale);
}

TEST_CASE("the two parity sectors together reproduce the full product spectrum") {
    ModelParams p{1.0, 1.0, 0.8, 2.0};
    const int n_max = 6;
    std::vector<double> merged;
    for (int parity : {+1, -1}) {
        const EigenSystem es = diagonalize(build_hamiltonian(p, build_basis(p, n_max, parity)));
        for (int k = 0; k < es.dim(); ++k) merged.push_back(es.energies[k]);
    }
    std::sort(merged.begin(), merged.end());

    Eigen::VectorXd ref_vals;
    Eigen::MatrixXd ref_vecs;
    oracle::jacobi_eigen(oracle::full_hamiltonian(p, n_max), ref_vals, ref_vecs);
    REQUIRE(static_cast<int>(merged.size()) == ref_vals.size());
    for (Eigen::Index k = 0; k < ref_vals.size(); ++k)
        CHECK(std::abs(merged[k] - ref_vals[k]) < 1e-11);
}

TEST_CASE("exact crossings are flagged as degenerate pairs") {
    // decoupled resonant system: E = omega (n + m) is highly degenerate
    ModelParams p{1.0, 1.0, 0.0, 2.0};
    const EigenSystem es = diagonalize(build_hamiltonian(p, build_basis(p, 6)));
    CHECK(es.has_degeneracies());
    const double scale = es.spectral_scale();
    for (int k : es.degenerate_pairs) {
        REQUIRE(k + 1 < es.dim());
        CHECK(es.energies[k + 1] - es.energies[k] < es.degeneracy_tol * scale);
    }
    // a generic coupling lifts them
    ModelParams p2{1.0, 1.0, 0.37, 2.0};
    CHECK_FALSE(diagonalize(build_hamiltonian(p2, build_basis(p2, 6))).has_degeneracies());
}

TEST_CASE("convergence report separates settled levels from truncated ones") {
    ModelParams p{1.0, 1.0, 1.0, 4.0};
    const EigenSystem low = diagonalize(build_hamiltonian(p, build_basis(p, 60)));
    const EigenSystem high = diagonalize(build_hamiltonian(p, build_basis(p, 80)));

    SECTION("low-lying levels are converged") {
        const ConvergenceReport r =
            check_convergence(low, high, low.energies[0] - 1.0, low.energies[9]);
        CHECK(r.n_checked == 10);
        CHECK(r.all_converged);
        CHECK(r.max_shift < 1e-9 + 1e-9 * std::abs(low.energies[9]));
    }
    SECTION("the top of the truncated spectrum is not") {
        const ConvergenceReport r = check_convergence(
            low, high, low.energies[0] - 1.0, low.energies[low.dim() - 1] + 1.0);
        CHECK(r.n_checked == low.dim());
        CHECK_FALSE(r.all_converged);
        CHECK(r.max_shift > 1e-3);
    }
    SECTION("argument validation") {
        ModelParams other{1.0, 1.0, 0.9, 4.0};
        const EigenSystem wrong = diagonalize(build_hamiltonian(other, build_basis(other, 30)));
        CHECK_THROWS_AS(check_convergence(low, wrong, -5.0, 5.0), std::invalid_argument);
        CHECK_THROWS_AS(check_convergence(high, low, -5.0, 5.0), std::invalid_argument);
        CHECK_THROWS_AS(check_convergence(low, high, 5.0, -5.0), std::invalid_argument);
        CHECK_THROWS_AS(
            check_convergence(low, high, low.energies[low.dim() - 1] + 10.0,
                              low.energies[low.dim() - 1] + 20.0),
            std::invalid_argument);
    }
}

TEST_CASE("gap-ratio statistic recovers the uncorrelated-spectrum value") {
    EigenSystem es;
    es.energies = oracle::poisson_levels(5000, 99);
    const SpacingStats stats =
        level_spacing_stats(es, es.energies[0] - 1.0, es.energies[es.dim() - 1] + 1.0);
    CHECK(stats.n_levels == 5000);
    // <r> for independent exponential gaps is 2 ln 2 - 1 = 0.3863
    CHECK(std::abs(stats.mean_r_ratio - (2.0 * std::log(2.0) - 1.0)) < 0.02);
    CHECK(std::abs(stats.unfolded_spacings.mean() - 1.0) < 1e-12);
    // unfolded spacing density should start near exp(0) = 1
    const double width = stats.histogram_edges[1] - stats.histogram_edges[0];
    CHECK(std::abs(stats.histogram_density[0] - 1.0) < 0.2);
    const double covered = stats.histogram_density.sum() * width;
    CHECK(covered > 0.9);
    CHECK(covered <= 1.0 + 1e-12);
}

TEST_CASE("spacing statistics refuse windows with too few levels") {
    EigenSystem es;
    es.energies = oracle::poisson_levels(100, 7);
    CHECK_THROWS_AS(level_spacing_stats(es, es.energies[0], es.energies[10]),
                    std::runtime_error);
    CHECK_THROWS_AS(level_spacing_stats(es, 3.0, 3.0), std::invalid_argument);
}

TEST_CASE("diagonalize validates its input") {
    ModelParams p{1.0, 1.0, 0.5, 1.0};
    HamiltonianMatrix h = build_hamiltonian(p, build_basis(p, 3));
    h.entries.resize(2, 2);
    CHECK_THROWS_AS(diagonalize(std::move(h)), std::invalid_argument);
}
