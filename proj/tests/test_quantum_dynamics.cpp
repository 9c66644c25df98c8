#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "dicke/coherent.hpp"
#include "dicke/model.hpp"
#include "dicke/quantum_dynamics.hpp"
#include "dicke/spectrum.hpp"
#include "oracles.hpp"

using namespace dicke;

namespace {

// small but non-trivial sector with a fully captured coherent state
struct Fixture {
    ModelParams p{1.0, 1.0, 0.62, 2.5};
    BasisSpec basis;
    Eigen::MatrixXd h_copy;
    EigenSystem es;
    CoherentVector cv;

    Fixture() {
        basis = build_basis(p, 12);
        HamiltonianMatrix h = build_hamiltonian(p, basis);
        h_copy = h.entries;
        es = diagonalize(std::move(h));
        cv = coherent_vector(phase_to_labels(PhasePoint{0.8, -0.5, 0.2 * p.j, 1.3}, p), p, basis);
    }
};

Decomposition uniform_pair(double e1, double e2) {
    Decomposition d;
    d.energies.resize(2);
    d.energies << e1, e2;
    d.weights.resize(2);
    d.weights << 0.5, 0.5;
    d.participation_ratio = 2.0;
    d.energy_spread = 0.5 * std::abs(e2 - e1);
    return d;
}

Decomposition random_decomposition(int n, std::uint64_t seed, double e_span = 5.0) {
    Decomposition d;
    d.energies.resize(n);
    d.weights.resize(n);
    std::uint64_t state = seed;
    for (int k = 0; k < n; ++k) {
        d.energies[k] = e_span * oracle::uniform(state);
        d.weights[k] = 0.05 + oracle::uniform(state);
    }
    std::sort(d.energies.data(), d.energies.data() + n);
    d.weights /= d.weights.sum();
    d.mean_energy = d.weights.dot(d.energies);
    d.energy_spread = std::sqrt(
        (d.energies.array() - d.mean_energy).square().matrix().dot(d.weights));
    d.participation_ratio = 1.0 / d.weights.squaredNorm();
    return d;
}

}  // namespace

TEST_CASE("eigenbasis decomposition matches a direct reference") {
    Fixture f;
    const Decomposition d = decompose(f.cv, f.es);

    Eigen::VectorXd ref_vals;
    Eigen::MatrixXd ref_vecs;
    oracle::jacobi_eigen(f.h_copy, ref_vals, ref_vecs);
    Eigen::VectorXd ref_w(f.basis.dim());
    for (int k = 0; k < f.basis.dim(); ++k) {
        const std::complex<double> amp =
            (ref_vecs.col(k).cast<std::complex<double>>().conjugate().array() *
             f.cv.coefficients.array())
                .sum();
        ref_w[k] = std::norm(amp);
    }
    ref_w /= ref_w.sum();

    REQUIRE(d.weights.size() == ref_w.size());
    for (Eigen::Index k = 0; k < ref_w.size(); ++k) {
        CHECK(std::abs(d.weights[k] - ref_w[k]) < 1e-11);
        CHECK(d.energies[k] == f.es.energies[k]);
    }
    CHECK(std::abs(d.weights.sum() - 1.0) < 1e-13);
    CHECK(d.participation_ratio >= 1.0);
    CHECK(d.participation_ratio <= f.basis.dim());
}

TEST_CASE("decomposition moments equal the sector quadratic forms") {
    Fixture f;
    const Decomposition d = decompose(f.cv, f.es);
    const Eigen::VectorXcd hc = f.h_copy * f.cv.coefficients;
    const double norm = f.cv.coefficients.squaredNorm();
    const double mean = f.cv.coefficients.dot(hc).real() / norm;
    const double e2 = hc.squaredNorm() / norm;
    CHECK(std::abs(d.mean_energy - mean) < 1e-10 * (1.0 + std::abs(mean)));
    CHECK(std::abs(d.energy_spread - std::sqrt(e2 - mean * mean)) < 1e-9);
}

TEST_CASE("decomposition rejects mismatched input") {
    Fixture f;
    const BasisSpec other = build_basis(f.p, 10);
    const EigenSystem es_other = diagonalize(build_hamiltonian(f.p, other));
    CHECK_THROWS_AS(decompose(f.cv, es_other), std::invalid_argument);

    // a basis far too small for the state fails the capture gate
    const BasisSpec tiny = build_basis(f.p, 1);
    const EigenSystem es_tiny = diagonalize(build_hamiltonian(f.p, tiny));
    const CoherentVector cv_tiny = coherent_vector(
        phase_to_labels(PhasePoint{3.0, 1.0, 0.2 * f.p.j, 1.3}, f.p), f.p, tiny);
    CHECK_THROWS_AS(decompose(cv_tiny, es_tiny), convergence_error);
}

TEST_CASE("survival probability starts at one") {
    Fixture f;
    const Decomposition d = decompose(f.cv, f.es);
    const SPSeries s = survival_probability(d, log_linear_times(200.0, 400));
    CHECK(s.times[0] == 0.0);
    CHECK(std::abs(s.sp[0] - 1.0) < 1e-12);
    CHECK(std::abs(s.plateau * d.participation_ratio - 1.0) < 1e-12);
}

TEST_CASE("two-level survival is an exact cosine") {
    const Decomposition d = uniform_pair(-1.3, 0.9);
    Eigen::VectorXd times(40);
    for (int i = 0; i < 40; ++i) times[i] = 0.3 * i;
    const SPSeries s = survival_probability(d, times);
    for (int i = 0; i < 40; ++i) {
        const double c = std::cos(0.5 * (0.9 + 1.3) * times[i]);
        CHECK(std::abs(s.sp[i] - c * c) < 1e-15);
    }
}

TEST_CASE("survival series matches the direct phase sum") {
    const Decomposition d = random_decomposition(30, 2024);
    Eigen::VectorXd times(60);
    for (int i = 0; i < 60; ++i) times[i] = 0.5 * i;
    const SPSeries s = survival_probability(d, times);
    for (int i = 0; i < 60; ++i)
        CHECK(std::abs(s.sp[i] - oracle::sp_direct(d.energies, d.weights, times[i])) < 1e-12);
}

TEST_CASE("the long-time average settles on the inverse participation ratio") {
    const Decomposition d = random_decomposition(40, 77);
    CHECK(std::abs(sp_infinite_time_average(d) * d.participation_ratio - 1.0) < 1e-12);

    Eigen::VectorXd times(8001);
    for (int i = 0; i <= 8000; ++i) times[i] = 0.5 * i;
    const SPSeries s = survival_probability(d, times);
    const EquilibrationStats eq = equilibration_stats(s, d);
    CHECK(eq.t_start == 10.0 / d.energy_spread);
    CHECK(eq.n_points > 7000);
    CHECK(std::abs(eq.ratio_to_plateau - 1.0) < 0.1);
    CHECK(eq.rms_fluctuation > 0.0);
}

TEST_CASE("equilibration needs enough samples past the decay time") {
    const Decomposition d = random_decomposition(20, 5);
    Eigen::VectorXd times(30);
    for (int i = 0; i < 30; ++i) times[i] = 0.1 * i;
    const SPSeries s = survival_probability(d, times);
    CHECK_THROWS_AS(equilibration_stats(s, d), std::runtime_error);
}

TEST_CASE("degenerate spectra are refused unless explicitly allowed") {
    Decomposition d = uniform_pair(0.0, 1.0);
    d.degenerate_flagged = true;
    Eigen::VectorXd times(12);
    for (int i = 0; i < 12; ++i) times[i] = i;
    CHECK_THROWS_AS(survival_probability(d, times), std::runtime_error);
    SPOptions opts;
    opts.allow_degenerate = true;
    CHECK(survival_probability(d, times, opts).sp[0] == 1.0);
}

TEST_CASE("phase accuracy budget bounds the requested horizon") {
    const Decomposition d = uniform_pair(-10.0, 10.0);
    Eigen::VectorXd times(2);
    times << 0.0, 1.0e15;
    CHECK_THROWS_AS(survival_probability(d, times), std::invalid_argument);
}

TEST_CASE("negligible components are dropped and accounted for") {
    Decomposition d;
    d.energies.resize(3);
    d.energies << 0.0, 1.0, 2.0;
    d.weights.resize(3);
    d.weights << 0.6, 0.4 - 1e-20, 1e-20;
    d.participation_ratio = 1.0 / d.weights.squaredNorm();
    Eigen::VectorXd times(5);
    for (int i = 0; i < 5; ++i) times[i] = i;
    const SPSeries s = survival_probability(d, times);
    CHECK(s.discarded_weight > 0.0);
    CHECK(s.discarded_weight < 1e-15);
    CHECK(std::abs(s.sp[0] - 1.0) < 1e-14);
}

TEST_CASE("time grid validation and shape") {
    const Eigen::VectorXd ts = log_linear_times(100.0, 200);
    CHECK(ts[0] == 0.0);
    for (Eigen::Index i = 0; i + 1 < ts.size(); ++i) CHECK(ts[i] < ts[i + 1]);
    CHECK(ts[ts.size() - 1] == 100.0);
    CHECK(ts.size() <= 201);
    CHECK_THROWS_AS(log_linear_times(-1.0, 200), std::invalid_argument);
    CHECK_THROWS_AS(log_linear_times(10.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(log_linear_times(10.0, 100, 20.0), std::invalid_argument);

    const Decomposition d = uniform_pair(0.0, 1.0);
    Eigen::VectorXd bad(2);
    bad << 1.0, 1.0;
    CHECK_THROWS_AS(survival_probability(d, bad), std::invalid_argument);
    Eigen::VectorXd neg(2);
    neg << -1.0, 1.0;
    CHECK_THROWS_AS(survival_probability(d, neg), std::invalid_argument);
}
