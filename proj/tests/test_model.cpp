#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dicke/model.hpp"
#include "oracles.hpp"

using namespace dicke;

TEST_CASE("parameter validation rejects unphysical inputs") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    p.j = 2.5;  // half-integer spins are allowed
    CHECK_NOTHROW(p.validate());
    p.j = 1.3;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.omega = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams{};
    p.gamma = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("critical coupling at resonance is exactly one half") {
    ModelParams p{1.0, 1.0, 1.0, 10.0};
    CHECK(p.critical_coupling() == 0.5);
    CHECK(p.superradiant());
    p.gamma = 0.49;
    CHECK_FALSE(p.superradiant());
    // general scaling sqrt(omega omega0) / 2
    ModelParams q{2.0, 8.0, 0.0, 3.0};
    CHECK(q.critical_coupling() == 2.0);
}

TEST_CASE("basis respects the parity constraint and layer layout") {
    ModelParams p{1.0, 1.0, 1.0, 2.5};
    for (int parity : {+1, -1}) {
        const BasisSpec b = build_basis(p, 7, parity);
        CHECK(b.two_j == 5);
        // every retained state has (-1)^(n + k) equal to the sector parity
        for (const BasisState& s : b.states) {
            const int k = (s.two_m + b.two_j) / 2;
            CHECK(((s.n + k) % 2 == 0 ? +1 : -1) == parity);
        }
        // index_of inverts the layout
        for (int i = 0; i < b.dim(); ++i) {
            const int k = (b.states[i].two_m + b.two_j) / 2;
            CHECK(b.index_of(b.states[i].n, k) == i);
            CHECK(b.retained(b.states[i].n, k));
        }
        // block offsets partition the state list
        int total = 0;
        for (int n = 0; n <= b.n_max; ++n) total += b.block_size(n);
        CHECK(total == b.dim());
    }
    // the two sectors split the product space without overlap
    const BasisSpec plus = build_basis(p, 7, +1);
    const BasisSpec minus = build_basis(p, 7, -1);
    CHECK(plus.dim() + minus.dim() == 8 * 6);
}

TEST_CASE("hamiltonian agrees with an independent full-basis construction") {
    ModelParams p{1.1, 0.9, 0.65, 1.5};
    const int n_max = 6;
    const Eigen::MatrixXd full = oracle::full_hamiltonian(p, n_max);
    CHECK((full - full.transpose()).cwiseAbs().maxCoeff() < 1e-14);

    for (int parity : {+1, -1}) {
        const BasisSpec b = build_basis(p, n_max, parity);
        const HamiltonianMatrix h = build_hamiltonian(p, b);
        CHECK((h.entries - h.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const int n_spin = b.two_j + 1;
        for (int i = 0; i < b.dim(); ++i)
            for (int k = 0; k < b.dim(); ++k) {
                const int ki = (b.states[i].two_m + b.two_j) / 2;
                const int kk = (b.states[k].two_m + b.two_j) / 2;
                const double ref =
                    full(b.states[i].n * n_spin + ki, b.states[k].n * n_spin + kk);
                CHECK(std::abs(h.entries(i, k) - ref) < 1e-13);
            }
    }
}

TEST_CASE("parity sectors do not couple through the interaction") {
    ModelParams p{1.0, 1.0, 0.8, 2.0};
    const int n_max = 5;
    const Eigen::MatrixXd full = oracle::full_hamiltonian(p, n_max);
    const int n_spin = p.two_j() + 1;
    for (int n1 = 0; n1 <= n_max; ++n1)
        for (int k1 = 0; k1 < n_spin; ++k1)
            for (int n2 = 0; n2 <= n_max; ++n2)
                for (int k2 = 0; k2 < n_spin; ++k2)
                    if ((n1 + k1) % 2 != (n2 + k2) % 2)
                        CHECK(full(n1 * n_spin + k1, n2 * n_spin + k2) == 0.0);
}

TEST_CASE("uncoupled hamiltonian is diagonal with harmonic entries") {
    ModelParams p{1.0, 1.0, 0.0, 5.0};
    const BasisSpec b = build_basis(p, 20);
    const HamiltonianMatrix h = build_hamiltonian(p, b);
    for (int i = 0; i < b.dim(); ++i) {
        for (int k = 0; k < b.dim(); ++k)
            if (i != k) CHECK(h.entries(i, k) == 0.0);
        const double expected = p.omega * b.states[i].n + p.omega0 * 0.5 * b.states[i].two_m;
        CHECK(std::abs(h.entries(i, i) - expected) <= 1e-12 * std::abs(expected));
    }
}

TEST_CASE("dimension guard refuses oversized sectors") {
    ModelParams p{1.0, 1.0, 1.0, 50.0};
    const BasisSpec b = build_basis(p, 500);
    CHECK_THROWS_AS(build_hamiltonian(p, b, 10000), std::length_error);
}

TEST_CASE("classical ground energy at resonance and unit coupling") {
    ModelParams p{1.0, 1.0, 1.0, 12.0};
    CHECK(std::abs(ground_state_energy_per_j(p) - (-2.125)) < 1e-6);
    CHECK(std::abs(ground_state_energy(p) - (-2.125 * 12.0)) < 1e-5);
}

TEST_CASE("ground energy minimization matches a dense grid search") {
    ModelParams p{1.3, 0.7, 0.9, 4.0};
    const auto e = [&](double u) {
        return p.omega0 * u - 2.0 * p.gamma * p.gamma / p.omega * (1.0 - u * u);
    };
    double best = 2.0;
    for (double u = -1.0; u <= 1.0; u += 1e-6) best = std::min(best, e(u));
    CHECK(std::abs(ground_state_energy_per_j(p) - best) < 1e-9);
}

TEST_CASE("normal phase pins the ground state to the spin pole") {
    ModelParams p{1.0, 1.0, 0.3, 6.0};  // below the critical coupling
    CHECK(std::abs(ground_state_energy_per_j(p) - (-p.omega0)) < 1e-12);
}

TEST_CASE("excited-state critical energy exists only above the transition") {
    ModelParams p{1.0, 1.0, 1.0, 8.0};
    CHECK(esqpt_energy(p) == -8.0);
    p.gamma = 0.4;
    CHECK_THROWS_AS(esqpt_energy(p), std::domain_error);
}
