#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dicke/numerics.hpp"

// Dicke model: a single bosonic mode coupled to a collective spin j,
//
//   H = omega a^dag a + omega0 Jz + (gamma / sqrt(2j)) (J+ + J-)(a + a^dag)
//
// with hbar = 1. The Hilbert space used here is the positive-parity sector
// of the truncated product basis |n> (x) |j, m>, n <= n_max, where the
// conserved parity of a basis state is (-1)^(n + m + j).

namespace dicke {

// ------------------------------------------------------------- params ----

struct ModelParams {
    double omega = 1.0;    // field frequency
    double omega0 = 1.0;   // atomic level splitting
    double gamma = 1.0;    // atom-field coupling
    double j = 1.0;        // collective spin length (2j must be integral)

    int two_j() const { return static_cast<int>(std::lround(2.0 * j)); }
    double n_atoms() const { return 2.0 * j; }

    // Coupling at the superradiant transition.
    double critical_coupling() const { return 0.5 * std::sqrt(omega * omega0); }
    bool superradiant() const { return gamma > critical_coupling(); }

    // Effective Planck constant of the semiclassical limit.
    double hbar_eff() const { return 1.0 / j; }

    void validate() const {
        if (!(omega > 0.0)) throw std::invalid_argument("ModelParams: omega must be positive");
        if (!(omega0 > 0.0)) throw std::invalid_argument("ModelParams: omega0 must be positive");
        if (!(gamma >= 0.0)) throw std::invalid_argument("ModelParams: gamma must be non-negative");
        if (!(j > 0.0)) throw std::invalid_argument("ModelParams: j must be positive");
        if (std::abs(2.0 * j - static_cast<double>(two_j())) > 1e-9)
            throw std::invalid_argument("ModelParams: 2j must be an integer");
    }

    bool operator==(const ModelParams&) const = default;
};

// -------------------------------------------------------------- basis ----

// One product state |n> (x) |j, m>. m is stored doubled so half-integer
// spins stay exact; k = (two_m + two_j) / 2 in [0, 2j] is the ladder index.
struct BasisState {
    int n = 0;
    int two_m = 0;
};

struct BasisSpec {
    int n_max = 0;
    int two_j = 0;
    int parity = +1;  // sector label: basis-state parity is (-1)^(n + k)
    std::vector<BasisState> states;   // ordered by (n, m)
    std::vector<int> block_offset;    // first index of each Fock layer, size n_max + 2

    int dim() const { return static_cast<int>(states.size()); }
    int block_size(int n) const { return block_offset[n + 1] - block_offset[n]; }

    // A layer-n state with ladder index k is retained iff (-1)^(n+k) = parity.
    int layer_start_k(int n) const { return parity == +1 ? (n & 1) : ((n & 1) ^ 1); }
    bool retained(int n, int k) const { return ((n ^ k) & 1) == (parity == +1 ? 0 : 1); }
    int index_of(int n, int k) const { return block_offset[n] + ((k - layer_start_k(n)) >> 1); }

    bool compatible(const BasisSpec& other) const {
        return n_max == other.n_max && two_j == other.two_j && parity == other.parity;
    }
};

inline BasisSpec build_basis(const ModelParams& params, int n_max, int parity = +1) {
    params.validate();
    if (n_max < 0) throw std::invalid_argument("build_basis: n_max must be non-negative");
    if (parity != +1 && parity != -1)
        throw std::invalid_argument("build_basis: parity must be +1 or -1");
    BasisSpec basis;
    basis.n_max = n_max;
    basis.two_j = params.two_j();
    basis.parity = parity;
    basis.block_offset.assign(n_max + 2, 0);
    const std::size_t bound =
        static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(basis.two_j + 1);
    basis.states.reserve(bound / 2 + n_max + 2);
    for (int n = 0; n <= n_max; ++n) {
        basis.block_offset[n] = basis.dim();
        for (int k = basis.layer_start_k(n); k <= basis.two_j; k += 2)
            basis.states.push_back({n, 2 * k - basis.two_j});
    }
    basis.block_offset[n_max + 1] = basis.dim();
    return basis;
}

// -------------------------------------------------------- hamiltonian ----

struct HamiltonianMatrix {
    ModelParams params;
    BasisSpec basis;
    Eigen::MatrixXd entries;  // dense symmetric, basis ordering of BasisSpec
};

// Dense H in the positive-parity sector. The guard keeps an accidental
// huge (n_max, j) combination from silently eating all memory.
inline HamiltonianMatrix build_hamiltonian(const ModelParams& params, const BasisSpec& basis,
                                           int max_dim = 20000) {
    params.validate();
    if (basis.two_j != params.two_j())
        throw std::invalid_argument("build_hamiltonian: basis was built for a different j");
    if (basis.dim() > max_dim)
        throw std::length_error("build_hamiltonian: sector dimension " + std::to_string(basis.dim()) +
                                " exceeds limit " + std::to_string(max_dim));

    const int d = basis.dim();
    const int two_j = basis.two_j;
    const double coupling = params.gamma / std::sqrt(params.n_atoms());
    // j(j+1) = two_j (two_j + 2) / 4
    const double j_sq = 0.25 * static_cast<double>(two_j) * static_cast<double>(two_j + 2);

    HamiltonianMatrix h{params, basis, Eigen::MatrixXd::Zero(d, d)};
    for (int i = 0; i < d; ++i) {
        const BasisState& s = basis.states[i];
        const double m = 0.5 * s.two_m;
        const int k = (s.two_m + two_j) / 2;
        h.entries(i, i) = params.omega * s.n + params.omega0 * m;
        // (J+ + J-)(a + a^dag) couples (n, m) to (n +- 1, m +- 1); filling
        // only the n+1 side keeps every pair visited exactly once.
        const int n2 = s.n + 1;
        if (n2 > basis.n_max) continue;
        for (int dk : {-1, +1}) {
            const int k2 = k + dk;
            if (k2 < 0 || k2 > two_j) continue;
            const double m2 = m + dk;
            const double ladder = std::sqrt(j_sq - m * m2);
            const double value = coupling * std::sqrt(static_cast<double>(n2)) * ladder;
            const int i2 = basis.index_of(n2, k2);
            h.entries(i, i2) = value;
            h.entries(i2, i) = value;
        }
    }
    return h;
}

// --------------------------------------------------- classical limits ----

// Ground-state energy of the classical (j -> inf) limit, per unit j.
// On the p = 0, phi = pi branch the field minimization is exact and leaves
// a one-dimensional problem in u = jz / j:
//
//   e(u) = omega0 u - (2 gamma^2 / omega) (1 - u^2),  u in [-1, 1]
//
// which is refined numerically after the closed-form reduction.
inline double ground_state_energy_per_j(const ModelParams& params) {
    params.validate();
    const auto e = [&](double u) {
        return params.omega0 * u - 2.0 * params.gamma * params.gamma / params.omega * (1.0 - u * u);
    };
    if (!params.superradiant()) return e(-1.0);  // normal phase: spin fully down
    const double u_star = golden_section_min(e, -1.0, 1.0, 1e-15);
    return std::min(e(u_star), e(-1.0));
}

inline double ground_state_energy(const ModelParams& params) {
    return params.j * ground_state_energy_per_j(params);
}

// Energy of the excited-state critical point, which exists only above the
// superradiant transition (the u = +-? saddle at the fully-down spin pole).
inline double esqpt_energy(const ModelParams& params) {
    params.validate();
    if (!params.superradiant())
        throw std::domain_error("esqpt_energy: no excited-state critical point below the critical coupling");
    return -params.omega0 * params.j;
}

}  // namespace dicke
