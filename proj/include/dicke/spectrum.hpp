#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "dicke/model.hpp"
#include "dicke/numerics.hpp"

// Dense symmetric diagonalization and spectral statistics. LAPACK dsyevr is
// used directly: at sector dimensions above 10^4 it is far faster than
// Eigen's own solver on one core and needs only the input matrix plus a
// separate eigenvector block, which keeps peak memory within bounds.

namespace dicke {

// ------------------------------------------------------ eigensystem ----

struct EigenSystem {
    ModelParams params;
    BasisSpec basis;
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd vectors;   // column k belongs to energies[k]
    double degeneracy_tol = 1e-12;
    std::vector<int> degenerate_pairs;  // k with E_{k+1} - E_k below tol * scale

    int dim() const { return static_cast<int>(energies.size()); }
    bool has_degeneracies() const { return !degenerate_pairs.empty(); }
    double spectral_scale() const {
        if (energies.size() == 0) return 1.0;
        return std::max({1.0, std::abs(energies[0]), std::abs(energies[energies.size() - 1])});
    }
};

// Takes the Hamiltonian by value: dsyevr destroys the input storage, so the
// caller's matrix is consumed rather than copied.
inline EigenSystem diagonalize(HamiltonianMatrix h, double degeneracy_tol = 1e-12) {
    const lapack_int n = h.basis.dim();
    if (n <= 0) throw std::invalid_argument("diagonalize: empty basis");
    if (h.entries.rows() != n || h.entries.cols() != n)
        throw std::invalid_argument("diagonalize: matrix/basis dimension mismatch");

    EigenSystem es;
    es.params = h.params;
    es.basis = std::move(h.basis);
    es.degeneracy_tol = degeneracy_tol;
    es.energies.resize(n);
    es.vectors.resize(n, n);

    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const double abstol = LAPACKE_dlamch('S');  // ask for maximum accuracy
    const lapack_int info = LAPACKE_dsyevr(
        LAPACK_COL_MAJOR, 'V', 'A', 'L', n, h.entries.data(), n,
        0.0, 0.0, 0, 0, abstol, &found, es.energies.data(), es.vectors.data(), n, isuppz.data());
    h.entries.resize(0, 0);
    if (info != 0)
        throw std::runtime_error("diagonalize: dsyevr failed (info = " + std::to_string(info) +
                                 ", dim = " + std::to_string(n) + ")");
    if (found != n)
        throw std::runtime_error("diagonalize: dsyevr returned " + std::to_string(found) +
                                 " of " + std::to_string(n) + " eigenpairs");

    const double scale = es.spectral_scale();
    for (lapack_int k = 0; k + 1 < n; ++k)
        if (es.energies[k + 1] - es.energies[k] < degeneracy_tol * scale)
            es.degenerate_pairs.push_back(static_cast<int>(k));
    return es;
}

// ------------------------------------------------------ convergence ----

struct ConvergenceOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    double tail_tol = 1e-6;      // max probability in the top Fock layers
    double tail_fraction = 0.1;  // how many layers count as "top"
};

struct LevelConvergence {
    int index = 0;
    double energy = 0.0;       // from the larger basis
    double shift = 0.0;        // |E_high - E_low|
    double tail_weight = 0.0;  // top-layer probability in the larger basis
    bool converged = false;
};

struct ConvergenceReport {
    std::vector<LevelConvergence> levels;
    int n_checked = 0;
    int n_converged = 0;
    double max_shift = 0.0;
    double max_tail = 0.0;
    bool all_converged = false;
};

// Compares level-by-level (index matching of the sorted spectra) between a
// smaller and a larger Fock cutoff, over an absolute energy window.
inline ConvergenceReport check_convergence(const EigenSystem& low, const EigenSystem& high,
                                           double e_lo, double e_hi,
                                           const ConvergenceOptions& opts = {}) {
    if (!(low.params == high.params))
        throw std::invalid_argument("check_convergence: model parameters differ");
    if (high.basis.n_max <= low.basis.n_max)
        throw std::invalid_argument("check_convergence: second system must have the larger n_max");
    if (!(e_lo < e_hi))
        throw std::invalid_argument("check_convergence: empty energy window");
    if (e_hi < low.energies[0] || e_lo > low.energies[low.dim() - 1])
        throw std::invalid_argument("check_convergence: window outside the computed spectrum");

    const int tail_layers =
        std::max(1, static_cast<int>(std::ceil(opts.tail_fraction * (high.basis.n_max + 1))));
    const int tail_start_layer = high.basis.n_max + 1 - tail_layers;
    const int tail_row = high.basis.block_offset[tail_start_layer];
    const int tail_len = high.dim() - tail_row;

    ConvergenceReport report;
    for (int k = 0; k < low.dim(); ++k) {
        const double e_low = low.energies[k];
        if (e_low < e_lo || e_low > e_hi) continue;
        LevelConvergence lc;
        lc.index = k;
        lc.energy = high.energies[k];
        lc.shift = std::abs(high.energies[k] - e_low);
        lc.tail_weight = high.vectors.col(k).segment(tail_row, tail_len).squaredNorm();
        lc.converged = lc.shift <= opts.abs_tol + opts.rel_tol * std::abs(lc.energy) &&
                       lc.tail_weight <= opts.tail_tol;
        report.max_shift = std::max(report.max_shift, lc.shift);
        report.max_tail = std::max(report.max_tail, lc.tail_weight);
        report.n_converged += lc.converged ? 1 : 0;
        ++report.n_checked;
        report.levels.push_back(lc);
    }
    report.all_converged = report.n_checked > 0 && report.n_converged == report.n_checked;
    return report;
}

// ------------------------------------------------ level statistics ----

struct SpacingOptions {
    int unfold_degree = 9;    // polynomial degree for the cumulative count fit
    int min_levels = 50;
    int histogram_bins = 50;
    double histogram_max = 4.0;
};

struct SpacingStats {
    int n_levels = 0;
    Eigen::VectorXd unfolded_spacings;  // mean normalized to 1
    double mean_r_ratio = 0.0;          // consecutive-gap ratio, raw energies
    Eigen::VectorXd histogram_density;  // of unfolded spacings
    Eigen::VectorXd histogram_edges;
};

// Unfolds the spectrum in [e_lo, e_hi] with a smooth polynomial fit of the
// cumulative level count, then reports nearest-neighbour statistics. The
// gap-ratio statistic needs no unfolding and is computed on raw energies.
inline SpacingStats level_spacing_stats(const EigenSystem& es, double e_lo, double e_hi,
                                        const SpacingOptions& opts = {}) {
    if (!(e_lo < e_hi)) throw std::invalid_argument("level_spacing_stats: empty energy window");
    std::vector<double> levels;
    for (int k = 0; k < es.dim(); ++k)
        if (es.energies[k] >= e_lo && es.energies[k] <= e_hi) levels.push_back(es.energies[k]);
    const int n = static_cast<int>(levels.size());
    if (n < opts.min_levels)
        throw std::runtime_error("level_spacing_stats: only " + std::to_string(n) +
                                 " levels in window, need " + std::to_string(opts.min_levels));

    Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(levels.data(), n);
    Eigen::VectorXd staircase(n);
    for (int i = 0; i < n; ++i) staircase[i] = i + 0.5;
    const PolyFit fit = poly_fit(e, staircase, opts.unfold_degree);

    SpacingStats stats;
    stats.n_levels = n;
    stats.unfolded_spacings.resize(n - 1);
    for (int i = 0; i + 1 < n; ++i) stats.unfolded_spacings[i] = fit(e[i + 1]) - fit(e[i]);
    const double mean = stats.unfolded_spacings.mean();
    if (mean > 0.0) stats.unfolded_spacings /= mean;

    // <r> with r_k = min(g_k, g_{k+1}) / max(g_k, g_{k+1})
    double r_sum = 0.0;
    int r_count = 0;
    for (int i = 0; i + 2 < n; ++i) {
        const double g0 = e[i + 1] - e[i];
        const double g1 = e[i + 2] - e[i + 1];
        const double hi = std::max(g0, g1);
        if (hi <= 0.0) continue;  // exact degeneracy, skip
        r_sum += std::min(g0, g1) / hi;
        ++r_count;
    }
    stats.mean_r_ratio = r_count > 0 ? r_sum / r_count : 0.0;

    stats.histogram_edges.resize(opts.histogram_bins + 1);
    stats.histogram_density = Eigen::VectorXd::Zero(opts.histogram_bins);
    const double width = opts.histogram_max / opts.histogram_bins;
    for (int b = 0; b <= opts.histogram_bins; ++b) stats.histogram_edges[b] = b * width;
    for (int i = 0; i + 1 < n; ++i) {
        const double s = stats.unfolded_spacings[i];
        if (s < 0.0 || s >= opts.histogram_max) continue;
        stats.histogram_density[static_cast<int>(s / width)] += 1.0;
    }
    stats.histogram_density /= std::max(1, n - 1) * width;
    return stats;
}

}  // namespace dicke
