#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dicke/coherent.hpp"
#include "dicke/errors.hpp"
#include "dicke/spectrum.hpp"

// Dynamics of an initial coherent state expanded over the eigenbasis:
// participation ratio, survival probability SP(t) = |<psi|psi(t)>|^2 and
// its long-time equilibration statistics.

namespace dicke {

// ----------------------------------------------------- decomposition ----

struct Decomposition {
    Eigen::VectorXd energies;          // eigenenergies, ascending
    Eigen::VectorXd weights;           // |<E_k|psi>|^2, renormalized to sum 1
    double norm_captured = 0.0;        // raw in-sector capture before renormalizing
    double capture_ratio = 0.0;        // against the analytic sector weight
    double mean_energy = 0.0;
    double energy_spread = 0.0;        // sqrt(<E^2> - <E>^2); sets the decay scale
    double participation_ratio = 0.0;  // 1 / sum_k w_k^2
    bool degenerate_flagged = false;
};

inline Decomposition decompose(const CoherentVector& cv, const EigenSystem& es,
                               double min_capture = 0.99) {
    if (!cv.basis.compatible(es.basis))
        throw std::invalid_argument("decompose: coherent vector and eigensystem use different bases");
    if (cv.capture_ratio < min_capture)
        throw convergence_error("decompose: the basis captures only " +
                                std::to_string(cv.capture_ratio) +
                                " of the sector weight; increase n_max");

    // |c_k|^2 via two real back-transformations (the eigenbasis is real)
    const Eigen::VectorXd wr = es.vectors.transpose() * cv.coefficients.real().matrix();
    const Eigen::VectorXd wi = es.vectors.transpose() * cv.coefficients.imag().matrix();

    Decomposition d;
    d.energies = es.energies;
    d.weights = wr.array().square() + wi.array().square();
    const double total = d.weights.sum();
    if (!(total > 0.0)) throw std::invalid_argument("decompose: zero state");
    d.weights /= total;
    d.norm_captured = cv.norm_captured;
    d.capture_ratio = cv.capture_ratio;
    d.mean_energy = d.weights.dot(d.energies);
    const double e2 = d.weights.dot(d.energies.cwiseProduct(d.energies).eval());
    d.energy_spread = std::sqrt(std::max(0.0, e2 - d.mean_energy * d.mean_energy));
    d.participation_ratio = 1.0 / d.weights.squaredNorm();
    d.degenerate_flagged = es.has_degeneracies();
    return d;
}

// ----------------------------------------------- survival probability ----

struct SPOptions {
    double weight_cutoff = 1e-14;  // drop components below cutoff * max weight
    bool allow_degenerate = false;
    double phase_budget = 9.0e15;  // refuse |E|_max * t_max beyond double phase accuracy
};

struct SPSeries {
    Eigen::VectorXd times;
    Eigen::VectorXd sp;
    double plateau = 0.0;           // 1 / participation ratio of the input state
    double discarded_weight = 0.0;  // total weight removed by the cutoff
};

// Infinite-time average of SP(t) without quadrature; for a non-degenerate
// spectrum the cross terms average out exactly.
inline double sp_infinite_time_average(const Decomposition& d) {
    return d.weights.squaredNorm();
}

inline SPSeries survival_probability(const Decomposition& d, const Eigen::VectorXd& times,
                                     const SPOptions& opts = {}) {
    if (times.size() == 0) throw std::invalid_argument("survival_probability: empty time grid");
    for (Eigen::Index i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw std::invalid_argument("survival_probability: times must be strictly increasing");
    if (times[0] < 0.0) throw std::invalid_argument("survival_probability: negative time");
    if (d.degenerate_flagged && !opts.allow_degenerate)
        throw std::runtime_error("survival_probability: spectrum has flagged degeneracies; "
                                 "phase evolution would silently merge them");
    const double e_max = std::max(std::abs(d.energies[0]),
                                  std::abs(d.energies[d.energies.size() - 1]));
    if (e_max * times[times.size() - 1] > opts.phase_budget)
        throw std::invalid_argument("survival_probability: |E| t exceeds the double-precision "
                                    "phase budget");

    const double w_max = d.weights.maxCoeff();
    const double cutoff = opts.weight_cutoff * w_max;
    std::vector<int> kept;
    kept.reserve(d.weights.size());
    double kept_sum = 0.0, dropped_sum = 0.0;
    for (Eigen::Index k = 0; k < d.weights.size(); ++k)
        if (d.weights[k] >= cutoff) {
            kept.push_back(static_cast<int>(k));
            kept_sum += d.weights[k];
        } else {
            dropped_sum += d.weights[k];
        }

    SPSeries s;
    s.times = times;
    s.sp.resize(times.size());
    s.plateau = 1.0 / d.participation_ratio;
    s.discarded_weight = dropped_sum;

    // renormalize the kept set so SP(0) = 1 holds identically
    Eigen::VectorXd w(kept.size()), e(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        w[i] = d.weights[kept[i]] / kept_sum;
        e[i] = d.energies[kept[i]];
    }
    // SP is invariant under a global energy shift; centring the spectrum
    // halves the phase arguments and with them the rounding error
    e.array() -= 0.5 * (e.minCoeff() + e.maxCoeff());
    for (Eigen::Index it = 0; it < times.size(); ++it) {
        const double t = times[it];
        double re = 0.0, im = 0.0;
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            re += w[k] * std::cos(e[k] * t);
            im += w[k] * std::sin(e[k] * t);
        }
        s.sp[it] = re * re + im * im;
    }
    return s;
}

// ------------------------------------------------------ equilibration ----

struct EquilibrationOptions {
    double start_multiple = 10.0;  // window starts this many decay times in
    int min_points = 100;
};

struct EquilibrationStats {
    double t_start = 0.0;
    int n_points = 0;
    double time_average = 0.0;
    double rms_fluctuation = 0.0;
    double plateau = 0.0;
    double ratio_to_plateau = 0.0;
};

// Trapezoid time average and fluctuation of SP over [t_start, t_end], with
// t_start a multiple of the Gaussian decay time 1/energy_spread.
inline EquilibrationStats equilibration_stats(const SPSeries& s, const Decomposition& d,
                                              const EquilibrationOptions& opts = {}) {
    EquilibrationStats out;
    out.plateau = 1.0 / d.participation_ratio;
    out.t_start = d.energy_spread > 0.0 ? opts.start_multiple / d.energy_spread : s.times[0];

    Eigen::Index i0 = 0;
    while (i0 < s.times.size() && s.times[i0] < out.t_start) ++i0;
    const Eigen::Index n = s.times.size() - i0;
    if (n < opts.min_points)
        throw std::runtime_error("equilibration_stats: only " + std::to_string(n) +
                                 " samples after t_start; extend the time grid");
    out.n_points = static_cast<int>(n);

    double span = 0.0, acc = 0.0;
    for (Eigen::Index i = i0; i + 1 < s.times.size(); ++i) {
        const double dt = s.times[i + 1] - s.times[i];
        acc += 0.5 * (s.sp[i] + s.sp[i + 1]) * dt;
        span += dt;
    }
    out.time_average = acc / span;
    double fluct = 0.0;
    for (Eigen::Index i = i0; i + 1 < s.times.size(); ++i) {
        const double dt = s.times[i + 1] - s.times[i];
        const double da = s.sp[i] - out.time_average;
        const double db = s.sp[i + 1] - out.time_average;
        fluct += 0.5 * (da * da + db * db) * dt;
    }
    out.rms_fluctuation = std::sqrt(fluct / span);
    out.ratio_to_plateau = out.time_average / out.plateau;
    return out;
}

// --------------------------------------------------------- time grids ----

// Logarithmic head + linear tail, deduplicated; useful for SP plots that
// must resolve both the early decay and the late plateau.
inline Eigen::VectorXd log_linear_times(double t_max, int n_points, double t_min = 1e-2) {
    if (!(t_max > 0.0) || n_points < 10)
        throw std::invalid_argument("log_linear_times: bad grid request");
    if (!(t_min > 0.0) || !(t_min < t_max))
        throw std::invalid_argument("log_linear_times: t_min must lie in (0, t_max)");
    const int n_log = n_points / 4;
    const int n_lin = n_points - n_log;
    std::vector<double> ts;
    ts.reserve(n_points + 1);
    ts.push_back(0.0);
    for (int i = 0; i < n_log; ++i)
        ts.push_back(t_min * std::pow(t_max / t_min, static_cast<double>(i) / n_log));
    const double t_lin0 = ts.back();
    for (int i = 1; i <= n_lin; ++i)
        ts.push_back(t_lin0 + (t_max - t_lin0) * static_cast<double>(i) / n_lin);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(),
                         [](double a, double b) { return b - a < 1e-12 * (1.0 + b); }),
             ts.end());
    return Eigen::Map<Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
}

}  // namespace dicke
