#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dicke/errors.hpp"
#include "dicke/numerics.hpp"
#include "dicke/quantum_dynamics.hpp"

// Analytic survival probability for regular initial states. The eigenbasis
// weights of such states organize into M energy sequences with Gaussian
// envelopes
//
//   w_k^(i) ~ A_i exp[-(E_k^(i) - Ebar_i)^2 / (2 sigma_i^2)]
//
// and nearly even local spacing omega1. Each sequence contributes a Jacobi
// theta term and each pair an interference term; their sum reproduces the
// full SP through the decay regime.

namespace dicke {

// ------------------------------------------------------------ theta3 ----

// Theta_3(x, y) = 1 + 2 sum_{p>=1} y^(p^2) cos(2 p x), summed until the
// envelope y^(p^2) drops below eps.
inline double theta3(double x, double y, double eps = 1e-16) {
    if (!(y >= 0.0 && y < 1.0))
        throw std::invalid_argument("theta3: nome must satisfy 0 <= y < 1");
    if (y == 0.0) return 1.0;
    double sum = 1.0;
    double y_sq = y * y;           // y^(2p - 1) running factor
    double y_pow = y;              // y^(p^2)
    double odd = y;
    for (long p = 1; y_pow >= eps; ++p) {
        sum += 2.0 * y_pow * std::cos(2.0 * p * x);
        odd *= y_sq;               // y^(2p + 1)
        y_pow *= odd;              // y^((p+1)^2) = y^(p^2) * y^(2p+1)
        if (p > 1000000) throw std::runtime_error("theta3: series failed to converge");
    }
    return sum;
}

// --------------------------------------------------------- sequences ----

struct GaussianSequence {
    std::vector<int> members;   // indices into the decomposition, ascending energy
    Eigen::VectorXd energies;
    Eigen::VectorXd weights;
    double amplitude = 0.0;     // A
    double mean_energy = 0.0;   // Ebar from the fit
    double sigma = 0.0;
    double omega1 = 0.0;        // spacing of the two members bracketing Ebar
    double e2 = 0.0;            // local anharmonicity
    double r_squared = 0.0;     // weighted fit quality on log-weights
    double total_weight = 0.0;

    double decay_time() const {
        if (e2 == 0.0) return std::numeric_limits<double>::infinity();
        return omega1 / (std::abs(e2) * sigma);
    }
    double plateau() const {
        return amplitude * amplitude * sigma * std::sqrt(M_PI) / omega1;
    }
};

struct SequenceSet {
    std::vector<GaussianSequence> sequences;  // kept fits, ascending mean energy
    double thresholded_weight = 0.0;  // weight above the component threshold
    double residual_weight = 0.0;     // weight not in any kept sequence
    bool structured = false;
    double omega1_seed = 0.0;         // revival-time spacing estimate
    int n_discarded_sequences = 0;    // raw groups dropped (too short or bad fit)
};

struct DetectOptions {
    double weight_threshold = 1e-4;      // relative to the largest weight
    double frac_tol = 0.25;              // extrapolation tolerance, units of local spacing
    int min_members = 4;
    double min_r2 = 0.9;
    int m_override = 0;                  // keep only the m heaviest sequences (0 = auto)
    double min_structured_weight = 0.5;  // kept fraction of thresholded weight
    int probe_points = 8192;             // resolution of the revival-time probe
};

namespace detail {

// Spacing seed for the greedy assignment: locate the first SP revival,
// whose time is the classical period 2 pi / omega1 shared by the sequences.
inline double estimate_omega1(const Eigen::VectorXd& e, const Eigen::VectorXd& w,
                              int probe_points) {
    std::vector<double> gaps;
    for (Eigen::Index k = 0; k + 1 < e.size(); ++k)
        if (e[k + 1] > e[k]) gaps.push_back(e[k + 1] - e[k]);
    if (gaps.empty()) throw unstructured_error("detect_sequences: degenerate energy ladder");
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    const double gap_med = gaps[gaps.size() / 2];

    const double w_sum = w.sum();
    const double mean = e.dot(w) / w_sum;
    const double var = (e.array() - mean).square().matrix().dot(w) / w_sum;
    const double spread = std::sqrt(std::max(0.0, var));
    if (!(spread > 0.0)) throw unstructured_error("detect_sequences: zero energy spread");

    const auto sp_at = [&e, &w](double t) {
        double re = 0.0, im = 0.0;
        for (Eigen::Index k = 0; k < e.size(); ++k) {
            re += w[k] * std::cos(e[k] * t);
            im += w[k] * std::sin(e[k] * t);
        }
        return re * re + im * im;
    };

    const double t_floor = 2.5 / spread;  // past the initial Gaussian decay
    const double t_max = 2.5 * 2.0 * M_PI / gap_med;
    const double step = t_max / probe_points;
    double best_t = 0.0, best_sp = -1.0;
    for (int i = 1; i <= probe_points; ++i) {
        const double t = step * i;
        if (t <= t_floor) continue;
        const double sp = sp_at(t);
        if (sp > best_sp) {
            best_sp = sp;
            best_t = t;
        }
    }
    if (!(best_t > 0.0))
        throw unstructured_error("detect_sequences: no revival found to seed the spacing");

    // Interference between energy-offset sequences modulates the revival
    // heights, and the global maximum can land on a multiple of the true
    // period. Walk the integer divisors of the peak time and keep the
    // earliest one that still shows an interior revival peak of its own.
    double t_rev = best_t;
    const double half_width = std::max(1.0 / spread, 4.0 * step);
    constexpr int kScanHalf = 16;
    for (int n = 8; n >= 2; --n) {
        const double t_cand = best_t / n;
        if (t_cand <= t_floor || t_cand - half_width <= 0.0) continue;
        int arg = -kScanHalf;
        double top = -1.0;
        for (int s = -kScanHalf; s <= kScanHalf; ++s) {
            const double sp = sp_at(t_cand + half_width * s / kScanHalf);
            if (sp > top) {
                top = sp;
                arg = s;
            }
        }
        if (std::abs(arg) < kScanHalf - 1 && top >= 0.08 * best_sp) {
            t_rev = t_cand + half_width * arg / kScanHalf;
            break;
        }
    }
    return 2.0 * M_PI / t_rev;
}

// Weighted quadratic fit of ln(w) over E; false when the parabola fails to
// open downward (no Gaussian interpretation).
inline bool gaussian_fit(GaussianSequence& s) {
    const Eigen::Index n = s.energies.size();
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = std::log(s.weights[i]);
    const PolyFit fit = poly_fit(s.energies, y, 2, &s.weights);
    const double c1 = fit.coeffs[1], c2 = fit.coeffs[2];
    if (!(c2 < 0.0)) return false;
    s.sigma = fit.x_half * std::sqrt(-0.5 / c2);
    const double u_vertex = -c1 / (2.0 * c2);
    s.mean_energy = fit.x_center + fit.x_half * u_vertex;
    s.amplitude = std::exp(fit.coeffs[0] - c1 * c1 / (4.0 * c2));
    const double y_mean = y.dot(s.weights) / s.weights.sum();
    double ss_res = 0.0, ss_tot = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = y[i] - fit(s.energies[i]);
        ss_res += s.weights[i] * r * r;
        const double d = y[i] - y_mean;
        ss_tot += s.weights[i] * d * d;
    }
    s.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return std::isfinite(s.sigma) && s.sigma > 0.0 && std::isfinite(s.amplitude);
}

// Local spacing and anharmonicity from the member energies bracketing eref.
inline void local_ladder(const Eigen::VectorXd& e, double eref, double& omega1, double& e2) {
    const Eigen::Index n = e.size();
    Eigen::Index a = 0;
    while (a + 1 < n && e[a + 1] <= eref) ++a;
    a = std::min(std::max(a, Eigen::Index(1)), n - 2);  // need both neighbours
    omega1 = e[a + 1] - e[a];
    e2 = 0.5 * (e[a + 1] + e[a - 1]) - e[a];
}

}  // namespace detail

// Partitions the thresholded components into evenly spaced sequences by
// greedy extrapolation, then fits each Gaussian envelope. Chaotic states
// fail the fits and come back flagged unstructured.
inline SequenceSet detect_sequences(const Decomposition& d, const DetectOptions& opts = {}) {
    if (opts.min_members < 3)
        throw std::invalid_argument("detect_sequences: min_members must be at least 3");
    const double w_max = d.weights.maxCoeff();
    std::vector<int> comp;
    for (Eigen::Index k = 0; k < d.weights.size(); ++k)
        if (d.weights[k] >= opts.weight_threshold * w_max) comp.push_back(static_cast<int>(k));
    if (comp.size() < 10)
        throw unstructured_error("detect_sequences: fewer than 10 components above threshold");

    Eigen::VectorXd e(comp.size()), w(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
        e[i] = d.energies[comp[i]];
        w[i] = d.weights[comp[i]];
    }

    SequenceSet out;
    out.thresholded_weight = w.sum();
    out.omega1_seed = detail::estimate_omega1(e, w, opts.probe_points);

    // greedy assignment in energy order: join the sequence whose ladder
    // extrapolates closest, otherwise start a new one
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < comp.size(); ++i) {
        double best_score = opts.frac_tol;
        int best_g = -1;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& mem = groups[g];
            double predicted, spacing;
            if (mem.size() >= 2) {
                const double e_last = e[mem[mem.size() - 1]];
                const double e_prev = e[mem[mem.size() - 2]];
                spacing = e_last - e_prev;
                predicted = 2.0 * e_last - e_prev;
            } else {
                spacing = out.omega1_seed;
                predicted = e[mem.back()] + spacing;
            }
            if (!(spacing > 0.0)) continue;
            const double score = std::abs(e[i] - predicted) / spacing;
            if (score < best_score) {
                best_score = score;
                best_g = static_cast<int>(g);
            }
        }
        if (best_g >= 0)
            groups[best_g].push_back(i);
        else
            groups.push_back({i});
    }

    for (const auto& mem : groups) {
        if (static_cast<int>(mem.size()) < opts.min_members) {
            ++out.n_discarded_sequences;
            continue;
        }
        GaussianSequence s;
        s.members.reserve(mem.size());
        s.energies.resize(mem.size());
        s.weights.resize(mem.size());
        for (std::size_t i = 0; i < mem.size(); ++i) {
            s.members.push_back(comp[mem[i]]);
            s.energies[i] = e[mem[i]];
            s.weights[i] = w[mem[i]];
        }
        s.total_weight = s.weights.sum();
        if (!detail::gaussian_fit(s) || s.r_squared < opts.min_r2) {
            ++out.n_discarded_sequences;
            continue;
        }
        detail::local_ladder(s.energies, s.mean_energy, s.omega1, s.e2);
        if (!(s.omega1 > 0.0)) {
            ++out.n_discarded_sequences;
            continue;
        }
        out.sequences.push_back(std::move(s));
    }

    if (opts.m_override > 0 && static_cast<int>(out.sequences.size()) > opts.m_override) {
        std::sort(out.sequences.begin(), out.sequences.end(),
                  [](const auto& a, const auto& b) { return a.total_weight > b.total_weight; });
        out.n_discarded_sequences +=
            static_cast<int>(out.sequences.size()) - opts.m_override;
        out.sequences.resize(opts.m_override);
    }
    std::sort(out.sequences.begin(), out.sequences.end(),
              [](const auto& a, const auto& b) { return a.mean_energy < b.mean_energy; });

    double kept = 0.0;
    for (const auto& s : out.sequences) kept += s.total_weight;
    out.residual_weight = 1.0 - kept;
    out.structured = !out.sequences.empty() &&
                     kept >= opts.min_structured_weight * out.thresholded_weight;
    return out;
}

// ------------------------------------------------- per-sequence term ----

// SP^(i)(t) = (A^2 sigma sqrt(pi) / omega1) Theta_3(omega1 t / 2, y) with
// y = exp[-(omega1/sigma)^2/4] exp[-(t/t_D)^2].
inline double sp_sequence(const GaussianSequence& s, double t) {
    if (!(s.omega1 > 0.0) || !(s.sigma > 0.0))
        throw std::invalid_argument("sp_sequence: sequence is not fitted");
    const double x = 0.5 * s.omega1 * t;
    double y = std::exp(-0.25 * (s.omega1 / s.sigma) * (s.omega1 / s.sigma));
    const double td = s.decay_time();
    if (std::isfinite(td)) y *= std::exp(-(t / td) * (t / td));
    return s.plateau() * theta3(x, y);
}

// ------------------------------------------------- interference term ----

struct InterferencePair {
    int i = 0, j = 0;
    double delta_e = 0.0;     // mean rank-paired energy offset near the crossing
    double omega_ij = 0.0;    // spacing of sequence i around the crossing energy
    double e_crossing = 0.0;  // energy maximizing the product of the envelopes
    double sigma_ij = 0.0;
};

// Pairing convention for delta_e: membership ranks are aligned at the
// crossing energy and the offset is averaged over the 5 nearest pairs.
inline InterferencePair make_interference_pair(const SequenceSet& ss, int i, int j) {
    const int m = static_cast<int>(ss.sequences.size());
    if (i < 0 || j < 0 || i >= m || j >= m || i == j)
        throw std::invalid_argument("make_interference_pair: bad sequence indices");
    const GaussianSequence& si = ss.sequences[i];
    const GaussianSequence& sj = ss.sequences[j];
    InterferencePair p;
    p.i = i;
    p.j = j;
    const double vi = si.sigma * si.sigma, vj = sj.sigma * sj.sigma;
    p.e_crossing = (si.mean_energy * vj + sj.mean_energy * vi) / (vi + vj);

    double e2_unused;
    detail::local_ladder(si.energies, p.e_crossing, p.omega_ij, e2_unused);

    const auto nearest = [](const Eigen::VectorXd& e, double x) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < e.size(); ++k)
            if (std::abs(e[k] - x) < std::abs(e[best] - x)) best = k;
        return best;
    };
    const Eigen::Index ai = nearest(si.energies, p.e_crossing);
    const Eigen::Index aj = nearest(sj.energies, p.e_crossing);
    double acc = 0.0;
    int count = 0;
    for (int r = -2; r <= 2; ++r) {
        const Eigen::Index ki = ai + r, kj = aj + r;
        if (ki < 0 || kj < 0 || ki >= si.energies.size() || kj >= sj.energies.size()) continue;
        acc += si.energies[ki] - sj.energies[kj];
        ++count;
    }
    p.delta_e = count > 0 ? acc / count : si.mean_energy - sj.mean_energy;
    p.sigma_ij = 2.0 * std::abs(si.e2) * si.sigma * sj.sigma /
                 (p.omega_ij * std::sqrt(vi + vj));
    return p;
}

inline double sp_interference(const InterferencePair& p, const SequenceSet& ss, double t,
                              double eps = 1e-16) {
    const GaussianSequence& si = ss.sequences[p.i];
    const GaussianSequence& sj = ss.sequences[p.j];
    const double var = si.sigma * si.sigma + sj.sigma * sj.sigma;
    const double pref = 2.0 * si.amplitude * sj.amplitude * std::sqrt(2.0 * M_PI) * si.sigma *
                        sj.sigma / (p.omega_ij * std::sqrt(var));
    const double shift = p.delta_e + si.mean_energy - sj.mean_energy;

    // envelope centers: the energy Gaussian peaks near p0, the time Gaussian at 0
    const auto term = [&](long pp) -> double {
        const double g_e = std::exp(-std::pow(pp * p.omega_ij + shift, 2) / (2.0 * var));
        if (g_e < eps) return std::numeric_limits<double>::quiet_NaN();  // truncation marker
        const double arg_t = p.sigma_ij * pp * t;
        const double g_t = std::exp(-0.5 * arg_t * arg_t);
        if (g_t < eps) return std::numeric_limits<double>::quiet_NaN();
        return g_e * g_t * std::cos((p.delta_e + pp * p.omega_ij) * t);
    };

    const long p0 = std::lround(-shift / p.omega_ij);
    double sum = 0.0;
    const double t0 = term(p0);
    if (!std::isnan(t0)) sum += t0;
    for (long pp = p0 + 1; pp < p0 + 100000; ++pp) {
        const double v = term(pp);
        if (std::isnan(v)) break;
        sum += v;
    }
    for (long pp = p0 - 1; pp > p0 - 100000; --pp) {
        const double v = term(pp);
        if (std::isnan(v)) break;
        sum += v;
    }
    return pref * sum;
}

// ---------------------------------------------------------- assembly ----

struct AnalyticSP {
    SPSeries series;                  // total; plateau = sum of sequence plateaus
    std::vector<std::string> labels;  // one per term, sequences then pairs
    Eigen::MatrixXd terms;            // labels.size() x times.size()
};

// SP(t) = sum_i SP^(i)(t) + sum_{i<j} SP_I^(ij)(t) over the grid, with the
// per-term breakdown kept for plotting.
inline AnalyticSP sp_analytic(const SequenceSet& ss, const Eigen::VectorXd& times) {
    if (!ss.structured)
        throw unstructured_error("sp_analytic: decomposition is unstructured; the Gaussian "
                                 "sequence picture does not apply");
    const int m = static_cast<int>(ss.sequences.size());
    AnalyticSP out;
    out.series.times = times;
    out.series.sp = Eigen::VectorXd::Zero(times.size());
    const int n_terms = m + m * (m - 1) / 2;
    out.terms.resize(n_terms, times.size());
    int row = 0;
    for (int i = 0; i < m; ++i, ++row) {
        out.labels.push_back("seq" + std::to_string(i));
        for (Eigen::Index it = 0; it < times.size(); ++it)
            out.terms(row, it) = sp_sequence(ss.sequences[i], times[it]);
        out.series.plateau += ss.sequences[i].plateau();
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j, ++row) {
            out.labels.push_back("int" + std::to_string(i) + "_" + std::to_string(j));
            const InterferencePair p = make_interference_pair(ss, i, j);
            for (Eigen::Index it = 0; it < times.size(); ++it)
                out.terms(row, it) = sp_interference(p, ss, times[it]);
        }
    for (Eigen::Index it = 0; it < times.size(); ++it)
        out.series.sp[it] = out.terms.col(it).sum();
    return out;
}

}  // namespace dicke
