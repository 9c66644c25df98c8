#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/numerics.hpp"
#include "dicke/ode.hpp"
#include "dicke/phase_space.hpp"

// Classical trajectories, Poincare sections on the p = 0 plane (q+ branch)
// and maximal Lyapunov exponents. Integration always runs in the cartesian
// spin chart, which has no coordinate singularity at the poles and whose
// flow conserves |j| identically.

namespace dicke {

namespace detail {

struct CartRhs {
    ModelParams params;
    bool reversed = false;
    void operator()(double t, const double* y, double* dydt) const {
        cartesian_rhs(params, t, y, dydt);
        if (reversed)
            for (int i = 0; i < 5; ++i) dydt[i] = -dydt[i];
    }
};

inline double cart_distance(const CartesianState& a, const CartesianState& b) {
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

}  // namespace detail

using CartSolver = ode::Dop853<5, detail::CartRhs>;

// -------------------------------------------------------- trajectories ----

struct IntegrateOptions {
    double rtol = 1e-12;
    double atol = 1e-12;
    long long max_steps = 20000000;
};

struct TrajectorySample {
    double t = 0.0;
    PhasePoint point;
    double energy = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    CartesianState final_state{};
    double t_end = 0.0;
    double energy_initial = 0.0;
    double max_drift = 0.0;  // max |H(t) - H(0)| / max(|H(0)|, 1)
    ode::StepStats stats;
};

// Integrates for a duration t_end. sample_dt > 0 records a uniform grid via
// dense output; otherwise every accepted step endpoint is recorded.
// reversed = true integrates the time-mirrored field (for reversibility
// checks): the result is the backward evolution over the same duration.
inline Trajectory integrate(const PhasePoint& s0, double t_end, const ModelParams& params,
                            const IntegrateOptions& opts = {}, double sample_dt = 0.0,
                            bool reversed = false) {
    params.validate();
    validate_phase_point(s0, params);
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be positive");

    CartSolver solver(detail::CartRhs{params, reversed}, opts.rtol, opts.atol);
    CartesianState y0 = cartesian_from_phase(s0, params);
    solver.init(0.0, y0);

    Trajectory traj;
    traj.energy_initial = hcl_cartesian(y0, params);
    const double h_ref = std::max(std::abs(traj.energy_initial), 1.0);
    traj.samples.push_back({0.0, s0, traj.energy_initial});

    double next_sample = sample_dt > 0.0 ? sample_dt : 0.0;
    long long steps = 0;
    while (solver.t() < t_end) {
        solver.step(t_end);
        if (++steps > opts.max_steps)
            throw std::runtime_error("integrate: exceeded " + std::to_string(opts.max_steps) +
                                     " steps at t = " + std::to_string(solver.t()));
        const double drift = std::abs(hcl_cartesian(solver.y(), params) - traj.energy_initial) / h_ref;
        traj.max_drift = std::max(traj.max_drift, drift);
        if (sample_dt > 0.0) {
            while (next_sample <= solver.t() + 1e-14 && next_sample <= t_end) {
                solver.prepare_dense();
                const CartesianState ys = solver.dense_state(std::min(next_sample, solver.t()));
                traj.samples.push_back(
                    {next_sample, phase_from_cartesian(ys), hcl_cartesian(ys, params)});
                next_sample += sample_dt;
            }
        } else {
            traj.samples.push_back({solver.t(), phase_from_cartesian(solver.y()),
                                    hcl_cartesian(solver.y(), params)});
        }
    }
    traj.final_state = solver.y();
    traj.t_end = solver.t();
    traj.stats = solver.stats();
    return traj;
}

// ---------------------------------------------------- Poincare section ----

struct SectionOptions {
    double rtol = 1e-12;
    double atol = 1e-12;
    double t_max = 20000.0;
    long long max_steps = 50000000;
    bool q_plus_branch = true;  // keep only crossings on the q+ root branch
};

struct SectionPoint {
    double t = 0.0;
    double phi = 0.0;       // in [0, 2 pi)
    double jz_tilde = 0.0;  // jz / j
    double q = 0.0;
    double p = 0.0;         // residual after root refinement
    double energy = 0.0;
};

struct SectionResult {
    std::vector<SectionPoint> crossings;
    bool complete = false;  // reached the requested count before t_max
    double t_reached = 0.0;
    double max_drift = 0.0;
};

// Records p = 0 crossings of the orbit through s0, with the crossing instant
// refined on the dense output. On the plane the energy condition is a
// quadratic in q, and the two roots are told apart by the crossing
// orientation: dp/dt = -(omega q + b) equals -sqrt(disc) on the q+ root, so
// the q+ branch is exactly the set of downward (dp/dt <= 0) crossings.
inline SectionResult poincare_section(const PhasePoint& s0, int n_crossings,
                                      const ModelParams& params,
                                      const SectionOptions& opts = {}) {
    params.validate();
    validate_phase_point(s0, params);
    if (n_crossings < 1) throw std::invalid_argument("poincare_section: need n_crossings >= 1");

    CartSolver solver(detail::CartRhs{params}, opts.rtol, opts.atol);
    const CartesianState y0 = cartesian_from_phase(s0, params);
    solver.init(0.0, y0);
    const double e0 = hcl_cartesian(y0, params);
    const double h_ref = std::max(std::abs(e0), 1.0);

    SectionResult out;
    const auto record = [&](double t, const CartesianState& y) {
        const double dp_dt = -(params.omega * y[0] + 2.0 * params.gamma / std::sqrt(params.j) * y[2]);
        if (opts.q_plus_branch && dp_dt > 0.0) return;
        const PhasePoint pt = phase_from_cartesian(y);
        out.crossings.push_back(
            {t, pt.phi, pt.jz / params.j, pt.q, pt.p, hcl_cartesian(y, params)});
    };
    if (std::abs(s0.p) < 1e-12) record(0.0, y0);  // the orbit starts on the plane

    long long steps = 0;
    while (static_cast<int>(out.crossings.size()) < n_crossings && solver.t() < opts.t_max) {
        solver.step(opts.t_max);
        if (++steps > opts.max_steps)
            throw std::runtime_error("poincare_section: step budget exhausted");
        out.max_drift = std::max(
            out.max_drift, std::abs(hcl_cartesian(solver.y(), params) - e0) / h_ref);
        const double p_lo = solver.y_prev()[1];
        const double p_hi = solver.y()[1];
        if (!(p_lo * p_hi < 0.0)) continue;  // no sign change of p in this step
        solver.prepare_dense();
        const double t_cross = bisect_root(
            [&](double t) { return solver.dense_component(1, t); },
            solver.t_prev(), solver.t(), p_lo, p_hi);
        record(t_cross, solver.dense_state(t_cross));
    }
    out.complete = static_cast<int>(out.crossings.size()) >= n_crossings;
    out.t_reached = solver.t();
    return out;
}

// ------------------------------------------------------------- Benettin ----

struct BenettinOptions {
    double t_total = 3000.0;
    double renorm_interval = 0.5;
    double d0 = 1e-8;
    double rtol = 1e-10;
    double atol = 1e-10;
    std::uint64_t seed = 1;
    double cutoff = 0.004;
    int trace_stride = 50;  // record every n-th renormalization
};

struct LyapunovEstimate {
    double lambda = 0.0;
    std::string method;
    bool is_chaotic = false;
    double cutoff = 0.004;
    bool converged = true;  // running estimate settled in the last quarter
    std::vector<std::pair<double, double>> trace;
};

// Two-trajectory method: evolve a d0-offset companion, renormalize the
// separation every renorm_interval, and average the log growth factors.
inline LyapunovEstimate lyapunov_benettin(const PhasePoint& s0, const ModelParams& params,
                                          const BenettinOptions& opts = {}) {
    params.validate();
    validate_phase_point(s0, params);
    if (!(opts.renorm_interval > 0.0) || !(opts.t_total > opts.renorm_interval))
        throw std::invalid_argument("lyapunov_benettin: bad time parameters");

    CartSolver ref(detail::CartRhs{params}, opts.rtol, opts.atol);
    CartSolver dev(detail::CartRhs{params}, opts.rtol, opts.atol);
    const CartesianState y0 = cartesian_from_phase(s0, params);
    ref.init(0.0, y0);

    // deterministic random initial direction
    std::uint64_t state = opts.seed;
    CartesianState yd = y0;
    double norm = 0.0;
    double dir[5];
    for (int i = 0; i < 5; ++i) {
        state = splitmix64(state);
        dir[i] = (static_cast<double>(state >> 11) / 9007199254740992.0) - 0.5;
        norm += dir[i] * dir[i];
    }
    norm = std::sqrt(norm);
    // scale spin components with j so the offset is isotropic in phase space
    const double scales[5] = {1.0, 1.0, params.j, params.j, params.j};
    double d_norm = 0.0;
    for (int i = 0; i < 5; ++i) {
        dir[i] *= scales[i] / norm;
        d_norm += dir[i] * dir[i];
    }
    d_norm = std::sqrt(d_norm);
    for (int i = 0; i < 5; ++i) yd[i] += opts.d0 * dir[i] / d_norm;
    dev.init(0.0, yd);

    LyapunovEstimate est;
    est.method = "benettin";
    est.cutoff = opts.cutoff;

    const int n_segments = static_cast<int>(std::round(opts.t_total / opts.renorm_interval));
    double log_sum = 0.0;
    for (int k = 1; k <= n_segments; ++k) {
        const double t_k = k * opts.renorm_interval;
        while (ref.t() < t_k) ref.step(t_k);
        while (dev.t() < t_k) dev.step(t_k);
        const double d = detail::cart_distance(ref.y(), dev.y());
        if (!(d > 0.0))
            throw std::runtime_error("lyapunov_benettin: companion collapsed onto the orbit");
        log_sum += std::log(d / opts.d0);
        CartesianState yn = ref.y();
        const double f = opts.d0 / d;
        for (int i = 0; i < 5; ++i) yn[i] += f * (dev.y()[i] - ref.y()[i]);
        dev.init(t_k, yn);
        if (k % opts.trace_stride == 0 || k == n_segments)
            est.trace.emplace_back(t_k, log_sum / t_k);
    }
    est.lambda = log_sum / (n_segments * opts.renorm_interval);
    est.is_chaotic = est.lambda > opts.cutoff;

    // flag traces still swinging by more than half their level at the end
    const std::size_t tail = est.trace.size() / 4;
    if (tail >= 2) {
        double lo = est.trace[est.trace.size() - tail].second, hi = lo;
        for (std::size_t i = est.trace.size() - tail; i < est.trace.size(); ++i) {
            lo = std::min(lo, est.trace[i].second);
            hi = std::max(hi, est.trace[i].second);
        }
        const double level = std::max(std::abs(est.lambda), opts.cutoff);
        est.converged = (hi - lo) <= 0.5 * level;
    }
    return est;
}

// ---------------------------------------------------------------- cloud ----

struct CloudOptions {
    int n_neighbors = 16;
    double radius = 1e-6;  // in the (phi, jz/j) plane of the section
    double t_total = 3000.0;
    double sample_dt = 0.25;
    double rtol = 1e-10;
    double atol = 1e-10;
    std::uint64_t seed = 1;
    double cutoff = 0.004;
    double saturation_fraction = 0.05;  // of the sphere diameter
};

// Cloud method: evolve a ring of neighbours around the central condition and
// take the growth rate of the averaged ln(distance) curve. Whenever the mean
// separation nears the system size the ring is pulled back to its initial
// radius along the current displacement directions, so the whole run stays in
// the linear-growth regime and the estimate covers every expansion cycle.
inline LyapunovEstimate lyapunov_cloud(const PhasePoint& s0, const ModelParams& params,
                                       const CloudOptions& opts = {}) {
    params.validate();
    validate_phase_point(s0, params);
    if (opts.n_neighbors < 4) throw std::invalid_argument("lyapunov_cloud: too few neighbours");

    const double energy = hcl(s0, params);
    const bool on_section = std::abs(s0.p) < 1e-12;

    // seeded rotation of the ring keeps the estimator deterministic while
    // still decorrelating repeated runs with different seeds
    const double rot =
        static_cast<double>(splitmix64(opts.seed) >> 11) / 9007199254740992.0;

    std::vector<CartSolver> cloud;
    cloud.reserve(opts.n_neighbors + 1);
    const auto make_solver = [&](const PhasePoint& pt) {
        CartSolver s(detail::CartRhs{params}, opts.rtol, opts.atol);
        s.init(0.0, cartesian_from_phase(pt, params));
        cloud.push_back(std::move(s));
    };
    make_solver(s0);
    for (int i = 0; i < opts.n_neighbors; ++i) {
        const double th = 2.0 * M_PI * (i + rot) / opts.n_neighbors;
        PhasePoint pt = s0;
        pt.phi = s0.phi + opts.radius * std::cos(th);
        double y = s0.jz / params.j + opts.radius * std::sin(th);
        y = std::min(1.0, std::max(-1.0, y));
        pt.jz = y * params.j;
        if (on_section) {
            // stay on the energy shell when the centre sits on the section
            if (const auto q = poincare_q_plus(energy, pt.jz, pt.phi, params)) pt.q = *q;
        }
        make_solver(pt);
    }

    LyapunovEstimate est;
    est.method = "cloud";
    est.cutoff = opts.cutoff;

    const int n_samples = static_cast<int>(opts.t_total / opts.sample_dt);
    std::vector<double> ts, ys;
    ts.reserve(n_samples + 1);
    ys.reserve(n_samples + 1);
    const auto mean_log_d = [&]() {
        double acc = 0.0;
        for (int i = 1; i < static_cast<int>(cloud.size()); ++i) {
            const double d = detail::cart_distance(cloud[0].y(), cloud[i].y());
            acc += std::log(std::max(d, 1e-300));
        }
        return acc / (cloud.size() - 1);
    };
    ts.push_back(0.0);
    ys.push_back(mean_log_d());

    std::vector<double> d_init(cloud.size() - 1);
    for (std::size_t i = 1; i < cloud.size(); ++i)
        d_init[i - 1] = detail::cart_distance(cloud[0].y(), cloud[i].y());

    const double y_cap = std::log(opts.saturation_fraction * 2.0 * params.j);
    double shift = 0.0;  // keeps the stitched curve continuous across rescales
    for (int k = 1; k <= n_samples; ++k) {
        const double t_k = k * opts.sample_dt;
        for (auto& s : cloud)
            while (s.t() < t_k) s.step(t_k);
        const double y_raw = mean_log_d();
        ts.push_back(t_k);
        ys.push_back(y_raw + shift);
        if (y_raw >= y_cap) {
            const CartesianState yc = cloud[0].y();
            for (std::size_t i = 1; i < cloud.size(); ++i) {
                const double d = std::max(detail::cart_distance(yc, cloud[i].y()), 1e-300);
                const double f = d_init[i - 1] / d;
                CartesianState yn;
                for (int m = 0; m < 5; ++m) yn[m] = yc[m] + (cloud[i].y()[m] - yc[m]) * f;
                cloud[i].init(t_k, yn);
            }
            const double y_new = mean_log_d();
            if (y_new >= y_cap)
                throw convergence_error(
                    "lyapunov_cloud: ring radius cannot be kept below the saturation scale");
            shift += y_raw - y_new;
        }
    }

    // growth rate: chord slope of the stitched curve past the initial
    // direction-alignment transient, an equal-weight time average matching
    // what the renormalization estimator accumulates
    const double lambda_rough = (ys.back() - ys.front()) / ts.back();
    const double t_lo =
        std::min(lambda_rough > 0.0 ? 3.0 / lambda_rough : opts.t_total, opts.t_total / 3.0);
    std::size_t i_lo = 0;
    while (i_lo < ts.size() && ts[i_lo] < t_lo) ++i_lo;
    if (ts.size() - i_lo < 6)
        throw convergence_error("lyapunov_cloud: no fittable growth window");
    est.lambda = (ys.back() - ys[i_lo]) / (ts.back() - ts[i_lo]);
    est.is_chaotic = est.lambda > opts.cutoff;
    est.trace.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) est.trace.emplace_back(ts[i], ys[i]);
    return est;
}

}  // namespace dicke
