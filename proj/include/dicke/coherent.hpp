#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dicke/model.hpp"
#include "dicke/numerics.hpp"
#include "dicke/phase_space.hpp"

// Product coherent states |z, alpha> = |z> (x) |alpha>: a Bloch state on the
// spin sphere and a Glauber state of the field,
//
//   |z>     = (1 + |z|^2)^-j  sum_k  sqrt(C(2j, k)) z^k |j, -j + k>
//   |alpha> = e^{-|alpha|^2/2} sum_n alpha^n / sqrt(n!) |n>
//
// mapped to classical coordinates by z = sqrt((1+u)/(1-u)) e^{-i phi} with
// u = jz/j, and alpha = (q + i p) / sqrt(2). All amplitude evaluation is in
// the log domain so large j and large |alpha| stay finite.

namespace dicke {

struct CoherentParams {
    std::complex<double> z{0.0, 0.0};
    std::complex<double> alpha{0.0, 0.0};
    bool north_pole = false;  // u = +1, where the z label diverges
};

// ------------------------------------------------------------ labels ----

inline CoherentParams phase_to_labels(const PhasePoint& pt, const ModelParams& params,
                                      bool allow_pole = false) {
    params.validate();
    validate_phase_point(pt, params);
    double u = pt.jz / params.j;
    if (u > 1.0) u = 1.0;
    if (u < -1.0) u = -1.0;
    CoherentParams cp;
    cp.alpha = std::complex<double>(pt.q, pt.p) / std::sqrt(2.0);
    if (u == 1.0) {
        if (!allow_pole)
            throw std::invalid_argument("phase_to_labels: jz = +j is a coordinate singularity "
                                        "(pass allow_pole to construct the pole state)");
        cp.north_pole = true;
        return cp;
    }
    const double r = std::sqrt((1.0 + u) / (1.0 - u));
    cp.z = std::polar(r, -pt.phi);
    return cp;
}

inline PhasePoint labels_to_phase(const CoherentParams& cp, const ModelParams& params) {
    params.validate();
    PhasePoint pt;
    pt.q = std::sqrt(2.0) * cp.alpha.real();
    pt.p = std::sqrt(2.0) * cp.alpha.imag();
    if (cp.north_pole) {
        pt.jz = params.j;
        pt.phi = 0.0;
        return pt;
    }
    const double r2 = std::norm(cp.z);
    pt.jz = params.j * (r2 - 1.0) / (r2 + 1.0);
    pt.phi = r2 == 0.0 ? 0.0 : -std::arg(cp.z);
    if (pt.phi < 0.0) pt.phi += 2.0 * M_PI;
    return pt;
}

// ----------------------------------------------------------- weights ----

namespace detail {

inline double int_pow(double x, int n) {
    double acc = 1.0, base = x;
    for (int e = n; e > 0; e >>= 1) {
        if (e & 1) acc *= base;
        base *= base;
    }
    return acc;
}

// Per-layer boson log-magnitudes and the common phase increment.
inline void boson_log_amps(const std::complex<double>& alpha, int n_max,
                           std::vector<double>& ln_mag, double& phase_step) {
    const double a2 = std::norm(alpha);
    const double ln_a = a2 > 0.0 ? 0.5 * std::log(a2) : 0.0;
    phase_step = a2 > 0.0 ? std::arg(alpha) : 0.0;
    ln_mag.assign(n_max + 1, -std::numeric_limits<double>::infinity());
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0 && a2 == 0.0) break;  // vacuum: only n = 0 contributes
        ln_mag[n] = -0.5 * a2 + n * ln_a - 0.5 * std::lgamma(n + 1.0);
    }
}

// Per-ladder-index spin log-magnitudes and phase increment, k = 0 .. 2j.
inline void spin_log_amps(const CoherentParams& cp, int two_j,
                          std::vector<double>& ln_mag, double& phase_step) {
    ln_mag.assign(two_j + 1, -std::numeric_limits<double>::infinity());
    phase_step = 0.0;
    if (cp.north_pole) {
        ln_mag[two_j] = 0.0;
        return;
    }
    const double r2 = std::norm(cp.z);
    if (r2 == 0.0) {
        ln_mag[0] = 0.0;
        return;
    }
    phase_step = std::arg(cp.z);
    const double ln_z = 0.5 * std::log(r2);
    const double j = 0.5 * two_j;
    const double ln_norm = -j * std::log1p(r2);
    const double lg2j = std::lgamma(two_j + 1.0);
    for (int k = 0; k <= two_j; ++k) {
        const double ln_binom =
            0.5 * (lg2j - std::lgamma(k + 1.0) - std::lgamma(two_j - k + 1.0));
        ln_mag[k] = ln_binom + k * ln_z + ln_norm;
    }
}

}  // namespace detail

// Probability carried by one parity sector, in closed form: the parity
// operator has coherent expectation e^{-2|alpha|^2} (-u)^{2j}.
inline double sector_weight(const CoherentParams& cp, const ModelParams& params,
                            int parity = +1) {
    params.validate();
    if (parity != +1 && parity != -1)
        throw std::invalid_argument("sector_weight: parity must be +1 or -1");
    const int two_j = params.two_j();
    double u;
    if (cp.north_pole) {
        u = 1.0;
    } else {
        const double r2 = std::norm(cp.z);
        u = (r2 - 1.0) / (r2 + 1.0);
    }
    const double parity_mean =
        std::exp(-2.0 * std::norm(cp.alpha)) * detail::int_pow(-u, two_j);
    return 0.5 * (1.0 + parity * parity_mean);
}

// ---------------------------------------------------- sector vector ----

struct CoherentVector {
    CoherentParams labels;
    BasisSpec basis;
    Eigen::VectorXcd coefficients;  // raw projection, not renormalized
    double norm_captured = 0.0;     // probability caught by the finite basis
    double sector_weight = 0.0;     // analytic parity-sector probability
    double capture_ratio = 0.0;     // norm_captured / sector_weight
    bool truncation_warning = false;
};

// Expands |z, alpha> over the retained (one parity sector, n <= n_max) basis.
// capture_ratio close to 1 means the Fock cutoff holds the full sector.
inline CoherentVector coherent_vector(const CoherentParams& cp, const ModelParams& params,
                                      const BasisSpec& basis, double warn_threshold = 1e-4) {
    params.validate();
    if (basis.two_j != params.two_j())
        throw std::invalid_argument("coherent_vector: basis built for a different j");

    std::vector<double> ln_b, ln_s;
    double phase_b = 0.0, phase_s = 0.0;
    detail::boson_log_amps(cp.alpha, basis.n_max, ln_b, phase_b);
    detail::spin_log_amps(cp, basis.two_j, ln_s, phase_s);

    CoherentVector cv;
    cv.labels = cp;
    cv.basis = basis;
    cv.coefficients.resize(basis.dim());
    double norm = 0.0;
    for (int i = 0; i < basis.dim(); ++i) {
        const BasisState& s = basis.states[i];
        const int k = (s.two_m + basis.two_j) / 2;
        const double ln_mag = ln_b[s.n] + ln_s[k];
        if (ln_mag == -std::numeric_limits<double>::infinity()) {
            cv.coefficients[i] = 0.0;
            continue;
        }
        const double mag = std::exp(ln_mag);
        cv.coefficients[i] = std::polar(mag, s.n * phase_b + k * phase_s);
        norm += mag * mag;
    }
    cv.norm_captured = norm;
    cv.sector_weight = dicke::sector_weight(cp, params, basis.parity);
    cv.capture_ratio = cv.sector_weight > 0.0 ? cv.norm_captured / cv.sector_weight : 0.0;
    cv.truncation_warning = cv.capture_ratio < 1.0 - warn_threshold;
    return cv;
}

// Full product-basis grid (both parities), row n in 0..n_max, column
// k in 0..2j. Used for moment checks and energy expectations.
inline Eigen::MatrixXcd coherent_grid(const CoherentParams& cp, const ModelParams& params,
                                      int n_max) {
    params.validate();
    if (n_max < 0) throw std::invalid_argument("coherent_grid: n_max must be non-negative");
    const int two_j = params.two_j();
    std::vector<double> ln_b, ln_s;
    double phase_b = 0.0, phase_s = 0.0;
    detail::boson_log_amps(cp.alpha, n_max, ln_b, phase_b);
    detail::spin_log_amps(cp, two_j, ln_s, phase_s);
    Eigen::MatrixXcd grid(n_max + 1, two_j + 1);
    for (int n = 0; n <= n_max; ++n)
        for (int k = 0; k <= two_j; ++k) {
            const double ln_mag = ln_b[n] + ln_s[k];
            grid(n, k) = ln_mag == -std::numeric_limits<double>::infinity()
                             ? 0.0
                             : std::polar(std::exp(ln_mag), n * phase_b + k * phase_s);
        }
    return grid;
}

// Fock cutoff that captures a Glauber state to ~1e-12.
inline int suggested_n_max(const CoherentParams& cp) {
    const double a2 = std::norm(cp.alpha);
    return static_cast<int>(std::ceil(a2 + 12.0 * std::sqrt(a2 + 1.0) + 20.0));
}

// ----------------------------------------------------------- overlap ----

// |<a|b>|^2 in closed form. Boson part exp(-|alpha_a - alpha_b|^2); spin
// part |1 + conj(z_a) z_b|^{4j} / [(1+|z_a|^2)(1+|z_b|^2)]^{2j}.
inline double overlap(const CoherentParams& a, const CoherentParams& b,
                      const ModelParams& params) {
    params.validate();
    const double two_j = params.n_atoms();
    const double ln_boson = -std::norm(a.alpha - b.alpha);
    double ln_spin;
    if (a.north_pole && b.north_pole) {
        ln_spin = 0.0;
    } else if (a.north_pole || b.north_pole) {
        const std::complex<double>& z = a.north_pole ? b.z : a.z;
        const double r2 = std::norm(z);
        if (r2 == 0.0) return 0.0;  // pole against antipode
        ln_spin = two_j * (std::log(r2) - std::log1p(r2));
    } else {
        const std::complex<double> w = std::conj(a.z) * b.z;
        const double cross = std::abs(1.0 + w);
        // below the cancellation noise of 1 + w the value carries no digits;
        // the points are antipodal to machine precision
        if (cross <= 16.0 * 2.220446049250313e-16 * (1.0 + std::abs(w))) return 0.0;
        ln_spin = two_j * (2.0 * std::log(cross) -
                           (std::log1p(std::norm(a.z)) + std::log1p(std::norm(b.z))));
    }
    return std::exp(ln_boson + ln_spin);
}

// ----------------------------------------------------------- moments ----

struct CoherentMoments {
    double norm = 0.0;  // probability captured by the grid
    double q_mean = 0.0, p_mean = 0.0;
    double dq = 0.0, dp = 0.0;
    double jx_mean = 0.0, jy_mean = 0.0, jz_mean = 0.0;
    double spin_dispersion = 0.0;  // total spin variance; j for any coherent state
    double energy = 0.0;           // <H> over the full product basis
};

// Moments evaluated directly on a product-basis grid by ladder operators;
// renormalized by the captured norm so converged grids give exact values.
inline CoherentMoments coherent_moments(const Eigen::MatrixXcd& grid,
                                        const ModelParams& params) {
    const int n_rows = static_cast<int>(grid.rows());
    const int n_cols = static_cast<int>(grid.cols());
    const int two_j = params.two_j();
    if (n_cols != two_j + 1)
        throw std::invalid_argument("coherent_moments: grid column count must be 2j + 1");
    const double j = params.j;

    const auto fplus = [&](int k) {  // J+ |k> = fplus(k) |k+1>
        return std::sqrt(static_cast<double>(k + 1) * static_cast<double>(two_j - k));
    };

    double norm = 0.0, n_mean = 0.0, jz_mean = 0.0, jz2_mean = 0.0;
    std::complex<double> a_mean = 0.0, a2_mean = 0.0, jp_mean = 0.0;
    std::complex<double> jp_a = 0.0, jp_adag = 0.0;
    for (int n = 0; n < n_rows; ++n) {
        for (int k = 0; k < n_cols; ++k) {
            const std::complex<double> c = grid(n, k);
            const double w = std::norm(c);
            const double m = k - j;
            norm += w;
            n_mean += n * w;
            jz_mean += m * w;
            jz2_mean += m * m * w;
            const std::complex<double> cc = std::conj(c);
            if (n + 1 < n_rows) a_mean += cc * std::sqrt(n + 1.0) * grid(n + 1, k);
            if (n + 2 < n_rows)
                a2_mean += cc * std::sqrt((n + 1.0) * (n + 2.0)) * grid(n + 2, k);
            if (k >= 1) {
                jp_mean += cc * fplus(k - 1) * grid(n, k - 1);
                if (n + 1 < n_rows) jp_a += cc * fplus(k - 1) * std::sqrt(n + 1.0) * grid(n + 1, k - 1);
                if (n >= 1) jp_adag += cc * fplus(k - 1) * std::sqrt(static_cast<double>(n)) * grid(n - 1, k - 1);
            }
        }
    }
    if (norm <= 0.0) throw std::invalid_argument("coherent_moments: zero grid");

    n_mean /= norm; jz_mean /= norm; jz2_mean /= norm;
    a_mean /= norm; a2_mean /= norm; jp_mean /= norm;
    jp_a /= norm; jp_adag /= norm;

    CoherentMoments o;
    o.norm = norm;
    o.q_mean = std::sqrt(2.0) * a_mean.real();
    o.p_mean = std::sqrt(2.0) * a_mean.imag();
    const double q2 = a2_mean.real() + n_mean + 0.5;
    const double p2 = -a2_mean.real() + n_mean + 0.5;
    o.dq = std::sqrt(std::max(0.0, q2 - o.q_mean * o.q_mean));
    o.dp = std::sqrt(std::max(0.0, p2 - o.p_mean * o.p_mean));
    o.jx_mean = jp_mean.real();
    o.jy_mean = jp_mean.imag();
    o.jz_mean = jz_mean;
    o.spin_dispersion = j * (j + 1.0) - jz_mean * jz_mean - std::norm(jp_mean);
    const double coupling = 2.0 * (jp_a.real() + jp_adag.real());
    o.energy = params.omega * n_mean + params.omega0 * jz_mean +
               params.gamma / std::sqrt(params.n_atoms()) * coupling;
    return o;
}

// -------------------------------------------------- spreading contour ----

struct ContourOptions {
    int n_directions = 64;
    double level = std::exp(-1.0);  // overlap threshold defining the contour
    double radial_tol = 1e-10;
    double s_max = 4.0;  // give up beyond this displacement
};

struct ContourPoint {
    double phi = 0.0;       // unwrapped azimuth
    double jz_tilde = 0.0;  // jz / j
    double q = 0.0;         // section branch coordinate
    double overlap = 0.0;
    bool clipped = false;   // stopped at the energy-shell edge instead
};

struct SpreadingContour {
    PhasePoint center;
    std::vector<ContourPoint> points;
    bool any_clipped = false;
    double area = 0.0;  // shoelace area in the (phi, jz/j) plane
};

// Traces the overlap = level curve of the coherent state centred on a
// Poincare section point, walking outward along rays of the (phi, jz/j)
// plane and re-solving the section branch q(E, jz, phi) at each probe.
inline SpreadingContour spreading_contour(const PhasePoint& center, double energy,
                                          const ModelParams& params,
                                          const ContourOptions& opts = {}) {
    params.validate();
    if (opts.n_directions < 3)
        throw std::invalid_argument("spreading_contour: need at least 3 directions");
    if (std::abs(center.p) > 1e-9)
        throw std::invalid_argument("spreading_contour: center must lie on the p = 0 section");
    const auto q_center = poincare_q_plus(energy, center.jz, center.phi, params);
    if (!q_center)
        throw std::invalid_argument("spreading_contour: center is outside the energy shell");
    if (std::abs(*q_center - center.q) > 1e-6 * (1.0 + std::abs(*q_center)))
        throw std::invalid_argument("spreading_contour: center is not on the section branch");

    const CoherentParams c0 = phase_to_labels(center, params);
    const double phi_c = center.phi;
    const double y_c = center.jz / params.j;

    // On-shell overlap along one ray; nullopt once the probe leaves the shell.
    const auto probe = [&](double theta, double s) -> std::optional<std::pair<double, double>> {
        const double phi = phi_c + s * std::cos(theta);
        const double y = y_c + s * std::sin(theta);
        if (std::abs(y) > 1.0) return std::nullopt;
        const double jz = y * params.j;
        const auto q = poincare_q_plus(energy, jz, phi, params);
        if (!q) return std::nullopt;
        const CoherentParams c = phase_to_labels(PhasePoint{*q, 0.0, jz, phi}, params, true);
        return std::make_pair(overlap(c0, c, params), *q);
    };

    SpreadingContour out;
    out.center = center;
    out.center.q = *q_center;
    out.points.reserve(opts.n_directions);

    for (int d = 0; d < opts.n_directions; ++d) {
        const double theta = 2.0 * M_PI * d / opts.n_directions;
        double s_in = 0.0;
        double s = 0.02;
        bool resolved = false;
        while (s <= opts.s_max) {
            const auto res = probe(theta, s);
            if (!res) {
                // left the shell between probes: bisect the shell edge first
                double lo = s_in, hi = s;
                while (hi - lo > opts.radial_tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (probe(theta, mid)) lo = mid; else hi = mid;
                }
                const auto edge = probe(theta, lo);
                if (edge && edge->first < opts.level) {
                    // the overlap dipped below the level before the edge, so the
                    // level curve lives on shell after all: bisect it there
                    double llo = s_in, lhi = lo;
                    while (lhi - llo > opts.radial_tol) {
                        const double mid = 0.5 * (llo + lhi);
                        const auto r = probe(theta, mid);
                        if (r && r->first >= opts.level) llo = mid; else lhi = mid;
                    }
                    const double s_hit = 0.5 * (llo + lhi);
                    const auto hit = probe(theta, s_hit);
                    if (hit) {
                        out.points.push_back({phi_c + s_hit * std::cos(theta),
                                              y_c + s_hit * std::sin(theta), hit->second,
                                              hit->first, false});
                        resolved = true;
                        break;
                    }
                }
                out.points.push_back({phi_c + lo * std::cos(theta), y_c + lo * std::sin(theta),
                                      edge ? edge->second : 0.0, edge ? edge->first : 0.0, true});
                out.any_clipped = true;
                resolved = true;
                break;
            }
            if (res->first < opts.level) {
                // decayed below the level: bisect overlap(s) = level
                double lo = s_in, hi = s;
                while (hi - lo > opts.radial_tol) {
                    const double mid = 0.5 * (lo + hi);
                    const auto r = probe(theta, mid);
                    if (r && r->first >= opts.level) lo = mid; else hi = mid;
                }
                const double s_hit = 0.5 * (lo + hi);
                const auto hit = probe(theta, s_hit);
                if (hit) {
                    out.points.push_back({phi_c + s_hit * std::cos(theta),
                                          y_c + s_hit * std::sin(theta), hit->second, hit->first,
                                          false});
                } else {  // level curve and shell edge coincide within tolerance
                    const auto edge = probe(theta, lo);
                    out.points.push_back({phi_c + lo * std::cos(theta), y_c + lo * std::sin(theta),
                                          edge ? edge->second : 0.0, edge ? edge->first : 0.0, true});
                    out.any_clipped = true;
                }
                resolved = true;
                break;
            }
            s_in = s;
            s *= 2.0;
        }
        if (!resolved)
            throw std::runtime_error("spreading_contour: overlap never decayed along a ray; "
                                     "state too broad for this shell");
    }

    double area2 = 0.0;
    const int n = static_cast<int>(out.points.size());
    for (int i = 0; i < n; ++i) {
        const ContourPoint& a = out.points[i];
        const ContourPoint& b = out.points[(i + 1) % n];
        area2 += a.phi * b.jz_tilde - b.phi * a.jz_tilde;
    }
    out.area = 0.5 * std::abs(area2);
    return out;
}

}  // namespace dicke
