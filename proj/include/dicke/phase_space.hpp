#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "dicke/model.hpp"

// Classical limit of the Dicke model. Phase space is the product of the
// field plane (q, p) and the Bloch sphere, with canonical pairs (q, p) and
// (phi, jz):
//
//   H_cl = (omega/2)(p^2 + q^2) + omega0 jz
//        + 2 gamma sqrt(j) sqrt(1 - (jz/j)^2) q cos(phi)
//
// Energies scale linearly in j, so maps and sections are parametrized by
// the rescaled energy E/j and the rescaled spin projection jz/j.

namespace dicke {

struct PhasePoint {
    double q = 0.0;
    double p = 0.0;
    double jz = 0.0;   // spin projection, |jz| <= j
    double phi = 0.0;  // azimuth, canonically conjugate to jz
};

inline void validate_phase_point(const PhasePoint& pt, const ModelParams& params) {
    if (std::abs(pt.jz) > params.j * (1.0 + 1e-12))
        throw std::invalid_argument("PhasePoint: |jz| exceeds the spin length");
    if (!std::isfinite(pt.q) || !std::isfinite(pt.p) || !std::isfinite(pt.phi))
        throw std::invalid_argument("PhasePoint: non-finite coordinate");
}

// ---------------------------------------------------------- energy ----

inline double hcl(const PhasePoint& pt, const ModelParams& params) {
    validate_phase_point(pt, params);
    const double u = pt.jz / params.j;
    const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
    return 0.5 * params.omega * (pt.p * pt.p + pt.q * pt.q) + params.omega0 * pt.jz +
           2.0 * params.gamma * std::sqrt(params.j) * s * pt.q * std::cos(pt.phi);
}

// ------------------------------------------------- canonical flow ----

struct HamiltonRhs {
    double dq = 0.0;
    double dp = 0.0;
    double djz = 0.0;
    double dphi = 0.0;
};

// Hamilton equations in the canonical chart. The chart is singular at the
// poles (jz = +-j), where dphi/dt diverges; integration uses the cartesian
// chart below instead.
inline HamiltonRhs hamilton_rhs(const PhasePoint& pt, const ModelParams& params) {
    validate_phase_point(pt, params);
    const double u = pt.jz / params.j;
    const double one_m_u2 = 1.0 - u * u;
    if (one_m_u2 <= 0.0)
        throw std::domain_error("hamilton_rhs: canonical chart is singular at the spin poles");
    const double s = std::sqrt(one_m_u2);
    const double g = 2.0 * params.gamma * std::sqrt(params.j);
    HamiltonRhs rhs;
    rhs.dq = params.omega * pt.p;
    rhs.dp = -params.omega * pt.q - g * s * std::cos(pt.phi);
    rhs.djz = g * s * pt.q * std::sin(pt.phi);
    rhs.dphi = params.omega0 - g * pt.q * std::cos(pt.phi) * u / (params.j * s);
    return rhs;
}

// ------------------------------------------------- cartesian chart ----

// (q, p, jx, jy, jz) with jx^2 + jy^2 + jz^2 = j^2. Pole-safe; |j| is a
// constant of motion of the flow itself, so no projection step is needed.
using CartesianState = std::array<double, 5>;

inline CartesianState cartesian_from_phase(const PhasePoint& pt, const ModelParams& params) {
    validate_phase_point(pt, params);
    const double rho = std::sqrt(std::max(0.0, params.j * params.j - pt.jz * pt.jz));
    return {pt.q, pt.p, rho * std::cos(pt.phi), rho * std::sin(pt.phi), pt.jz};
}

inline PhasePoint phase_from_cartesian(const CartesianState& y) {
    PhasePoint pt;
    pt.q = y[0];
    pt.p = y[1];
    pt.jz = y[4];
    pt.phi = std::atan2(y[3], y[2]);
    if (pt.phi < 0.0) pt.phi += 2.0 * M_PI;
    return pt;
}

inline double hcl_cartesian(const CartesianState& y, const ModelParams& params) {
    const double c = 2.0 * params.gamma / std::sqrt(params.j);
    return 0.5 * params.omega * (y[1] * y[1] + y[0] * y[0]) + params.omega0 * y[4] +
           c * y[0] * y[2];
}

// Equations of motion in the cartesian chart:
//   dq = omega p                 djx = -omega0 jy
//   dp = -omega q - c jx         djy =  omega0 jx - c q jz
//                                djz =  c q jy
// with c = 2 gamma / sqrt(j). Equivalent to hamilton_rhs away from poles.
inline void cartesian_rhs(const ModelParams& params, double /*t*/, const double* y, double* dydt) {
    const double c = 2.0 * params.gamma / std::sqrt(params.j);
    dydt[0] = params.omega * y[1];
    dydt[1] = -params.omega * y[0] - c * y[2];
    dydt[2] = -params.omega0 * y[3];
    dydt[3] = params.omega0 * y[2] - c * y[0] * y[4];
    dydt[4] = c * y[0] * y[3];
}

// ---------------------------------------------- Poincare surface ----

// The section plane is p = 0. For given (E, jz, phi) the energy condition
// is a quadratic in q; the branch with the larger root,
//
//   q_plus = (-b + sqrt(b^2 - 2 omega c0)) / omega,
//   b  = 2 gamma sqrt(j) sqrt(1 - (jz/j)^2) cos(phi),
//   c0 = omega0 jz - E,
//
// is used throughout. Returns nothing when the point is outside the
// energy shell (negative discriminant).
inline std::optional<double> poincare_q_plus(double energy, double jz, double phi,
                                             const ModelParams& params) {
    if (std::abs(jz) > params.j) return std::nullopt;
    const double u = jz / params.j;
    const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
    const double b = 2.0 * params.gamma * std::sqrt(params.j) * s * std::cos(phi);
    const double c0 = params.omega0 * jz - energy;
    const double disc = b * b - 2.0 * params.omega * c0;
    if (disc < 0.0) return std::nullopt;
    return (-b + std::sqrt(disc)) / params.omega;
}

struct PoincareSurface {
    double energy = 0.0;  // absolute energy (not per j)

    // Phase point on the section for given (phi, jz/j); nullopt off shell.
    std::optional<PhasePoint> point_at(double phi, double jz_tilde, const ModelParams& params) const {
        const double jz = jz_tilde * params.j;
        const auto q = poincare_q_plus(energy, jz, phi, params);
        if (!q) return std::nullopt;
        return PhasePoint{*q, 0.0, jz, phi};
    }
};

}  // namespace dicke
