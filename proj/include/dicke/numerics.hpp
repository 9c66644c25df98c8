#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

// Small numeric helpers shared across the library: scalar minimization,
// polynomial least squares, rank statistics and a counter-based RNG stream
// used to derive independent per-task seeds.

namespace dicke {

// ---------------------------------------------------------------- rng ----

// splitmix64; passes through the full 64-bit state space, good enough to
// decorrelate per-point seeds derived from (global seed, point index).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic per-index substream seed.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) {
    return splitmix64(global_seed ^ splitmix64(index + 1));
}

// FNV-1a over a byte range; used for cache checksums and artifact hashes.
inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

// ------------------------------------------------------- minimization ----

// Golden-section minimum of a unimodal function on [a, b], with one final
// parabolic refinement. Shrinking the bracket below ~sqrt(eps) is useless
// (function differences there are rounding noise), so the bracket phase
// stops at 1e-5 relative and the vertex of a parabola through three points
// of the remaining bracket supplies the extra digits.
template <class F>
double golden_section_min(F&& f, double a, double b, double xtol = 1e-14, int max_iter = 200) {
    if (!(a < b)) throw std::invalid_argument("golden_section_min: need a < b");
    const double invphi  = 0.5 * (std::sqrt(5.0) - 1.0);
    const double invphi2 = 1.0 - invphi;
    const double width = std::max(xtol, 1e-5) * (1.0 + std::abs(a) + std::abs(b));
    double x1 = a + invphi2 * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > width; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = a + invphi2 * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    const double xm = 0.5 * (a + b);
    const double h = 0.25 * (b - a);
    if (h <= 0.0) return xm;
    const double fl = f(xm - h), fm = f(xm), fr = f(xm + h);
    const double curvature = fl - 2.0 * fm + fr;
    if (curvature > 0.0) {
        const double v = xm - 0.5 * h * (fr - fl) / curvature;
        if (std::abs(v - xm) <= h) return v;
    }
    if (fm <= fl && fm <= fr) return xm;
    return fl < fr ? xm - h : xm + h;
}

// Bisection root of a continuous function with a sign change on [a, b].
template <class F>
double bisect_root(F&& f, double a, double b, double fa, double fb, int iters = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw std::invalid_argument("bisect_root: no sign change on the bracket");
    for (int i = 0; i < iters; ++i) {
        double m = 0.5 * (a + b);
        if (m == a || m == b) break;  // interval collapsed to adjacent doubles
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m; fa = fm;
        } else {
            b = m; fb = fm;
        }
    }
    return 0.5 * (a + b);
}

// ------------------------------------------------------ least squares ----

// Ordinary or weighted polynomial least squares, y ~ sum_k c_k x^k.
// x is affinely rescaled to [-1, 1] internally for conditioning; the
// returned functor evaluates the fit at original coordinates.
struct PolyFit {
    Eigen::VectorXd coeffs;   // in the scaled variable
    double x_center = 0.0;
    double x_half = 1.0;
    int degree = 0;

    double operator()(double x) const {
        const double u = (x - x_center) / x_half;
        double acc = 0.0;
        for (int k = degree; k >= 0; --k) acc = acc * u + coeffs[k];
        return acc;
    }
};

inline PolyFit poly_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree,
                        const Eigen::VectorXd* weights = nullptr) {
    const auto n = x.size();
    if (n != y.size()) throw std::invalid_argument("poly_fit: x/y size mismatch");
    if (degree < 0 || n < degree + 1) throw std::invalid_argument("poly_fit: too few points for degree");
    PolyFit fit;
    fit.degree = degree;
    const double lo = x.minCoeff(), hi = x.maxCoeff();
    fit.x_center = 0.5 * (lo + hi);
    fit.x_half = (hi > lo) ? 0.5 * (hi - lo) : 1.0;
    Eigen::MatrixXd design(n, degree + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = (x[i] - fit.x_center) / fit.x_half;
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            design(i, k) = p;
            p *= u;
        }
    }
    Eigen::VectorXd rhs = y;
    if (weights) {
        if (weights->size() != n) throw std::invalid_argument("poly_fit: weight size mismatch");
        Eigen::VectorXd sw = weights->array().sqrt();
        design.array().colwise() *= sw.array();
        rhs.array() *= sw.array();
    }
    fit.coeffs = design.colPivHouseholderQr().solve(rhs);
    return fit;
}

// -------------------------------------------------------- statistics ----

// Average ranks (1-based, ties get the mean rank), as used by Spearman.
inline Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
    const auto n = v.size();
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    Eigen::VectorXd ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("pearson: need two equal-length series with >= 2 entries");
    const double ma = a.mean(), mb = b.mean();
    Eigen::ArrayXd da = a.array() - ma, db = b.array() - mb;
    const double va = (da * da).sum(), vb = (db * db).sum();
    if (va == 0.0 || vb == 0.0) return 0.0;
    return (da * db).sum() / std::sqrt(va * vb);
}

inline double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return pearson(average_ranks(a), average_ranks(b));
}

}  // namespace dicke
