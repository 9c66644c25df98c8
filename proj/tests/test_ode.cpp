#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dicke/ode.hpp"
#include "oracles.hpp"

using dicke::ode::Dop853;

namespace {

struct Decay {
    void operator()(double, const double* y, double* dydt) const { dydt[0] = -y[0]; }
};

struct Harmonic {
    double omega = 1.0;
    void operator()(double, const double* y, double* dydt) const {
        dydt[0] = y[1];
        dydt[1] = -omega * omega * y[0];
    }
};

struct VanDerPol {
    double mu = 2.0;
    void operator()(double, const double* y, double* dydt) const {
        dydt[0] = y[1];
        dydt[1] = mu * (1.0 - y[0] * y[0]) * y[1] - y[0];
    }
};

}  // namespace

TEST_CASE("integrator reproduces exponential decay to tolerance") {
    Dop853<1, Decay> s(Decay{}, 1e-12, 1e-12);
    s.init(0.0, {1.0});
    while (s.t() < 10.0) s.step(10.0);
    CHECK(s.t() == 10.0);
    CHECK(std::abs(s.y()[0] - std::exp(-10.0)) < 1e-12);
    CHECK(s.stats().n_steps > 0);
    CHECK(s.stats().n_rhs > 0);
}

TEST_CASE("harmonic oscillator stays on its energy shell over long times") {
    Dop853<2, Harmonic> s(Harmonic{2.0}, 1e-13, 1e-13);
    s.init(0.0, {1.0, 0.0});
    const double e0 = 0.5 * (s.y()[1] * s.y()[1] + 4.0 * s.y()[0] * s.y()[0]);
    while (s.t() < 1000.0) s.step(1000.0);
    const double e1 = 0.5 * (s.y()[1] * s.y()[1] + 4.0 * s.y()[0] * s.y()[0]);
    CHECK(std::abs(e1 - e0) / e0 < 1e-10);
    // phase accuracy: x(t) = cos(2t)
    CHECK(std::abs(s.y()[0] - std::cos(2000.0)) < 1e-6);
}

TEST_CASE("dense output interpolates interior points to high order") {
    Dop853<1, Decay> s(Decay{}, 1e-10, 1e-10);
    s.init(0.0, {1.0});
    std::uint64_t state = 7;
    while (s.t() < 5.0) {
        s.step(5.0);
        s.prepare_dense();
        for (int probe = 0; probe < 5; ++probe) {
            const double t = s.t_prev() + (s.t() - s.t_prev()) * oracle::uniform(state);
            CHECK(std::abs(s.dense_component(0, t) - std::exp(-t)) < 1e-9);
        }
    }
}

TEST_CASE("dense output of the oscillator matches the closed form") {
    Dop853<2, Harmonic> s(Harmonic{1.0}, 1e-11, 1e-11);
    s.init(0.0, {0.0, 1.0});  // x = sin t
    std::uint64_t state = 19;
    while (s.t() < 20.0) {
        s.step(20.0);
        s.prepare_dense();
        for (int probe = 0; probe < 3; ++probe) {
            const double t = s.t_prev() + (s.t() - s.t_prev()) * oracle::uniform(state);
            const auto y = s.dense_state(t);
            CHECK(std::abs(y[0] - std::sin(t)) < 1e-8);
            CHECK(std::abs(y[1] - std::cos(t)) < 1e-8);
        }
    }
}

TEST_CASE("step never overshoots the requested end time") {
    Dop853<2, VanDerPol> s(VanDerPol{}, 1e-9, 1e-9);
    s.init(0.0, {2.0, 0.0});
    while (s.t() < 30.0) {
        const double t = s.step(30.0);
        CHECK(t <= 30.0);
        CHECK(t > s.t_prev());
    }
    CHECK(s.t() == 30.0);
    CHECK(std::isfinite(s.y()[0]));
}

TEST_CASE("tighter tolerances cost more steps and gain accuracy") {
    const auto run = [](double tol) {
        Dop853<2, Harmonic> s(Harmonic{1.0}, tol, tol);
        s.init(0.0, {1.0, 0.0});
        while (s.t() < 50.0) s.step(50.0);
        return std::make_pair(std::abs(s.y()[0] - std::cos(50.0)), s.stats().n_steps);
    };
    const auto [err_loose, steps_loose] = run(1e-6);
    const auto [err_tight, steps_tight] = run(1e-12);
    CHECK(err_tight < err_loose);
    CHECK(steps_tight > steps_loose);
    CHECK(err_tight < 1e-10);
}

TEST_CASE("time-mirrored field retraces the forward trajectory") {
    struct Mirrored {
        void operator()(double, const double* y, double* dydt) const {
            dydt[0] = -y[1];
            dydt[1] = y[0];  // reversed harmonic flow
        }
    };
    Dop853<2, Harmonic> fwd(Harmonic{1.0}, 1e-12, 1e-12);
    fwd.init(0.0, {0.7, -0.2});
    while (fwd.t() < 12.0) fwd.step(12.0);
    Dop853<2, Mirrored> back(Mirrored{}, 1e-12, 1e-12);
    back.init(0.0, fwd.y());
    while (back.t() < 12.0) back.step(12.0);
    CHECK(std::abs(back.y()[0] - 0.7) < 1e-9);
    CHECK(std::abs(back.y()[1] + 0.2) < 1e-9);
}

TEST_CASE("integration refuses a backwards target") {
    Dop853<1, Decay> s(Decay{}, 1e-10, 1e-10);
    s.init(5.0, {1.0});
    CHECK_THROWS_AS(s.step(1.0), std::invalid_argument);
}
