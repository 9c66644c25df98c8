#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <utility>
#include <vector>

#include "dicke/sp_analytic.hpp"
#include "oracles.hpp"

using namespace dicke;

namespace {

// two interleaved quadratic ladders, rank-paired with a fixed energy offset;
// dense enough that the analytic continuum formulas apply (see below)
Decomposition merged_ladders(double w_a, double w_b, double offset) {
    const Decomposition a = oracle::quadratic_ladder(-400.0, 0.8, -2e-5, 0.0, 80.0, 1001);
    const Decomposition b = oracle::quadratic_ladder(-400.0 + offset, 0.8, -2e-5, 0.0, 80.0, 1001);
    std::vector<std::pair<double, double>> ew;
    for (int k = 0; k < 1001; ++k) {
        ew.emplace_back(a.energies[k], w_a * a.weights[k]);
        ew.emplace_back(b.energies[k], w_b * b.weights[k]);
    }
    std::sort(ew.begin(), ew.end());
    Decomposition d;
    d.energies.resize(2002);
    d.weights.resize(2002);
    for (int k = 0; k < 2002; ++k) {
        d.energies[k] = ew[k].first;
        d.weights[k] = ew[k].second;
    }
    d.weights /= d.weights.sum();
    d.mean_energy = d.weights.dot(d.energies);
    d.energy_spread = std::sqrt(
        (d.energies.array() - d.mean_energy).square().matrix().dot(d.weights));
    d.participation_ratio = 1.0 / d.weights.squaredNorm();
    d.norm_captured = 1.0;
    d.capture_ratio = 1.0;
    return d;
}

}  // namespace

TEST_CASE("theta function matches direct summation") {
    for (int ix = 0; ix < 10; ++ix)
        for (int iy = 0; iy < 10; ++iy) {
            const double x = 2.0 * M_PI * ix / 10.0;
            const double y = 0.099 * iy;  // up to 0.891
            CHECK(std::abs(theta3(x, y) - oracle::theta3_direct(x, y)) < 1e-12);
        }
    CHECK(std::abs(theta3(1.3, 0.99) - oracle::theta3_direct(1.3, 0.99, 2000)) < 1e-12);
    CHECK(theta3(0.7, 0.0) == 1.0);
    CHECK_THROWS_AS(theta3(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(theta3(0.0, -0.1), std::invalid_argument);
}

TEST_CASE("a single Gaussian ladder is detected and refitted exactly") {
    const Decomposition d = oracle::quadratic_ladder(-12.0, 0.8, -0.003, 0.0, 1.8, 45);
    const SequenceSet ss = detect_sequences(d);
    REQUIRE(ss.structured);
    REQUIRE(ss.sequences.size() == 1);
    const GaussianSequence& s = ss.sequences[0];

    CHECK(s.r_squared > 0.999999);
    CHECK(std::abs(s.sigma - 1.8) < 1e-6);
    CHECK(std::abs(s.mean_energy) < 1e-6);
    CHECK(std::abs(s.e2 - (-0.003)) < 1e-10);
    // local spacing at the envelope center, and the seed that found it
    CHECK(std::abs(s.omega1 - ss.omega1_seed) < 0.1 * s.omega1);
    CHECK(s.omega1 > 0.6);
    CHECK(s.omega1 < 0.8);
    CHECK(std::abs(s.decay_time() - s.omega1 / (0.003 * s.sigma)) < 1e-6 * s.decay_time());
    CHECK(ss.residual_weight < 1e-3);
}

TEST_CASE("single-sequence formula tracks the exact survival through decay") {
    // the theta-function form rests on a continuum approximation of the level
    // sum, so the oracle ladder must be dense: many levels per envelope width
    // and a plateau well below the tolerance, otherwise the fractional
    // revivals of the discrete ladder (which the formula deliberately drops)
    // show up as O(plateau) deviations inside the compared window
    const Decomposition d = oracle::quadratic_ladder(-400.0, 0.8, -2e-5, 0.0, 80.0, 1001);
    const SequenceSet ss = detect_sequences(d);
    REQUIRE(ss.sequences.size() == 1);
    const GaussianSequence& s = ss.sequences[0];

    // sum of weights squared is the theta-formula plateau in the dense limit
    CHECK(std::abs(s.plateau() - sp_infinite_time_average(d)) < 0.02 * s.plateau());
    CHECK(std::abs(sp_sequence(s, 0.0) - 1.0) < 0.02);

    const double td = s.decay_time();
    double max_dev = 0.0;
    for (int i = 0; i <= 900; ++i) {
        const double t = 3.0 * td * i / 900.0;
        max_dev = std::max(
            max_dev, std::abs(sp_sequence(s, t) - oracle::sp_direct(d.energies, d.weights, t)));
    }
    CHECK(max_dev < 1e-2);
}

TEST_CASE("two offset ladders separate and their interference closes the gap") {
    const double offset = 0.32;
    const Decomposition d = merged_ladders(0.65, 0.35, offset);
    const SequenceSet ss = detect_sequences(d);
    REQUIRE(ss.structured);
    REQUIRE(ss.sequences.size() == 2);
    for (const GaussianSequence& s : ss.sequences) {
        CHECK(s.r_squared > 0.99);
        CHECK(std::abs(s.sigma - 80.0) < 0.1);
    }
    const double w0 = ss.sequences[0].total_weight;
    const double w1 = ss.sequences[1].total_weight;
    CHECK(std::abs(std::max(w0, w1) - 0.65) < 0.02);
    CHECK(std::abs(std::min(w0, w1) - 0.35) < 0.02);

    // rank pairing recovers the offset modulo one ladder spacing
    const InterferencePair pair = make_interference_pair(ss, 0, 1);
    const double mismatch = std::remainder(std::abs(pair.delta_e) - offset, pair.omega_ij);
    CHECK(std::abs(mismatch) < 1e-2);

    const double td = std::min(ss.sequences[0].decay_time(), ss.sequences[1].decay_time());
    Eigen::VectorXd times(601);
    for (int i = 0; i <= 600; ++i) times[i] = 2.0 * td * i / 600.0;
    const AnalyticSP total = sp_analytic(ss, times);
    REQUIRE(total.labels.size() == 3);  // two sequences, one pair
    double mad = 0.0, max_dev = 0.0;
    for (int i = 0; i <= 600; ++i) {
        const double dev =
            std::abs(total.series.sp[i] - oracle::sp_direct(d.energies, d.weights, times[i]));
        mad += dev;
        max_dev = std::max(max_dev, dev);
    }
    mad /= 601.0;
    CHECK(mad < 0.01);
    CHECK(max_dev < 0.08);

    // without the interference rows the same comparison fails
    double mad_seq_only = 0.0;
    for (int i = 0; i <= 600; ++i) {
        const double seq_sum = total.terms(0, i) + total.terms(1, i);
        mad_seq_only +=
            std::abs(seq_sum - oracle::sp_direct(d.energies, d.weights, times[i]));
    }
    mad_seq_only /= 601.0;
    CHECK(mad_seq_only > 3.0 * mad);
}

TEST_CASE("sequence cap keeps the heaviest fits") {
    const Decomposition d = merged_ladders(0.65, 0.35, 0.32);
    DetectOptions opts;
    opts.m_override = 1;
    const SequenceSet ss = detect_sequences(d, opts);
    REQUIRE(ss.sequences.size() == 1);
    CHECK(ss.n_discarded_sequences >= 1);
    CHECK(std::abs(ss.sequences[0].total_weight - 0.65) < 0.02);
}

TEST_CASE("disorganized spectra are flagged unstructured") {
    Decomposition d;
    d.energies = oracle::poisson_levels(150, 41, 0.5);
    d.weights.resize(150);
    std::uint64_t state = 97;
    for (int k = 0; k < 150; ++k) d.weights[k] = 0.5 + oracle::uniform(state);
    d.weights /= d.weights.sum();
    d.participation_ratio = 1.0 / d.weights.squaredNorm();
    d.energy_spread = 10.0;

    const SequenceSet ss = detect_sequences(d);
    CHECK_FALSE(ss.structured);
    Eigen::VectorXd times(4);
    for (int i = 0; i < 4; ++i) times[i] = i;
    CHECK_THROWS_AS(sp_analytic(ss, times), unstructured_error);
}

TEST_CASE("detection needs components and distinct energies") {
    Decomposition few;
    few.energies.resize(5);
    few.weights.resize(5);
    for (int k = 0; k < 5; ++k) {
        few.energies[k] = k;
        few.weights[k] = 0.2;
    }
    CHECK_THROWS_AS(detect_sequences(few), unstructured_error);

    Decomposition flat;
    flat.energies = Eigen::VectorXd::Constant(12, 3.0);
    flat.weights = Eigen::VectorXd::Constant(12, 1.0 / 12.0);
    CHECK_THROWS_AS(detect_sequences(flat), unstructured_error);

    const Decomposition d = oracle::quadratic_ladder(-12.0, 0.8, -0.003, 0.0, 1.8, 45);
    DetectOptions bad;
    bad.min_members = 2;
    CHECK_THROWS_AS(detect_sequences(d, bad), std::invalid_argument);
}

TEST_CASE("unfitted sequences cannot be evaluated") {
    GaussianSequence s;
    CHECK_THROWS_AS(sp_sequence(s, 1.0), std::invalid_argument);
}
