#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <doctest.h>

#include "affest/asymptotics.hpp"
#include "affest/errors.hpp"
#include "affest/json_io.hpp"
#include "affest/model.hpp"

using namespace affest;

namespace {

// Moments of a random discrete law on (0, inf) x R. Any such law satisfies
// the Cauchy-Schwarz inequalities, so the draws exercise generic valid inputs.
StationaryMoments random_moments(std::mt19937_64& gen, double x_shift) {
    std::lognormal_distribution<double> ly(0.0, 0.7);
    std::normal_distribution<double> nx(x_shift, 1.0);
    std::uniform_real_distribution<double> uw(0.1, 1.0);
    const int k = 12;
    std::vector<double> y(k), x(k), w(k);
    double wsum = 0.0;
    for (int i = 0; i < k; ++i) {
        y[i] = ly(gen);
        x[i] = nx(gen);
        w[i] = uw(gen);
        wsum += w[i];
    }
    double m[9] = {};
    for (int i = 0; i < k; ++i) {
        const double p = w[i] / wsum;
        m[0] += p * y[i];
        m[1] += p * x[i];
        m[2] += p * y[i] * y[i];
        m[3] += p * x[i] * y[i];
        m[4] += p * x[i] * x[i];
        m[5] += p * x[i] * x[i] * y[i];
        m[6] += p / y[i];
        m[7] += p * x[i] / y[i];
        m[8] += p * x[i] * x[i] / y[i];
    }
    return make_moments(m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8]);
}

StationaryMoments reflect(const StationaryMoments& s) {
    return make_moments(s.ey.value, -s.ex.value, s.ey2.value, -s.exy.value, s.ex2.value, s.ex2y.value,
                        s.e_inv_y.value, -s.ex_over_y.value, s.ex2_over_y.value);
}

}  // namespace

TEST_CASE("sigma_mle examples") {
    // e_inv_y * ey - 1 = 1 with ey = 2, e_inv_y = 1.
    const StationaryMoments mom = make_moments(2, 0, 5, 0, 1, 2, 1, 0, 3);
    const MleCovariance c = sigma_mle(mom);
    Eigen::Matrix2d s1;
    s1 << 2, 1, 1, 1;
    CHECK((c.sigma.block<2, 2>(0, 0) - s1).cwiseAbs().maxCoeff() < 1e-15);
    // ex_over_y = 0 makes the (m, theta) block diagonal.
    CHECK(c.sigma(2, 2) == doctest::Approx(3.0 / (1.0 * 3.0)));
    CHECK(c.sigma(3, 3) == doctest::Approx(1.0 / 3.0));
    CHECK(c.sigma(2, 3) == 0.0);
    CHECK(c.sigma.block<2, 2>(0, 2).isZero(0.0));
    CHECK(c.sigma.block<2, 2>(2, 0).isZero(0.0));
    // The bound of the known-m variance is tight here.
    CHECK(mle_theta_variance(mom) == doctest::Approx(c.sigma(3, 3)));
}

TEST_CASE("sigma_mle needs every moment") {
    try {
        sigma_mle(stationary_moments_closed({1, 1, 1, 1}));
        FAIL("expected DegenerateMoments");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateMoments);
    }
    // e_inv_y * ey = 1 is the degenerate boundary.
    CHECK_THROWS_AS(sigma_mle(make_moments(1, 0, 2, 0, 1, 2, 1, 0, 3)), Error);
}

TEST_CASE("sigma_lse examples") {
    const StationaryMoments closed = stationary_moments_closed({1, 1, 1, 1});
    const LseCovariance c = sigma_lse(closed);
    CHECK(c.sigma(0, 0) == doctest::Approx(11.0 / 3.0).epsilon(1e-14));
    CHECK(c.sigma(0, 1) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(c.sigma(1, 0) == c.sigma(0, 1));
    CHECK(c.sigma(1, 1) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(lse_theta_variance(closed) == doctest::Approx(20.0 / 27.0).epsilon(1e-14));

    // m = 0 leaves ey on the m-diagonal and decouples the entries.
    const StationaryMoments zero = stationary_moments_closed({1.5, 0.7, 0, 1.3});
    const LseCovariance z = sigma_lse(zero);
    CHECK(z.sigma(0, 0) == doctest::Approx(zero.ey.value).epsilon(1e-14));
    CHECK(z.sigma(0, 1) == 0.0);
    CHECK(z.sigma(1, 1) == doctest::Approx(zero.ex2y.value / (zero.ex2.value * zero.ex2.value)).epsilon(1e-14));

    CHECK_THROWS_AS(sigma_lse(make_moments(1, 1, 2, 1, 1, 2, 2, 1, 2)), Error);
}

TEST_CASE("sigma_lse off-diagonal flips sign under m -> -m") {
    for (double m : {0.3, 1.0, 2.5}) {
        const LseCovariance up = sigma_lse(stationary_moments_closed({1, 1, m, 1}));
        const LseCovariance dn = sigma_lse(stationary_moments_closed({1, 1, -m, 1}));
        CHECK(up.sigma(0, 1) == doctest::Approx(-dn.sigma(0, 1)).epsilon(1e-14));
        CHECK(up.sigma(0, 0) == doctest::Approx(dn.sigma(0, 0)).epsilon(1e-14));
        CHECK(up.sigma(1, 1) == doctest::Approx(dn.sigma(1, 1)).epsilon(1e-14));
    }
    std::mt19937_64 gen(41);
    const StationaryMoments r = random_moments(gen, 0.8);
    CHECK(sigma_lse(r).sigma(0, 1) == doctest::Approx(-sigma_lse(reflect(r)).sigma(0, 1)).epsilon(1e-12));
}

TEST_CASE("sigma_lse equals the sandwich form of the martingale representation") {
    // sqrt(T)(LSE - truth) ~ A^-1 N(0, V) with A the limit of the normal
    // matrix and V the limit quadratic variation of the noise vector.
    std::mt19937_64 gen(42);
    for (int k = 0; k < 200; ++k) {
        const StationaryMoments s = random_moments(gen, 0.5 * (k % 5));
        Eigen::Matrix2d A, V;
        A << 1.0, -s.ex.value, -s.ex.value, s.ex2.value;
        V << s.ey.value, -s.exy.value, -s.exy.value, s.ex2y.value;
        const Eigen::Matrix2d Ai = A.inverse();
        const Eigen::Matrix2d want = Ai * V * Ai.transpose();
        const Eigen::Matrix2d got = sigma_lse(s).sigma;
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9 * want.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("sigma_mle blocks equal A D A^T") {
    std::mt19937_64 gen(43);
    for (int k = 0; k < 200; ++k) {
        const StationaryMoments s = random_moments(gen, 0.5 * (k % 5));
        const double ey = s.ey.value, ei = s.e_inv_y.value, xo = s.ex_over_y.value, x2o = s.ex2_over_y.value;
        Eigen::Matrix2d B1, D1, B2, D2;
        B1 << -1, ey, -ei, 1;
        D1 << ey, 1, 1, ei;
        B2 << -xo, x2o, -ei, xo;
        D2 << x2o, xo, xo, ei;
        const Eigen::Matrix2d A1 = B1 / (ei * ey - 1);
        const Eigen::Matrix2d A2 = B2 / (ei * x2o - xo * xo);
        const Eigen::Matrix4d sigma = sigma_mle(s).sigma;
        const Eigen::Matrix2d s1 = A1 * D1 * A1.transpose();
        const Eigen::Matrix2d s2 = A2 * D2 * A2.transpose();
        CHECK((sigma.block<2, 2>(0, 0) - s1).cwiseAbs().maxCoeff() < 1e-12 * s1.cwiseAbs().maxCoeff());
        CHECK((sigma.block<2, 2>(2, 2) - s2).cwiseAbs().maxCoeff() < 1e-12 * s2.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("covariances are symmetric and positive semidefinite") {
    std::mt19937_64 gen(44);
    for (int k = 0; k < 200; ++k) {
        const StationaryMoments s = random_moments(gen, 0.4 * (k % 6));
        REQUIRE(moment_invariant_violations(s).empty());
        const Eigen::Matrix4d m = sigma_mle(s).sigma;
        const Eigen::Matrix2d l = sigma_lse(s).sigma;
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(l(0, 1) == l(1, 0));
        CHECK(m.llt().info() == Eigen::Success);
        CHECK(l.ldlt().info() == Eigen::Success);
        CHECK(l.ldlt().isPositive());
    }
}

TEST_CASE("variance orderings") {
    std::mt19937_64 gen(45);
    int strict_gap = 0;
    for (int k = 0; k < 100; ++k) {
        const StationaryMoments s = random_moments(gen, 0.3 * (k % 7));
        const OrderingReport r = variance_orderings(s);
        CHECK(r.at("mle_known_m_vs_joint").holds);
        CHECK(r.at("mle_vs_lse_known_m").holds);
        CHECK(r.at("mle_known_m_vs_joint").lhs == doctest::Approx(mle_theta_variance(s)));
        CHECK(r.at("mle_vs_lse_known_m").rhs == doctest::Approx(lse_theta_variance(s)));
        CHECK(r.at("lse_known_m_vs_joint_22").rhs == doctest::Approx(sigma_lse(s).sigma(1, 1)));
        CHECK(r.at("lse_known_m_vs_joint_11").rhs == doctest::Approx(sigma_lse(s).sigma(0, 0)));
        strict_gap += r.at("mle_known_m_vs_joint").margin > 0.0;
    }
    CHECK(strict_gap == 100);
    CHECK_THROWS_AS(variance_orderings(make_moments(2, 0, 5, 0, 1, 2, 1, 0, 3)).at("nope"), Error);
}

TEST_CASE("ordering (i) is tight when E(X/Y) = 0") {
    const OrderingReport r = variance_orderings(make_moments(2, 0, 5, 0, 1.5, 4, 1, 0, 3));
    const OrderingCheck& c = r.at("mle_known_m_vs_joint");
    CHECK(c.holds);
    CHECK(std::abs(c.margin) < 1e-14);
    CHECK_FALSE(c.strict);
}

TEST_CASE("moments_by_simulation at (1,1,1,1)") {
    const SimulatedMoments sim = moments_by_simulation({1, 1, 1, 1}, MomentSimulationOptions{}, {46, 0});
    const StationaryMoments& s = sim.moments;
    CHECK(s.complete());
    CHECK(sim.warnings.empty());
    CHECK(s.ey.source == Provenance::Simulated);
    CHECK(s.ey.reference == doctest::Approx(1.0));
    CHECK(std::isnan(s.ex_over_y.reference));
    CHECK(s.ex2_over_y.std_error > 0.0);
    CHECK(std::abs(s.ey.value - 1.0) < 0.02);
    CHECK(std::abs(s.ex2.value / 1.5 - 1.0) < 0.03);
    CHECK(std::abs(s.ex2y.value / (5.0 / 3.0) - 1.0) < 0.05);
    CHECK(std::abs(s.e_inv_y.value / 2.0 - 1.0) < 0.03);
    CHECK(moment_invariant_violations(s).empty());

    const Json j = to_json(sigma_mle(s), s);
    CHECK(j.at("sigma").size() == 4);
    CHECK(j.at("moments").at("ex2_over_y").at("source") == "simulated");
}

TEST_CASE("moments_by_simulation with m = 0 centres E(X/Y)") {
    const SimulatedMoments sim = moments_by_simulation({1.5, 1, 0, 1}, MomentSimulationOptions{}, {47, 0});
    const MomentValue& v = sim.moments.ex_over_y;
    CHECK(std::abs(v.value) < 4 * v.std_error);
    CHECK(std::abs(sim.moments.ex.value) < 4 * sim.moments.ex.std_error);
}

TEST_CASE("moments_by_simulation warns below a = 1/2") {
    MomentSimulationOptions opt;
    opt.t_total = 200;
    const SimulatedMoments sim = moments_by_simulation({0.4, 1, 0, 1}, opt, {48, 0});
    CHECK_FALSE(sim.warnings.empty());
    CHECK_THROWS_AS(moments_by_simulation({1, 0, 0, 1}, opt, {48, 0}), Error);
}
