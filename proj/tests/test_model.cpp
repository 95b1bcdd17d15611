#include <cmath>
#include <complex>
#include <random>
#include <string>

#include <doctest.h>

#include "affest/errors.hpp"
#include "affest/model.hpp"

using namespace affest;

namespace {

// Solution of v' = -b v - v^2/2, v(0) = l1 (Bernoulli equation, u = 1/v).
double logistic_v(double b, double l1, double t) {
    return l1 * std::exp(-b * t) / (1.0 + l1 * (1.0 - std::exp(-b * t)) / (2.0 * b));
}

ModelParams random_subcritical(std::mt19937_64& gen, double a_min) {
    std::uniform_real_distribution<double> ua(a_min, 3.0), ub(0.2, 3.0), um(-2.0, 2.0);
    return {ua(gen), ub(gen), um(gen), ub(gen)};
}

}  // namespace

TEST_CASE("validate rejects a <= 0 and non-finite fields") {
    CHECK_NOTHROW(validate(ModelParams{1, -1, 2, -3}));
    CHECK_THROWS_AS(validate(ModelParams{0, 1, 0, 1}), Error);
    CHECK_THROWS_AS(validate(ModelParams{1, NAN, 0, 1}), Error);
    CHECK_THROWS_AS(validate(ModelParams{1, 1, INFINITY, 1}), Error);
}

TEST_CASE("classify examples") {
    CHECK(classify({1, 1, 0, 1}) == Criticality::Subcritical);
    CHECK(classify({1, 0, 0, 0}) == Criticality::Critical);
    CHECK(classify({1, 2, 0, -0.1}) == Criticality::Supercritical);
}

TEST_CASE("classify matches the sign table") {
    const double signs[] = {-1.0, 0.0, 1.0};
    for (double b : signs) {
        for (double th : signs) {
            const Criticality c = classify({1.0, b, 0.0, th});
            if (b > 0 && th > 0) {
                CHECK(c == Criticality::Subcritical);
            } else if (b < 0 || th < 0) {
                CHECK(c == Criticality::Supercritical);
            } else {
                CHECK(c == Criticality::Critical);
            }
        }
    }
}

TEST_CASE("require_subcritical throws NotSubcritical") {
    try {
        require_subcritical({1, 0, 0, 1}, "test");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotSubcritical);
    }
}

TEST_CASE("mean_at examples") {
    auto [ey, ex] = mean_at({2, 0, 0, 0}, 1.0, 0.0, 3.0);
    CHECK(ey == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(ex == 0.0);

    auto [ey0, ex0] = mean_at({1, 1, 1, 1}, 0.7, -0.3, 0.0);
    CHECK(ey0 == 0.7);
    CHECK(ex0 == -0.3);

    auto [eyl, exl] = mean_at({1, 1, 1, 1}, 0.0, 0.0, 60.0);
    CHECK(eyl == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(exl == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mean_at is continuous at b = 0 and theta = 0") {
    for (double t : {0.1, 1.0, 5.0}) {
        auto [y0, x0] = mean_at({1.3, 0.0, 0.7, 0.0}, 0.4, -0.2, t);
        auto [y1, x1] = mean_at({1.3, 1e-8, 0.7, 1e-8}, 0.4, -0.2, t);
        auto [y2, x2] = mean_at({1.3, -1e-8, 0.7, -1e-8}, 0.4, -0.2, t);
        CHECK(std::abs(y1 - y0) < 1e-6);
        CHECK(std::abs(x1 - x0) < 1e-6);
        CHECK(std::abs(y2 - y0) < 1e-6);
        CHECK(std::abs(x2 - x0) < 1e-6);
    }
}

TEST_CASE("closed-form stationary moments at (1,1,1,1)") {
    const StationaryMoments mom = stationary_moments_closed({1, 1, 1, 1});
    CHECK(mom.ey.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mom.ex.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mom.ey2.value == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(mom.exy.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mom.ex2.value == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(mom.ex2y.value == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    CHECK(mom.e_inv_y.value == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(mom.ey.source == Provenance::ClosedForm);
    CHECK_FALSE(mom.ex_over_y.available());
    CHECK_FALSE(mom.ex2_over_y.available());
    CHECK_FALSE(mom.complete());
}

TEST_CASE("closed-form moments with m = 0 and inverse moment availability") {
    const StationaryMoments mom = stationary_moments_closed({1, 2, 0, 1});
    CHECK(mom.ex.value == 0.0);
    CHECK(mom.exy.value == 0.0);

    const StationaryMoments low = stationary_moments_closed({0.5, 1, 0, 1});
    CHECK_FALSE(low.e_inv_y.available());
    CHECK_THROWS_AS(stationary_moments_closed({1, -1, 0, 1}), Error);
}

TEST_CASE("closed-form moments satisfy the stationary generator equations") {
    // E[Lf] = 0 for f = y^2, xy, x^2, x^2 y with
    // Lf = (a - b y) f_y + (m - theta x) f_x + y (f_yy + f_xx) / 2.
    std::mt19937_64 gen(11);
    for (int k = 0; k < 100; ++k) {
        const ModelParams p = random_subcritical(gen, 0.05);
        const StationaryMoments s = stationary_moments_closed(p);
        const double ey = s.ey.value, ex = s.ex.value, ey2 = s.ey2.value;
        const double exy = s.exy.value, ex2 = s.ex2.value, ex2y = s.ex2y.value;
        const double tol = 1e-12;
        CHECK(ey == doctest::Approx(p.a / p.b).epsilon(tol));
        CHECK(ex == doctest::Approx(p.m / p.theta).epsilon(tol));
        CHECK(ey2 == doctest::Approx((2 * p.a + 1) * ey / (2 * p.b)).epsilon(tol));
        CHECK(exy == doctest::Approx((p.a * ex + p.m * ey) / (p.b + p.theta)).epsilon(tol));
        CHECK(ex2 == doctest::Approx((2 * p.m * ex + ey) / (2 * p.theta)).epsilon(tol));
        CHECK(ex2y == doctest::Approx((p.a * ex2 + 2 * p.m * exy + ey2) / (p.b + 2 * p.theta))
                          .epsilon(tol));
    }
}

TEST_CASE("closed-form moments satisfy the strict moment inequalities") {
    std::mt19937_64 gen(12);
    for (int k = 0; k < 100; ++k) {
        const ModelParams p = random_subcritical(gen, 0.6);
        const auto violations = moment_invariant_violations(stationary_moments_closed(p));
        INFO("a=" << p.a << " b=" << p.b << " m=" << p.m << " theta=" << p.theta);
        INFO((violations.empty() ? std::string() : violations.front()));
        CHECK(violations.empty());
    }
}

TEST_CASE("moment_invariant_violations flags a broken inequality") {
    const StationaryMoments bad = make_moments(1, 0, 0.5, 0, 1, 1, 2, 0, 1);
    CHECK_FALSE(moment_invariant_violations(bad).empty());
}

TEST_CASE("riccati_v examples") {
    CHECK(riccati_v({1, 1, 0, 1}, 0.0, 0.0, 5.0) == 0.0);
    CHECK(riccati_v({1, 1, 0, 1}, 1.0, 0.0, 1.0) == doctest::Approx(0.27953084438895875).epsilon(1e-9));
}

TEST_CASE("riccati_v matches the logistic closed form over [0, 10]") {
    for (double b : {0.5, 1.0, 2.5}) {
        for (double l1 : {0.1, 1.0, 4.0}) {
            for (double t = 0.0; t <= 10.0; t += 0.5) {
                const double v = riccati_v({1, b, 0, 1}, l1, 0.0, t);
                CHECK(std::abs(v - logistic_v(b, l1, t)) < 1e-8);
            }
        }
    }
}

TEST_CASE("riccati_v rejects negative lambda1 and a coarse step") {
    CHECK_THROWS_AS(riccati_v({1, 1, 0, 1}, -1.0, 0.0, 1.0), Error);
    try {
        // A stiff quadratic term with a coarse step drives RK4 below zero.
        riccati_v({1, 1, 0, 1}, 1000.0, 0.0, 1.0, RiccatiOptions{0.5, 1e-10});
        FAIL("expected StepTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StepTooLarge);
    }
}

TEST_CASE("stationary_char examples") {
    const CharResult one = stationary_char({1, 1, 0, 1}, 0.0, 0.0);
    CHECK(std::abs(one.value - std::complex<double>(1.0, 0.0)) < 1e-15);

    const CharResult q = stationary_char({1, 1, 0, 1}, 2.0, 0.0);
    CHECK(std::abs(q.value.real() - 0.25) < 1e-6);
    CHECK(q.value.imag() == 0.0);
    CHECK(q.tail_bound <= 1e-7);
}

TEST_CASE("stationary_char reproduces the Gamma Laplace transform") {
    std::mt19937_64 gen(13);
    for (int k = 0; k < 5; ++k) {
        const ModelParams p = random_subcritical(gen, 0.2);
        for (double l1 : {0.1, 1.0, 5.0}) {
            const double expected = std::pow(1.0 + l1 / (2 * p.b), -2 * p.a);
            const double got = stationary_char(p, l1, 0.0).value.real();
            CHECK(std::abs(got / expected - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("stationary_char has modulus at most one in lambda2") {
    for (double l2 : {-4.0, -1.0, 0.3, 1.0, 2.0, 6.0}) {
        const CharResult r = stationary_char({1.5, 0.8, 0.4, 1.2}, 0.0, l2);
        CHECK(std::abs(r.value) <= 1.0 + 1e-12);
    }
}

TEST_CASE("stationary_char phase carries the mean of X") {
    // v is real, so the phase comes only from the mean of X.
    const ModelParams p{1, 1, 0.6, 2};
    const CharResult r = stationary_char(p, 0.0, 0.5);
    CHECK(std::arg(r.value) == doctest::Approx(0.3 * 0.5).epsilon(1e-12));
}

TEST_CASE("derivative of the transform at zero equals E(Y)") {
    const ModelParams p{1.2, 0.9, 0.0, 1.1};
    const double h = 1e-5;
    // One-sided in lambda1 (the transform is defined for lambda1 >= 0), so
    // use the centred difference about h.
    const double d = (stationary_char(p, 0.0, 0.0).value.real() -
                      stationary_char(p, 2 * h, 0.0).value.real()) /
                     (2 * h);
    CHECK(std::abs(d / (p.a / p.b) - 1.0) < 1e-4);
}

TEST_CASE("stationary_char requires a long enough truncation") {
    try {
        stationary_char({1, 1, 0, 1}, 1.0, 0.0, CharOptions{0.5, 1e-3, 1e-7});
        FAIL("expected TruncationTooShort");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TruncationTooShort);
    }
    CHECK_THROWS_AS(stationary_char({1, 0, 0, 1}, 1.0, 0.0), Error);
}
