#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracvisco/errors.hpp"
#include "fracvisco/specfun.hpp"

using namespace fracvisco;
using specfun::mittag_leffler;

namespace {

struct Ref {
    double a, b, z, value;
};

// Arbitrary-precision values (series and integral representation, cross-checked).
const Ref kReference[] = {
#include "oracle/ml_reference.inc"
};

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

}  // namespace

TEST_CASE("gamma and reciprocal gamma") {
    CHECK(specfun::gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-15));
    CHECK(specfun::gamma_fn(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-15));
    CHECK_THROWS_AS(specfun::gamma_fn(0.0), DomainError);
    CHECK_THROWS_AS(specfun::gamma_fn(-3.0), DomainError);
    CHECK(specfun::rgamma(0.0) == 0.0);
    CHECK(specfun::rgamma(-2.0) == 0.0);
    CHECK(specfun::rgamma(0.5) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-15));
    // Reflection on the negative axis.
    const double x = -150.5;
    const double want = std::sin(std::numbers::pi * x) * std::tgamma(1.0 - x) / std::numbers::pi;
    CHECK(specfun::rgamma(x) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(specfun::MLParams(0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(specfun::MLParams(-0.5, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(mittag_leffler(0.5, std::nan(""), 1.0), DomainError);
    CHECK_THROWS_AS(mittag_leffler(0.5, 1.0, INFINITY), DomainError);
}

TEST_CASE("reference table") {
    double worst = 0.0;
    for (const Ref& r : kReference) {
        const double got = mittag_leffler(r.a, r.b, r.z);
        const double e = rel(got, r.value);
        worst = std::max(worst, e);
        INFO("a=" << r.a << " b=" << r.b << " z=" << r.z << " got=" << got << " want=" << r.value);
        CHECK(e < 1e-10);
    }
    MESSAGE("worst relative error over table: " << worst);
}

TEST_CASE("elementary special cases") {
    for (double z = -10.0; z <= 3.0; z += 0.25) {
        CHECK(rel(mittag_leffler(1.0, 1.0, z), std::exp(z)) < 1e-12);
        CHECK(rel(mittag_leffler(2.0, 1.0, -z * z), std::cos(z)) < 1e-9);
        if (z != 0.0) CHECK(rel(mittag_leffler(1.0, 2.0, z), std::expm1(z) / z) < 1e-12);
        CHECK(rel(mittag_leffler(0.5, 1.0, z), std::exp(z * z) * std::erfc(-z)) < 1e-10);
    }
}

TEST_CASE("value at zero is 1/Gamma(b)") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(0.05, 2.0), ub(0.1, 3.0);
    for (int i = 0; i < 50; ++i) {
        const double a = ua(rng), b = ub(rng);
        CHECK(rel(mittag_leffler(a, b, 0.0), 1.0 / std::tgamma(b)) < 1e-14);
    }
}

TEST_CASE("recurrence E_{a,b}(z) = 1/Gamma(b) + z E_{a,a+b}(z)") {
    for (double a : {0.3, 0.6, 0.9}) {
        for (double b : {0.5, 1.0, 1.7}) {
            for (double z : {-40.0, -7.0, -1.5, 0.8, 4.0}) {
                const double lhs = mittag_leffler(a, b, z);
                const double rhs = 1.0 / std::tgamma(b) + z * mittag_leffler(a, a + b, z);
                INFO("a=" << a << " b=" << b << " z=" << z);
                CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("branches agree across the switch radius") {
    for (double a : {0.2, 0.5, 0.8, 0.95, 1.3}) {
        for (double b : {0.6, 1.0, 1.5}) {
            const double r = specfun::detail::ml_switch_radius(a);
            for (double f : {0.999, 1.001}) {
                const double z = -r * f;
                const double s = specfun::detail::ml_series(a, b, z);
                const double as = specfun::detail::ml_asymptotic(a, b, z);
                INFO("a=" << a << " b=" << b << " z=" << z);
                CHECK(std::abs(s - as) <= 1e-10 * std::max(std::abs(s), 1e-30));
            }
        }
    }
}

TEST_CASE("completely monotone decay on the negative axis for 0 < a <= 1, b >= a") {
    for (double a : {0.1, 0.4, 0.7, 1.0}) {
        double prev = mittag_leffler(a, 1.0, 0.0);
        for (double z = -0.5; z >= -500.0; z *= 1.5) {
            const double v = mittag_leffler(a, 1.0, z);
            CHECK(v > 0.0);
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("overflow reported as infinity") {
    CHECK(std::isinf(mittag_leffler(0.5, 1.0, 40.0)));
    CHECK(std::isinf(mittag_leffler(1.0, 1.0, 800.0)));
}
