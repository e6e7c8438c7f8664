#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mucsc/dh_quadrature.hpp"

using namespace mucsc;

namespace {

DHMeasure symmetric_pi() { return DHMeasure{-M_PI, M_PI, {1.0}, 1.0}; }
DHMeasure ruled_k1_m2() { return DHMeasure{-2.0, 0.0, {1.0, -1.0}, 2 * M_PI}; }

// Composite trapezoid, independent of the Gauss-Legendre backend.
double trapezoid(const DHMeasure& m, const std::function<double(double)>& f, double chi, int n)
{
    const double h = (m.tau_max - m.tau_min) / n;
    double s = 0;
    for (int i = 0; i <= n; ++i) {
        const double t = m.tau_min + i * h;
        const double v = f(t) * m.density(t) * std::exp(-chi * t);
        s += (i == 0 || i == n) ? 0.5 * v : v;
    }
    return m.scale * s * h;
}

struct Gen {
    std::mt19937_64 rng{20261016};
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    // |chi| log-uniform in [lo, hi] with a random sign
    double signed_log(double lo, double hi)
    {
        const double v = std::exp(uniform(std::log(lo), std::log(hi)));
        return uniform(0, 1) < 0.5 ? -v : v;
    }
};

}  // namespace

TEST_CASE("weighted integral of 1 on [-pi, pi] at chi = -1")
{
    const double v = integrate_weighted(symmetric_pi(), [](double) { return 1.0; }, TorusWeight{-1.0});
    CHECK(v == doctest::Approx(2 * std::sinh(M_PI)).epsilon(1e-13));
    const double trap = trapezoid(symmetric_pi(), [](double) { return 1.0; }, -1.0, 1000000);
    CHECK(std::abs(v - trap) / v < 1e-10);
}

TEST_CASE("unweighted masses")
{
    CHECK(integrate_weighted(symmetric_pi(), [](double) { return 1.0; }, TorusWeight{0.0}) ==
          doctest::Approx(2 * M_PI).epsilon(1e-13));
    CHECK(integrate_weighted(ruled_k1_m2(), [](double) { return 1.0; }, TorusWeight{0.0}) ==
          doctest::Approx(8 * M_PI).epsilon(1e-14));
    CHECK(ruled_k1_m2().total_mass() == doctest::Approx(8 * M_PI).epsilon(1e-14));
}

TEST_CASE("moments")
{
    const auto m = symmetric_pi();
    CHECK(std::abs(moment(m, TorusWeight{0.0}, 1)) < 1e-14);
    CHECK(moment(m, TorusWeight{0.0}, 2) == doctest::Approx(2 * std::pow(M_PI, 3) / 3).epsilon(1e-14));
    // int tau e^tau = (tau - 1) e^tau
    const double ibp = (M_PI - 1) * std::exp(M_PI) - (-M_PI - 1) * std::exp(-M_PI);
    CHECK(moment(m, TorusWeight{-1.0}, 1) == doctest::Approx(ibp).epsilon(1e-13));
    CHECK_THROWS_AS(moment(m, TorusWeight{0.0}, 5), std::invalid_argument);
    for (int n = 0; n <= 4; ++n) {
        auto f = [n](double t) { return std::pow(t, n); };
        CHECK(moment(ruled_k1_m2(), TorusWeight{0.7}, n) ==
              doctest::Approx(integrate_weighted(ruled_k1_m2(), f, TorusWeight{0.7})).epsilon(1e-12));
    }
}

TEST_CASE("barycenters")
{
    CHECK(std::abs(barycenter(symmetric_pi(), TorusWeight{0.0})) < 1e-15);
    CHECK(barycenter(ruled_k1_m2(), TorusWeight{0.0}) == doctest::Approx(-7.0 / 6.0).epsilon(1e-14));
    CHECK(barycenter(symmetric_pi(), TorusWeight{-2.0}) ==
          doctest::Approx(M_PI / std::tanh(2 * M_PI) - 0.5).epsilon(1e-13));
}

TEST_CASE("non-finite integrand names the node")
{
    auto f = [](double t) { return t > 1.0 ? NAN : 1.0; };
    try {
        integrate_weighted(symmetric_pi(), f, TorusWeight{0.0});
        FAIL("expected an evaluation error");
    } catch (const EvaluationError& e) {
        CHECK(e.node() > 1.0);
    }
}

TEST_CASE("measure validation")
{
    CHECK_THROWS_AS((DHMeasure{1.0, 0.0, {1.0}, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((DHMeasure{0.0, 2.0, {1.0, -1.0}, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((DHMeasure{0.0, 1.0, {1.0}, 0.0}.validate()), std::invalid_argument);
    CHECK_NOTHROW(ruled_k1_m2().validate());
}

TEST_CASE("property: shift covariance")
{
    Gen g;
    for (int it = 0; it < 50; ++it) {
        const double c = g.uniform(-1, 1), chi = g.uniform(-5, 5);
        const DHMeasure m = ruled_k1_m2();
        // the density moves with the interval: p(tau + c) on [A - c, B - c]
        const DHMeasure s{m.tau_min - c, m.tau_max - c, {1.0 - c, -1.0}, m.scale};
        auto f = [](double t) { return std::cos(t) + t * t; };
        const double lhs = integrate_weighted(m, f, TorusWeight{chi});
        const double rhs = std::exp(-chi * c) * integrate_weighted(s, [&](double t) { return f(t + c); }, TorusWeight{chi});
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    }
}

TEST_CASE("property: closed form of the weighted mass")
{
    Gen g;
    const DHMeasure m{0.0, 2.0, {1.0}, 1.0};
    for (int it = 0; it < 100; ++it) {
        const double chi = g.signed_log(1e-3, 20);
        const double exact = (std::exp(-chi * m.tau_min) - std::exp(-chi * m.tau_max)) / chi;
        const double v = integrate_weighted(m, [](double) { return 1.0; }, TorusWeight{chi});
        CHECK(std::abs(v - exact) <= 1e-12 * std::abs(exact));
        for (int n = 0; n <= 4; ++n)
            CHECK(exp_power_integral(0.0, 2.0, chi, n) ==
                  doctest::Approx(integrate_weighted(m, [n](double t) { return std::pow(t, n); }, TorusWeight{chi}))
                      .epsilon(1e-11));
    }
}

TEST_CASE("property: continuity at chi = 0")
{
    for (const auto& m : {symmetric_pi(), ruled_k1_m2()}) {
        auto f = [](double t) { return 1.0 + t; };
        const double a = integrate_weighted(m, f, TorusWeight{1e-9}), b = integrate_weighted(m, f, TorusWeight{0.0});
        CHECK(std::abs(a - b) <= 1e-7 * std::abs(b));
        // first-order Taylor: M_n(chi) = M_n(0) - chi M_{n+1}(0) + O(chi^2)
        for (int n = 0; n <= 3; ++n) {
            const double taylor = moment(m, TorusWeight{0.0}, n) - 1e-9 * moment(m, TorusWeight{0.0}, n + 1);
            CHECK(std::abs(moment(m, TorusWeight{1e-9}, n) - taylor) <= 1e-12 * std::max(1.0, std::abs(taylor)));
        }
    }
}

TEST_CASE("large weights stay finite in log space")
{
    const DHMeasure m{0.0, 2.0, {1.0}, 1.0};
    const double chi = -600;  // e^{1200} overflows a double
    const ScaledValue v = integrate_weighted_scaled(m, [](double) { return 1.0; }, TorusWeight{chi});
    const double log_exact = -chi * 2.0 + std::log((1 - std::exp(2 * chi)) / -chi);
    CHECK(std::log(v.mantissa) + v.log_scale == doctest::Approx(log_exact).epsilon(1e-13));
    const WeightedRule r = adaptive_rule(m, TorusWeight{chi});
    CHECK(r.log_mass() == doctest::Approx(log_exact).epsilon(1e-13));
}
