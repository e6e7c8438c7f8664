#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mucsc/calabi_solver.hpp"
#include "mucsc/special.hpp"

using namespace mucsc;

namespace {

struct Gen {
    std::mt19937_64 rng{7};
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    // chi away from the branch threshold, both signs
    double chi(double lo, double hi)
    {
        const double v = uniform(lo, hi);
        return uniform(0, 1) < 0.5 ? -v : v;
    }
};

struct Coeffs {
    double a, b, c;
};

// Transcribed CP^1 (m = 1) coefficients, used only as an oracle.
Coeffs cp1_closed(double lambda, double x)
{
    const double s = std::sinh(x), e = std::exp(x), D = s - x * e;
    return {(2 * lambda * s - 2 * x * e) / (x * D), (2 - 2 * lambda) * s / D - lambda / x,
            (2 * lambda * x * s - 2 * x * x * e) / D + 2 * lambda};
}

// Transcribed ruled-surface coefficients, used only as an oracle.
Coeffs ruled_closed(double k, double lg, double m, double lambda, double x)
{
    const double E = std::exp(-m * x);
    const double den = (m * x * x + (1 - m * k) * x - 2 * k) * E - (1 + m * k) * x + 2 * k;
    const double c = ((-m * x * x * x + m * (lambda + lg) * x * x + (2 * lambda + lg - 2 * lambda * k * m) * x - 6 * lambda * k) * E +
                      (m * m * lambda + m * lambda) * x * x - (4 * m * lambda * k + 2 * lambda + lg) * x + 6 * lambda * k) /
                     den;
    const double a = c * (x - 2 * k) / (x * x * x) + ((-2 * lambda - lg) * x + 6 * lambda * k) / (x * x * x);
    const double b = c * (-x + k) / (x * x) + (-x * x + (lambda + lg) * x - 2 * lambda * k) / (x * x);
    return {a, b, c};
}

// The transcendental CP^1 (m = 1) condition on chi.
double cp1_condition(double lambda, double x)
{
    const double s = std::sinh(x);
    return lambda * (x * x - s * s) - 2 * (x * x - x * s * std::cosh(x));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("mu scalar curvature of the Fubini-Study profile at chi = 0")
{
    for (double m : {0.5, 1.0, 2.0}) {
        const auto spec = SurfaceSpec::cp1(m);
        const auto fs = MomentumProfile::reference(spec);
        for (double tau : {0.1, 0.5 * m, m, 1.7 * m}) {
            CHECK(mu_scalar_curvature(spec, fs, TorusWeight{0.0}, 3.7, tau) == doctest::Approx(2.0 / m).epsilon(1e-13));
            // brute-force second difference of phi
            const double h = 1e-4;
            auto phi = [&](double t) { return fs.eval(t).phi; };
            const double d2 = (phi(tau + h) - 2 * phi(tau) + phi(tau - h)) / (h * h);
            CHECK(-d2 == doctest::Approx(2.0 / m).epsilon(1e-6));
        }
    }
    CHECK_THROWS_AS(mu_scalar_curvature(SurfaceSpec::cp1(1), MomentumProfile::reference(SurfaceSpec::cp1(1)),
                                        TorusWeight{0.0}, 0.0, 2.5),
                    DomainError);
}

TEST_CASE("chi = 0 branch")
{
    SUBCASE("CP^1 gives the Fubini-Study profile")
    {
        const auto spec = SurfaceSpec::cp1(1);
        const auto r = chi_zero_branch(spec, 2.0);
        for (double t : {0.2, 0.9, 1.6}) CHECK(r.profile.eval(t).phi == doctest::Approx(t * (2 - t)).epsilon(1e-13));
        CHECK(std::abs(r.residual) < 1e-13);
        CHECK(r.certified());
        CHECK_FALSE(r.a.has_value());
    }
    SUBCASE("ruled k=1, g=0, m=2")
    {
        const auto spec = SurfaceSpec::ruled(1, 0, 2);
        const auto r = chi_zero_branch(spec, 0.0);
        CHECK(r.c == doctest::Approx(1.8).epsilon(1e-13));
        CHECK(r.residual == doctest::Approx(-4.0 / 15.0).epsilon(1e-13));
        for (int i = 1; i < 40; ++i) {
            const double t = -2.0 + 2.0 * i / 40;
            CHECK(std::abs(mu_scalar_curvature(spec, r.profile, TorusWeight{0.0}, 0.0, t) - r.c) < 1e-10);
        }
    }
}

TEST_CASE("solution basis")
{
    SUBCASE("CP^1 particular parts")
    {
        const auto spec = SurfaceSpec::cp1(1);
        const double lambda = 2.5, chi = 0.8;
        const auto B = solution_basis(spec, lambda, TorusWeight{chi});
        for (double t : {0.0, 0.3, 1.1, 2.0}) {
            const auto f = B.eval(t);
            CHECK(f[0].phi == doctest::Approx(std::exp(chi * t)).epsilon(1e-13));
            CHECK(f[1].phi == doctest::Approx(t * std::exp(chi * t)).epsilon(1e-13));
            CHECK(f[2].phi == doctest::Approx(-1.0 / (chi * chi)).epsilon(1e-13));
            CHECK(f[3].phi == doctest::Approx(lambda / chi * t + 2 * lambda / (chi * chi)).epsilon(1e-13));
        }
    }
    SUBCASE("ruled polynomial part")
    {
        // -lambda k tau^2/chi + (lambda chi + k c - 4 lambda k) tau/chi^2 + ((2 lambda + l_g - c) chi + 2kc - 6 lambda k)/chi^3
        const auto spec = SurfaceSpec::ruled(1, 0, 2);
        const double lambda = 1.5, chi = -0.7, k = 1, lg = 2, c = 0.9;
        const auto B = solution_basis(spec, lambda, TorusWeight{chi});
        for (double t : {-1.9, -1.0, -0.2}) {
            const auto f = B.eval(t);
            const double psi = -lambda * k * t * t / chi + (lambda * chi + k * c - 4 * lambda * k) * t / (chi * chi) +
                               ((2 * lambda + lg - c) * chi + 2 * k * c - 6 * lambda * k) / (chi * chi * chi);
            CHECK((c * f[2].phi + f[3].phi) * (1 - k * t) == doctest::Approx(psi).epsilon(1e-11));
        }
    }
    SUBCASE("random combinations have constant curvature c")
    {
        Gen g;
        for (const auto& spec : {SurfaceSpec::cp1(1), SurfaceSpec::ruled(1, 0, 2), SurfaceSpec::ruled(2, 1, 1.5)}) {
            for (int it = 0; it < 10; ++it) {
                const double lambda = g.uniform(-5, 5), chi = g.chi(0.05, 4);
                const double a = g.uniform(-2, 2), b = g.uniform(-2, 2), c = g.uniform(-2, 2);
                const auto B = solution_basis(spec, lambda, TorusWeight{chi});
                double sup = 0;
                for (int i = 0; i <= 100; ++i) {
                    const double t = spec.tau_min() + spec.length() * (0.005 + 0.99 * i / 100);
                    const auto f = B.eval(t);
                    ProfileValue v;
                    const double w[4] = {a, b, c, 1.0};
                    for (int j = 0; j < 4; ++j) {
                        v.phi += w[j] * f[j].phi;
                        v.dphi += w[j] * f[j].dphi;
                        v.d2phi += w[j] * f[j].d2phi;
                    }
                    sup = std::max(sup, std::abs(mu_scalar_curvature(spec, v, chi, lambda, t) - c));
                }
                CHECK(sup < 1e-9);
            }
        }
    }
    CHECK_THROWS_AS(solution_basis(SurfaceSpec::cp1(1), 1.0, TorusWeight{1e-8}), DomainError);
}

TEST_CASE("property: linear solve reproduces the transcribed coefficients")
{
    Gen g;
    const auto cp1 = SurfaceSpec::cp1(1);
    const auto ruled = SurfaceSpec::ruled(1, 0, 2);
    for (int it = 0; it < 50; ++it) {
        const double lambda = g.uniform(-5, 5), chi = g.chi(0.05, 4);
        const auto s = solve_coefficients(cp1, lambda, TorusWeight{chi});
        const auto o = cp1_closed(lambda, chi);
        CHECK(std::abs(*s.a - o.a) <= 1e-9 * std::max(1.0, std::abs(o.a)));
        CHECK(std::abs(*s.b - o.b) <= 1e-9 * std::max(1.0, std::abs(o.b)));
        CHECK(std::abs(s.c - o.c) <= 1e-9 * std::max(1.0, std::abs(o.c)));
        const auto r = solve_coefficients(ruled, lambda, TorusWeight{chi});
        const auto q = ruled_closed(1, 2, 2, lambda, chi);
        CHECK(std::abs(r.c - q.c) <= 1e-9 * std::max(1.0, std::abs(q.c)));
    }
    // the displayed ruled a, b at chi = -0.5, lambda = 0
    const auto r = solve_coefficients(ruled, 0.0, TorusWeight{-0.5});
    const auto q = ruled_closed(1, 2, 2, 0.0, -0.5);
    CHECK(rel(*r.a, q.a) < 1e-9);
    CHECK(rel(*r.b, q.b) < 1e-9);
    CHECK(rel(r.c, q.c) < 1e-9);
}

TEST_CASE("ruled chi -> 0 limits")
{
    const auto spec = SurfaceSpec::ruled(1, 0, 2);
    for (double lambda : {0.0, 1.0, 5.0}) {
        const double cp = solve_coefficients(spec, lambda, TorusWeight{1e-5}).c;
        const double cm = solve_coefficients(spec, lambda, TorusWeight{-1e-5}).c;
        CHECK(std::abs(0.5 * (cp + cm) - 1.8) < 1e-6);
        CHECK(std::abs(cp - 1.8) < 1e-4);
        const double r0 = chi_zero_branch(spec, lambda).residual;
        CHECK(std::abs(residual(spec, lambda, TorusWeight{1e-5}) - r0) <= 1e-4);
        CHECK(std::abs(residual(spec, lambda, TorusWeight{-1e-5}) - r0) <= 1e-4);
        CHECK(r0 == doctest::Approx(11.0 / 15.0 - 1.0).epsilon(1e-12));
    }
    // general (k, g, m): lim c = (6 + 3 m l_g)/(3m + m^2 k)
    for (auto [k, gen, m] : {std::tuple{1, 0, 2.0}, std::tuple{2, 1, 1.5}, std::tuple{3, 2, 0.7}}) {
        const auto s = SurfaceSpec::ruled(k, gen, m);
        const double lg = 2.0 - 2.0 * gen;
        CHECK(chi_zero_branch(s, 0.3).c == doctest::Approx((6 + 3 * m * lg) / (3 * m + m * m * k)).epsilon(1e-12));
        const double slope = 0.5 * (k * lg * m * m + 4 * k * m + 6) / (k * k * m * m + 4 * k * m + 3);
        CHECK(chi_zero_branch(s, 0.3).residual == doctest::Approx(slope - 1.0).epsilon(1e-12));
    }
}

TEST_CASE("residual grows as chi -> -infinity for lambda >= 0")
{
    const auto spec = SurfaceSpec::ruled(1, 0, 2);
    for (double lambda : {0.0, 1.0, 5.0}) {
        const double r30 = residual(spec, lambda, TorusWeight{-30});
        CHECK(r30 > 1e20);
        CHECK(r30 > residual(spec, lambda, TorusWeight{-20}));
        // psi'(-m) chi e^{m chi} -> -1/m with psi'(-m) = (1 + km) phi'(-m); the approach is O(1/chi)
        const double dphi = residual(spec, lambda, TorusWeight{-150}) + 1.0;
        CHECK(3 * dphi * -150 * std::exp(-300.0) == doctest::Approx(-0.5).epsilon(0.02));
    }
}

TEST_CASE("CP^1 residual vanishes exactly on the transcendental condition")
{
    Gen g;
    const auto spec = SurfaceSpec::cp1(1);
    for (int it = 0; it < 20; ++it) {
        const double chi = g.chi(0.2, 4);
        const double s = std::sinh(chi);
        const double lambda = 2 * (chi * chi - chi * s * std::cosh(chi)) / (chi * chi - s * s);
        CHECK(std::abs(residual(spec, lambda, TorusWeight{chi})) < 1e-9);
        CHECK(std::abs(residual(spec, lambda + 0.5, TorusWeight{chi})) > 1e-4);
    }
}

TEST_CASE("solve_chi")
{
    SUBCASE("CP^1 lambda = 5 against bisection on the transcendental condition")
    {
        const auto r = solve_chi(SurfaceSpec::cp1(1), 5.0, {0.1, 5.0});
        double lo = 0.1, hi = 5.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            ((cp1_condition(5, mid) > 0) == (cp1_condition(5, lo) > 0) ? lo : hi) = mid;
        }
        CHECK(r.chi == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-11));
        CHECK(r.certified());
        CHECK(r.chi == doctest::Approx(1.917532686908475).epsilon(1e-12));
    }
    SUBCASE("CP^1 lambda = 3 has no nonzero root")
    {
        CHECK_THROWS_AS(solve_chi(SurfaceSpec::cp1(1), 3.0, {0.1, 5.0}), BracketError);
    }
    SUBCASE("ruled lambda = 0 regression")
    {
        const auto spec = SurfaceSpec::ruled(1, 0, 2);
        const auto r = solve_chi(spec, 0.0, {-2.0, -0.01});
        CHECK(r.chi < 0);
        CHECK(r.chi == doctest::Approx(-0.264878873648536).epsilon(1e-10));
        CHECK(std::abs(r.residual) <= 1e-10);
        CHECK(r.positivity.verdict);
        CHECK(r.certified());
    }
}

TEST_CASE("property: certified solutions satisfy the equation and the boundary data")
{
    struct Case {
        SurfaceSpec spec;
        double lambda;
    };
    const std::vector<Case> cases{{SurfaceSpec::cp1(1), 5.0}, {SurfaceSpec::cp1(0.5), 9.0},
                                  {SurfaceSpec::ruled(1, 0, 2), 0.0}, {SurfaceSpec::ruled(1, 0, 2), 1.0},
                                  {SurfaceSpec::ruled(1, 0, 2), 5.0}, {SurfaceSpec::ruled(2, 1, 1), -2.0}};
    int seen = 0;
    for (const auto& cs : cases) {
        for (const auto& r : solve_all_roots(cs.spec, cs.lambda)) {
            if (!r.certified()) continue;
            ++seen;
            const auto& bc = cs.spec.bc;
            CHECK(std::abs(r.profile.eval(bc.anchor_tau).phi) < 1e-12);
            CHECK(std::abs(r.profile.eval(bc.free_tau).phi) < 1e-12);
            CHECK(std::abs(r.profile.eval(bc.anchor_tau).dphi - bc.dphi_anchor) < 1e-12);
            CHECK(std::abs(r.profile.eval(bc.free_tau).dphi - bc.dphi_free) < 1e-10);
            double sup = 0;
            for (int i = 1; i <= 401; ++i) {
                const double t = cs.spec.tau_min() + cs.spec.length() * i / 402.0;
                sup = std::max(sup, std::abs(mu_scalar_curvature(cs.spec, r.profile, TorusWeight{r.chi}, cs.lambda, t) - r.c));
            }
            CHECK(sup <= 1e-8);
            CHECK(r.positivity.min_phi > 0);
        }
    }
    CHECK(seen >= 10);
}

TEST_CASE("property: scaling law on CP^1")
{
    // phi -> c phi on the c-times interval, chi -> chi/c, lambda -> lambda/c scales s by 1/c
    Gen g;
    for (int it = 0; it < 10; ++it) {
        const double c = g.uniform(0.3, 3.0), lambda = g.uniform(4.5, 9);
        const auto spec = SurfaceSpec::cp1(1);
        const auto roots = solve_all_roots(spec, lambda);
        const auto& r = roots.back();
        REQUIRE(r.certified());
        const auto big = SurfaceSpec::cp1(c);
        for (int i = 1; i < 20; ++i) {
            const double t = 2.0 * i / 20;
            const ProfileValue v = r.profile.eval(t);
            const ProfileValue w{c * v.phi, v.dphi, v.d2phi / c};
            const double s0 = mu_scalar_curvature(spec, v, r.chi, lambda, t);
            const double s1 = mu_scalar_curvature(big, w, r.chi / c, lambda / c, c * t);
            CHECK(std::abs(s1 - s0 / c) <= 1e-10 * std::max(1.0, std::abs(s0)));
        }
    }
}

TEST_CASE("positivity certificate")
{
    SUBCASE("Fubini-Study profile")
    {
        const auto spec = SurfaceSpec::cp1(1);
        const auto cert = positivity_certificate(MomentumProfile::reference(spec), spec);
        CHECK(cert.verdict);
        CHECK(cert.inflection_points.empty());
        CHECK(cert.min_phi > 0);
    }
    SUBCASE("corrupted profile with phi(m) = -0.1")
    {
        const auto spec = SurfaceSpec::cp1(1);
        ChebyshevLobatto grid(0.0, 2.0, 64);
        std::vector<double> phi, dphi;
        for (double t : grid.nodes()) {
            const double s = std::sin(M_PI * t / 2);
            phi.push_back(t * (2 - t) - 1.1 * s * s);
            dphi.push_back(2 - 2 * t - 1.1 * M_PI * s * std::cos(M_PI * t / 2));
        }
        const auto bad = MomentumProfile::sampled(grid, phi, dphi);
        const auto cert = positivity_certificate(bad, spec);
        CHECK_FALSE(cert.verdict);
        CHECK(cert.min_phi == doctest::Approx(-0.1).epsilon(1e-6));
        CHECK(cert.argmin_tau == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("closed-form solutions carry the analytic third-derivative zero")
    {
        const auto r = solve_chi(SurfaceSpec::ruled(1, 0, 2), 0.0, {-2.0, -0.01});
        REQUIRE(r.positivity.psi3_zero.has_value());
        CHECK(r.positivity.analytic);
        CHECK(*r.positivity.psi3_zero == doctest::Approx(-*r.a / *r.b - 3.0 / r.chi));
    }
}

TEST_CASE("flat disk limit")
{
    const auto spec = SurfaceSpec::cp1(1);
    const double g50 = flat_disk_limit_gap(spec, 50.0), g10 = flat_disk_limit_gap(spec, 10.0);
    CHECK(g50 < 0.01);
    CHECK(g50 < g10);
    CHECK(flat_disk_limit_gap(spec, 25.0) < g10);
    // lambda(chi) = 2 chi + O(chi^2 e^{-2 chi})
    CHECK(lambda_on_residual_curve(spec, 50.0) == doctest::Approx(100.0).epsilon(1e-12));
    const auto cf = solve_system_all_bc(spec, 50.0);
    const auto prof = MomentumProfile::closed_form(0.0, 2.0, cf);
    CHECK(std::abs(prof.eval(0.0).phi) <= 1e-12);
    CHECK_THROWS_AS(flat_disk_limit_gap(spec, 5.0), std::invalid_argument);
}

TEST_CASE("degenerate parameters")
{
    CHECK_THROWS_AS(solve_coefficients(SurfaceSpec::cp1(1), 1.0, TorusWeight{800.0}), DegenerateParameterError);
    try {
        solve_coefficients(SurfaceSpec::cp1(1), 1.0, TorusWeight{800.0});
    } catch (const DegenerateParameterError& e) {
        CHECK(e.chi() == 800.0);
        CHECK(e.lambda() == 1.0);
    }
    CHECK_THROWS_AS(SurfaceSpec::ruled(0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(SurfaceSpec::cp1(-1), std::invalid_argument);
}
