#include "mucsc/energy.hpp"

#include "mucsc/volume_functional.hpp"

#include <boost/math/tools/roots.hpp>
#include <gsl/gsl_chebyshev.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mucsc {

struct SmoothPart::Series {
    gsl_cheb_series *h0 = nullptr, *h1 = nullptr, *h2 = nullptr, *h3 = nullptr, *h4 = nullptr;
    ~Series()
    {
        for (auto* p : {h0, h1, h2, h3, h4})
            if (p) gsl_cheb_free(p);
    }
};

namespace {

double cheb_thunk(double x, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(x); }

void require_cp1(const SurfaceSpec& spec)
{
    if (spec.kind != SurfaceKind::CP1) throw std::invalid_argument("energy: implemented for CP^1 only");
}

struct GL {
    std::vector<double> x, w;
};

// Gauss-Legendre nodes on [a, b].
GL gauss_legendre(int n, double a, double b)
{
    GL g;
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
    for (int i = 0; i < n; ++i) {
        double xi, wi;
        gsl_integration_glfixed_point(a, b, i, &xi, &wi, t);
        g.x.push_back(xi);
        g.w.push_back(wi);
    }
    gsl_integration_glfixed_table_free(t);
    return g;
}

// Unweighted composite rule on [0, 2m] carrying the factor pi.
WeightedRule tau_rule(double m, int panels)
{
    return make_rule(DHMeasure{0.0, 2 * m, {1.0}, M_PI}, TorusWeight{0.0}, panels);
}

struct PathState {
    SmoothValue h;  // h_t and derivatives
    double V = 0, dV = 0;
};

PathState path_state(const PotentialPath& p, double t, double tau, std::vector<double>& w,
                     std::vector<double>& wd)
{
    p.weights(t, w, wd);
    PathState s;
    for (std::size_t i = 0; i < p.parts.size(); ++i) {
        if (w[i] == 0.0 && wd[i] == 0.0) continue;
        const SmoothValue v = p.parts[i].eval(tau);
        s.h.h += w[i] * v.h;
        s.h.d1 += w[i] * v.d1;
        s.h.d2 += w[i] * v.d2;
        s.h.d3 += w[i] * v.d3;
        s.h.d4 += w[i] * v.d4;
        s.V += wd[i] * v.h;
        s.dV += wd[i] * v.d1;
    }
    return s;
}

ProfileValue checked_profile(double m, const SmoothValue& h, double tau, double t)
{
    const double D = 1.0 + tau * (2 * m - tau) / m * h.d2;
    if (!(D > 0)) {
        std::ostringstream os;
        os << "energy: U_t'' <= 0 at t = " << t << ", tau = " << tau;
        throw PathDegeneracyError(os.str(), t);
    }
    return profile_from_smooth(m, h, tau);
}

double newton_logit(double m, double rho, const std::function<SmoothValue(double)>& h)
{
    // U'(tau) = s/2 + h'(tau) with tau = 2m / (1 + e^{-s})
    auto tau_of = [m](double s) { return 2 * m / (1 + std::exp(-s)); };
    auto f = [&](double s) {
        const double t = tau_of(s);
        const SmoothValue v = h(t);
        const double dtau = t * (2 * m - t) / (2 * m);
        return std::make_pair(0.5 * s + v.d1 - rho, 0.5 + v.d2 * dtau);
    };
    const double guess = 2 * (rho - h(m).d1);
    std::uintmax_t iters = 200;
    const double s = boost::math::tools::newton_raphson_iterate(f, guess, -700.0, 700.0, 52, iters);
    return tau_of(s);
}

}  // namespace

SmoothPart SmoothPart::zero(double m)
{
    SmoothPart p;
    p.m_ = m;
    return p;
}

SmoothPart SmoothPart::affine(double m, double c0, double c1)
{
    SmoothPart p;
    p.m_ = m;
    p.c0_ = c0;
    p.c1_ = c1;
    return p;
}

SmoothPart SmoothPart::from_second_derivative(double m, const std::function<double(double)>& h2, int order)
{
    auto s = std::make_shared<Series>();
    s->h2 = gsl_cheb_alloc(order);
    gsl_function F{&cheb_thunk, const_cast<std::function<double(double)>*>(&h2)};
    gsl_cheb_init(s->h2, &F, 0.0, 2 * m);
    s->h3 = gsl_cheb_alloc(order);
    s->h4 = gsl_cheb_alloc(order);
    s->h1 = gsl_cheb_alloc(order);
    s->h0 = gsl_cheb_alloc(order);
    gsl_cheb_calc_deriv(s->h3, s->h2);
    gsl_cheb_calc_deriv(s->h4, s->h3);
    gsl_cheb_calc_integ(s->h1, s->h2);
    gsl_cheb_calc_integ(s->h0, s->h1);
    SmoothPart p;
    p.m_ = m;
    p.s_ = std::move(s);
    return p;
}

SmoothPart SmoothPart::plus_affine(double c0, double c1) const
{
    SmoothPart p = *this;
    p.c0_ += c0;
    p.c1_ += c1;
    return p;
}

SmoothValue SmoothPart::eval(double tau) const
{
    SmoothValue v{c0_ + c1_ * tau, c1_, 0, 0, 0};
    if (s_) {
        v.h += gsl_cheb_eval(s_->h0, tau);
        v.d1 += gsl_cheb_eval(s_->h1, tau);
        v.d2 = gsl_cheb_eval(s_->h2, tau);
        v.d3 = gsl_cheb_eval(s_->h3, tau);
        v.d4 = gsl_cheb_eval(s_->h4, tau);
    }
    return v;
}

double SmoothPart::tail() const
{
    if (!s_) return 0.0;
    const std::size_t n = s_->h2->order;
    double t = 0.0;
    for (std::size_t i = n > 3 ? n - 3 : 0; i <= n; ++i) t = std::max(t, std::abs(s_->h2->c[i]));
    return t;
}

double guillemin(double m, double tau)
{
    auto xlogx = [](double x) { return x > 0 ? x * std::log(x) : 0.0; };
    return 0.5 * (xlogx(tau) + xlogx(2 * m - tau));
}

double guillemin_d1(double m, double tau) { return 0.5 * (std::log(tau) - std::log(2 * m - tau)); }

ProfileValue profile_from_smooth(double m, const SmoothValue& h, double tau)
{
    const double f = tau * (2 * m - tau) / m, f1 = (2 * m - 2 * tau) / m, f2 = -2.0 / m;
    const double D = 1 + f * h.d2;
    const double D1 = f1 * h.d2 + f * h.d3;
    const double D2 = f2 * h.d2 + 2 * f1 * h.d3 + f * h.d4;
    const double g = 1 / D, g1 = -D1 / (D * D), g2 = (2 * D1 * D1 - D * D2) / (D * D * D);
    return {f * g, f1 * g + f * g1, f2 * g + 2 * f1 * g1 + f * g2};
}

double SymplecticPotential::U(double tau) const { return guillemin(m_, tau) + h_.eval(tau).h; }

double SymplecticPotential::dU(double tau) const { return guillemin_d1(m_, tau) + h_.eval(tau).d1; }

ProfileValue SymplecticPotential::profile(double tau) const { return profile_from_smooth(m_, h_.eval(tau), tau); }

SymplecticPotential potential_from_profile(const MomentumProfile& profile, double m, int order)
{
    const double a = profile.tau_min(), b = profile.tau_max();
    if (std::abs(a) > 1e-14 || std::abs(b - 2 * m) > 1e-12 * m)
        throw DomainError("potential_from_profile: profile must live on [0, 2m]");
    for (int i = 1; i < 200; ++i) {
        const double t = 2 * m * i / 200.0;
        if (!(profile.eval(t).phi > 0)) throw DomainError("potential_from_profile: nonpositive phi");
    }
    std::function<double(double)> h2 = [&](double t) {
        const double fs = t * (2 * m - t) / m;
        const double phi = profile.eval(t).phi;
        return (fs - phi) / (phi * fs);
    };
    return SymplecticPotential(m, SmoothPart::from_second_derivative(m, h2, order));
}

MomentumProfile potential_to_profile(const SymplecticPotential& u, int n)
{
    ChebyshevLobatto grid(0.0, 2 * u.m(), n);
    std::vector<double> phi, dphi;
    for (double t : grid.nodes()) {
        const ProfileValue v = u.profile(t);
        phi.push_back(v.phi);
        dphi.push_back(v.dphi);
    }
    return MomentumProfile::sampled(std::move(grid), std::move(phi), std::move(dphi));
}

PotentialPath PotentialPath::linear(const SymplecticPotential& u0, const SymplecticPotential& u1)
{
    PotentialPath p;
    p.m = u0.m();
    p.parts = {u0.smooth(), u1.smooth()};
    p.weights = [](double t, std::vector<double>& w, std::vector<double>& wd) {
        w = {1 - t, t};
        wd = {-1.0, 1.0};
    };
    return p;
}

PotentialPath PotentialPath::with_bump(const SymplecticPotential& u0, const SymplecticPotential& u1,
                                       const SmoothPart& bump)
{
    PotentialPath p;
    p.m = u0.m();
    p.parts = {u0.smooth(), u1.smooth(), bump};
    p.weights = [](double t, std::vector<double>& w, std::vector<double>& wd) {
        w = {1 - t, t, t * (1 - t)};
        wd = {-1.0, 1.0, 1 - 2 * t};
    };
    return p;
}

PotentialPath PotentialPath::vector_field(const SymplecticPotential& u0, double chi_zeta)
{
    PotentialPath p;
    p.m = u0.m();
    p.parts = {u0.smooth(), SmoothPart::affine(u0.m(), 0.0, 1.0)};
    p.weights = [chi_zeta](double t, std::vector<double>& w, std::vector<double>& wd) {
        w = {1.0, chi_zeta * t};
        wd = {0.0, chi_zeta};
    };
    return p;
}

PotentialPath PotentialPath::with_gauge(std::function<double(double)> c) const
{
    PotentialPath p = *this;
    p.parts.push_back(SmoothPart::affine(m, 1.0, 0.0));
    auto base = weights;
    p.weights = [base, c](double t, std::vector<double>& w, std::vector<double>& wd) {
        base(t, w, wd);
        w.push_back(0.0);  // constants do not change the metric
        wd.push_back(c(t));
    };
    return p;
}

SymplecticPotential PotentialPath::at(double t) const
{
    std::vector<double> w, wd;
    weights(t, w, wd);
    double c0 = 0, c1 = 0;
    bool curved = false;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const SmoothValue v0 = parts[i].eval(0.0);
        c0 += w[i] * v0.h;
        c1 += w[i] * v0.d1;
        curved = curved || (w[i] != 0.0 && parts[i].has_series());
    }
    if (!curved) return SymplecticPotential(m, SmoothPart::affine(m, c0, c1));
    // the series part integrates from 0, so h(0) and h'(0) come back through the affine part
    std::function<double(double)> h2 = [&](double tau) {
        double s = 0;
        for (std::size_t i = 0; i < parts.size(); ++i)
            if (w[i] != 0.0) s += w[i] * parts[i].eval(tau).d2;
        return s;
    };
    return SymplecticPotential(m, SmoothPart::from_second_derivative(m, h2, 96).plus_affine(c0, c1));
}

double invert_gradient(const PotentialPath& path, double t, double rho)
{
    std::vector<double> w, wd;
    return newton_logit(path.m, rho, [&](double tau) { return path_state(path, t, tau, w, wd).h; });
}

double invert_gradient(const SymplecticPotential& u, double rho)
{
    return newton_logit(u.m(), rho, [&](double tau) { return u.smooth().eval(tau); });
}

double muk_energy_path(const SurfaceSpec& spec, TorusWeight wt, double lambda, const PotentialPath& path,
                       double t_end, EnergyOptions opt)
{
    require_cp1(spec);
    if (t_end == 0.0) return 0.0;
    const double m = spec.m, chi = wt.chi;
    const double sb = sbar(FunctionalContext::reference(spec), wt, lambda);
    const GL tg = gauss_legendre(opt.t_nodes, 0.0, t_end);
    const WeightedRule rule = tau_rule(m, opt.tau_panels);
    std::vector<double> w, wd;
    double total = 0.0;
    for (std::size_t k = 0; k < tg.x.size(); ++k) {
        const double t = tg.x[k];
        const PathState s0 = path_state(path, t, 0.0, w, wd);
        const PathState s1 = path_state(path, t, 2 * m, w, wd);
        double slice = M_PI * (2 * s0.V + 2 * std::exp(-2 * m * chi) * s1.V);
        for (std::size_t i = 0; i < rule.tau.size(); ++i) {
            const double tau = rule.tau[i];
            const PathState s = path_state(path, t, tau, w, wd);
            const ProfileValue v = checked_profile(m, s.h, tau, t);
            const double e = std::exp(-chi * tau);
            slice += rule.w[i] * e * ((v.dphi - chi * v.phi) * s.dV + (lambda * chi * tau - sb) * s.V);
        }
        total += tg.w[k] * slice;
    }
    return total;
}

ChenTianTerms muk_energy_chen_tian(const SurfaceSpec& spec, TorusWeight wt, double lambda,
                                   const SymplecticPotential& u0, const SymplecticPotential& u1,
                                   EnergyOptions opt)
{
    require_cp1(spec);
    const double m = spec.m, chi = wt.chi;
    const auto ctx = FunctionalContext::reference(spec);
    const double sb0 = sbar(ctx, wt, 0.0);
    const double thb = theta_bar(ctx, wt);
    const WeightedRule rule = tau_rule(m, opt.tau_panels);
    const PotentialPath path = PotentialPath::linear(u0, u1);
    ChenTianTerms out;

    // entropy of e^{theta(phi)} omega_phi relative to e^{theta} omega
    for (std::size_t i = 0; i < rule.tau.size(); ++i) {
        const double t1 = rule.tau[i];
        const double t0 = invert_gradient(u0, u1.dU(t1));
        const double r = -chi * (t1 - t0) + std::log(u1.profile(t1).phi / u0.profile(t0).phi);
        out.entropy += rule.w[i] * std::exp(-chi * t1) * r;
    }

    const GL tg = gauss_legendre(opt.t_nodes, 0.0, 1.0);
    std::vector<double> w, wd;
    std::vector<ProfileValue> p0(rule.tau.size());
    std::vector<double> rho0(rule.tau.size());
    for (std::size_t i = 0; i < rule.tau.size(); ++i) {
        p0[i] = u0.profile(rule.tau[i]);
        rho0[i] = u0.dU(rule.tau[i]);
    }
    for (std::size_t k = 0; k < tg.x.size(); ++k) {
        const double t = tg.x[k];
        double ric = 0, sbt = 0, lt = 0;
        for (std::size_t i = 0; i < rule.tau.size(); ++i) {
            // the forms built from the initial metric, compared at the same point
            const double tt = invert_gradient(path, t, rho0[i]);
            const PathState s = path_state(path, t, tt, w, wd);
            const ProfileValue pt = checked_profile(m, s.h, tt, t);
            const ProfileValue& q = p0[i];
            const double bracket = -q.d2phi + chi * q.dphi + (chi * q.dphi / q.phi - chi * chi) * pt.phi;
            ric += rule.w[i] * (-s.V) * std::exp(-chi * tt) * bracket;

            const double tau = rule.tau[i];
            const PathState sv = path_state(path, t, tau, w, wd);
            const double e = std::exp(-chi * tau);
            sbt += rule.w[i] * (-sv.V) * e;
            lt += rule.w[i] * (-chi * tau - thb) * (-sv.V) * e;
        }
        out.ricci += -tg.w[k] * ric;
        out.sbar_term += tg.w[k] * sb0 * sbt;
        out.lambda_term += tg.w[k] * lambda * lt;
    }
    return out;
}

double muk_energy_derivative(const SurfaceSpec& spec, TorusWeight wt, double lambda,
                             const SymplecticPotential& u, const SmoothPart& dh, EnergyOptions opt)
{
    require_cp1(spec);
    const double m = spec.m, chi = wt.chi;
    const double sb = sbar(FunctionalContext::reference(spec), wt, lambda);
    const WeightedRule rule = tau_rule(m, opt.tau_panels);
    double d = M_PI * (2 * dh.eval(0.0).h + 2 * std::exp(-2 * m * chi) * dh.eval(2 * m).h);
    for (std::size_t i = 0; i < rule.tau.size(); ++i) {
        const double tau = rule.tau[i];
        const ProfileValue v = u.profile(tau);
        const SmoothValue g = dh.eval(tau);
        d += rule.w[i] * std::exp(-chi * tau) * ((v.dphi - chi * v.phi) * g.d1 + (lambda * chi * tau - sb) * g.h);
    }
    return d;
}

ConvexityTrace geodesic_convexity(const SurfaceSpec& spec, TorusWeight wt, double lambda,
                                  const SymplecticPotential& u0, const SymplecticPotential& u1,
                                  const std::vector<double>& t_grid, EnergyOptions opt)
{
    if (t_grid.size() < 3) throw std::invalid_argument("geodesic_convexity: need at least 3 t values");
    const double h = t_grid[1] - t_grid[0];
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (std::abs(t_grid[i] - t_grid[i - 1] - h) > 1e-12 || !(h > 0))
            throw std::invalid_argument("geodesic_convexity: t grid must be uniform and increasing");
    const PotentialPath path = PotentialPath::linear(u0, u1);
    ConvexityTrace tr;
    tr.t = t_grid;
    for (double t : t_grid) tr.energy.push_back(muk_energy_path(spec, wt, lambda, path, t, opt));
    for (std::size_t i = 1; i + 1 < t_grid.size(); ++i)
        tr.second_difference.push_back(tr.energy[i + 1] - 2 * tr.energy[i] + tr.energy[i - 1]);
    return tr;
}

double geodesic_residual(const SymplecticPotential& u0, const SymplecticPotential& u1, int nt, int ntau)
{
    const double m = u0.m();
    const PotentialPath path = PotentialPath::linear(u0, u1);
    std::vector<double> w, wd;
    auto state = [&](double t, double rho) {
        const double tau = invert_gradient(path, t, rho);
        const PathState s = path_state(path, t, tau, w, wd);
        const double U = guillemin(m, tau) + s.h.h;
        return std::make_pair(tau, tau * rho - U);  // (tau_t, Kahler potential u_t)
    };
    const double h = 1e-2;
    double sup = 0.0;
    for (int j = 0; j < ntau; ++j) {
        const double tau_ref = 2 * m * (0.05 + 0.9 * j / (ntau - 1.0));
        const double rho = u0.dU(tau_ref);
        for (int i = 0; i < nt; ++i) {
            const double t = 0.1 + 0.8 * i / (nt - 1.0);
            auto a = state(t - 2 * h, rho), b = state(t - h, rho), c = state(t, rho), d = state(t + h, rho),
                 e = state(t + 2 * h, rho);
            const double utt = (-a.second + 16 * b.second - 30 * c.second + 16 * d.second - e.second) / (12 * h * h);
            const double taut = (a.first - 8 * b.first + 8 * d.first - e.first) / (12 * h);
            const PathState s = path_state(path, t, c.first, w, wd);
            const double phi = profile_from_smooth(m, s.h, c.first).phi;
            sup = std::max(sup, std::abs(utt - taut * taut / phi));
        }
    }
    return sup;
}

}  // namespace mucsc
