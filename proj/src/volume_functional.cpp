#include "mucsc/volume_functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mucsc {

namespace {

double log_factorial(int n) { return std::lgamma(n + 1.0); }

// s + box(theta) at tau, i.e. (-psi'' + chi psi' + l_g) / p
double s_box(const SurfaceSpec& spec, const ProfileValue& v, double chi, double tau)
{
    const double k = spec.k_eff();
    const double p = spec.p(tau);
    const double dpsi = p * v.dphi - k * v.phi;
    const double d2psi = p * v.d2phi - 2 * k * v.dphi;
    return (-d2psi + chi * dpsi + spec.lg_eff()) / p;
}

// Quadrature rule and profile values at the nodes, for one weight.
struct Sampler {
    const FunctionalContext& ctx;
    double chi;
    WeightedRule rule;
    std::vector<ProfileValue> vals;

    Sampler(const FunctionalContext& c, double x) : ctx(c), chi(x), rule(adaptive_rule(c.spec.measure, {x}))
    {
        vals.reserve(rule.tau.size());
        for (double t : rule.tau) vals.push_back(ctx.profile.eval(t));
    }

    template <class F>
    double expect(F&& f) const
    {
        double s = 0.0, m = 0.0;
        for (std::size_t i = 0; i < rule.tau.size(); ++i) {
            s += rule.w[i] * f(rule.tau[i], vals[i]);
            m += rule.w[i];
        }
        return s / m;
    }

    double log_mass() const { return rule.log_mass() - chi * ctx.shift; }
    double theta(double tau) const { return -chi * (tau + ctx.shift); }
    double sbar(double lambda) const
    {
        return expect([&](double t, const ProfileValue& v) {
            return s_box(ctx.spec, v, chi, t) - lambda * theta(t);
        });
    }
    // mu^lambda scalar curvature with the shifted moment map
    double s_mu(const ProfileValue& v, double lambda, double t) const
    {
        return mu_scalar_curvature(ctx.spec, v, chi, lambda, t) + lambda * chi * ctx.shift;
    }
    double futaki(double chi_dir, double lambda) const
    {
        const double sb = sbar(lambda);
        return expect([&](double t, const ProfileValue& v) {
            return (s_mu(v, lambda, t) - sb) * (-chi_dir * (t + ctx.shift));
        });
    }
    double variance_tau() const
    {
        const double m1 = expect([](double t, const ProfileValue&) { return t; });
        return expect([&](double t, const ProfileValue&) { return (t - m1) * (t - m1); });
    }
};

double log_sinhc(double y)
{
    const double a = std::abs(y);
    if (a < 1e-4) return a * a / 6.0;
    if (a < 20.0) return std::log(std::sinh(a) / a);
    return a + std::log1p(-std::exp(-2 * a)) - std::log(2.0) - std::log(a);
}

double y_coth_y(double y)
{
    const double a = std::abs(y);
    if (a < 1e-4) return 1.0 + a * a / 3.0;
    return a / std::tanh(a);
}

}  // namespace

FunctionalContext FunctionalContext::reference(const SurfaceSpec& spec)
{
    return FunctionalContext{spec, MomentumProfile::reference(spec), 0.0};
}

double sbar(const FunctionalContext& ctx, TorusWeight w, double lambda)
{
    return Sampler(ctx, w.chi).sbar(lambda);
}

double log_weighted_mass(const FunctionalContext& ctx, TorusWeight w)
{
    return Sampler(ctx, w.chi).log_mass();
}

double theta_bar(const FunctionalContext& ctx, TorusWeight w)
{
    Sampler s(ctx, w.chi);
    return s.expect([&](double t, const ProfileValue&) { return s.theta(t); });
}

double log_vol(const FunctionalContext& ctx, TorusWeight w, double lambda)
{
    Sampler s(ctx, w.chi);
    const int n = ctx.spec.complex_dim;
    return s.sbar(lambda) + lambda * (log_factorial(n) + s.log_mass());
}

double mu_vol(const FunctionalContext& ctx, TorusWeight w, double lambda)
{
    const int n = ctx.spec.complex_dim;
    return -log_vol(ctx, w, lambda) + lambda * (log_factorial(n) + n);
}

double mu_vol_cp1_closed_form(double m, double chi, double lambda)
{
    const double y = m * chi;
    return (lambda - 2.0 / m) * y_coth_y(y) - lambda * log_sinhc(y) - lambda * std::log(2 * M_PI * m);
}

double nu(const FunctionalContext& ctx, TorusWeight base, TorusWeight dir)
{
    return dir.chi * dir.chi * Sampler(ctx, base.chi).variance_tau();
}

double futaki(const FunctionalContext& ctx, TorusWeight base, TorusWeight dir, double lambda)
{
    return Sampler(ctx, base.chi).futaki(dir.chi, lambda);
}

double d_log_vol(const FunctionalContext& ctx, TorusWeight w, double lambda, TorusWeight dir)
{
    return futaki(ctx, w, dir, lambda);
}

double d2_log_vol(const FunctionalContext& ctx, TorusWeight w, double lambda, TorusWeight dir)
{
    Sampler s(ctx, w.chi);
    const double cd = dir.chi;
    const double sb = s.sbar(lambda);
    const double F = s.futaki(cd, lambda);
    auto th = [&](double t) { return -cd * (t + ctx.shift); };
    const double eth = s.expect([&](double t, const ProfileValue&) { return th(t); });
    const double sth2 = s.expect([&](double t, const ProfileValue& v) {
        return (s.s_mu(v, lambda, t) - sb) * th(t) * th(t);
    });
    const double ephi = s.expect([](double, const ProfileValue& v) { return v.phi; });
    const double nu_d = cd * cd * s.variance_tau();
    return -2 * eth * F + sth2 + 2 * cd * cd * ephi - lambda * nu_d;
}

double lambda_xi(const FunctionalContext& ctx, TorusWeight w)
{
    if (w.chi == 0.0) throw UndefinedAtOriginError("lambda_xi: undefined at xi = 0, use lambda_hat");
    Sampler s(ctx, w.chi);
    return s.futaki(w.chi, 0.0) / (w.chi * w.chi * s.variance_tau());
}

double unit_chi(const FunctionalContext& ctx)
{
    Sampler s(ctx, 0.0);
    const double vol = std::exp(log_factorial(ctx.spec.complex_dim)) * ctx.spec.measure.total_mass();
    return 1.0 / std::sqrt(vol * s.variance_tau());
}

double lambda_hat(const FunctionalContext& ctx, int ray_sign, double r)
{
    if (r < 0) throw std::invalid_argument("lambda_hat: r must be nonnegative");
    const double sg = ray_sign >= 0 ? 1.0 : -1.0;
    const double cv = unit_chi(ctx);
    if (r > 0) return r * lambda_xi(ctx, TorusWeight{sg * r * cv});
    Sampler s(ctx, 0.0);
    const double vol = std::exp(log_factorial(ctx.spec.complex_dim)) * ctx.spec.measure.total_mass();
    const double sm = s.expect([&](double t, const ProfileValue& v) { return s_box(ctx.spec, v, 0.0, t); });
    const double tm = s.expect([](double t, const ProfileValue&) { return t; });
    const double cov = s.expect([&](double t, const ProfileValue& v) {
        return (s_box(ctx.spec, v, 0.0, t) - sm) * (-sg * cv * (t - tm));
    });
    return vol * cov;
}

std::vector<double> find_critical(const FunctionalContext& ctx, double lambda, double chi_max)
{
    auto f = [&](double chi) { return d_log_vol(ctx, TorusWeight{chi}, lambda, TorusWeight{1.0}); };
    return scan_roots(f, signed_log_grid(1e-3, chi_max, 40, true), 1e-13, 1e-12);
}

namespace {

struct OriginStats {
    double s_mean, tau_mean, var_tau, cov_s_tau, var_s;
};

OriginStats origin_stats(const FunctionalContext& ctx)
{
    Sampler s(ctx, 0.0);
    OriginStats o{};
    o.s_mean = s.expect([&](double t, const ProfileValue& v) { return s_box(ctx.spec, v, 0.0, t); });
    o.tau_mean = s.expect([](double t, const ProfileValue&) { return t; });
    o.var_tau = s.variance_tau();
    o.cov_s_tau = s.expect([&](double t, const ProfileValue& v) {
        return (s_box(ctx.spec, v, 0.0, t) - o.s_mean) * (t - o.tau_mean);
    });
    o.var_s = s.expect([&](double t, const ProfileValue& v) {
        const double d = s_box(ctx.spec, v, 0.0, t) - o.s_mean;
        return d * d;
    });
    return o;
}

}  // namespace

double C_functional(const FunctionalContext& ctx, TorusWeight w)
{
    Sampler s(ctx, 0.0);
    const OriginStats o = origin_stats(ctx);
    // theta - theta_ = -chi (tau - tau_)
    return s.expect([&](double t, const ProfileValue& v) {
        const double ds = s_box(ctx.spec, v, 0.0, t) - o.s_mean;
        const double d = ds + w.chi * (t - o.tau_mean);
        return d * d - ds * ds;
    });
}

double dC_functional(const FunctionalContext& ctx, TorusWeight w)
{
    Sampler s(ctx, 0.0);
    const OriginStats o = origin_stats(ctx);
    return s.expect([&](double t, const ProfileValue& v) {
        const double d = s_box(ctx.spec, v, 0.0, t) - o.s_mean + w.chi * (t - o.tau_mean);
        return 2 * d * (t - o.tau_mean);
    });
}

double extremal_chi(const FunctionalContext& ctx)
{
    const double d2 = 2 * origin_stats(ctx).var_tau;
    double chi = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double g = dC_functional(ctx, {chi});
        const double step = g / d2;
        chi -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(chi))) return chi;
    }
    // convexity makes the derivative monotone: bisect on an expanding bracket
    double lo = -1.0, hi = 1.0;
    while (dC_functional(ctx, {lo}) > 0) lo *= 2;
    while (dC_functional(ctx, {hi}) < 0) hi *= 2;
    return bracketed_root([&](double x) { return dC_functional(ctx, {x}); }, lo, hi, 1e-14);
}

std::vector<double> properness_slope(const FunctionalContext& ctx, TorusWeight dir, double lambda,
                                     const std::vector<double>& t_list)
{
    std::vector<double> out;
    double prev = -INFINITY;
    for (double t : t_list) {
        if (!(t > prev)) throw std::invalid_argument("properness_slope: t_list must increase");
        if (t <= 0 || t > 200) throw std::invalid_argument("properness_slope: t must lie in (0, 200]");
        prev = t;
        out.push_back(log_vol(ctx, TorusWeight{t * dir.chi}, lambda) / t);
    }
    return out;
}

double W_check_limit(const FunctionalContext& ctx, TorusWeight eta)
{
    return -0.5 * C_functional(ctx, eta);
}

double W_check(const FunctionalContext& ctx, TorusWeight eta, double kappa)
{
    if (kappa == 0.0) return W_check_limit(ctx, eta);
    const double lambda = 1.0 / kappa;
    Sampler s(ctx, kappa * eta.chi);
    Sampler s0(ctx, 0.0);
    const double s_under =
        s0.expect([&](double t, const ProfileValue& v) { return s_box(ctx.spec, v, 0.0, t); });
    // log(Vol / (int omega^n)^lambda) - s_ ; the n! factors cancel
    const double W = s.sbar(lambda) + lambda * (s.log_mass() - s0.log_mass()) - s_under;
    return W / kappa;
}

double fano_ratio(const FunctionalContext& ctx, TorusWeight dir)
{
    Sampler s(ctx, 0.0);
    const double cd = dir.chi;
    if (cd == 0.0) throw UndefinedAtOriginError("fano_ratio: direction must be nonzero");
    const double sm = s.expect([&](double t, const ProfileValue& v) { return s_box(ctx.spec, v, 0.0, t); });
    const double num = s.expect([&](double t, const ProfileValue& v) {
        const double th = -cd * (t + ctx.shift);
        return (s_box(ctx.spec, v, 0.0, t) - sm) * th * th + 2 * cd * cd * v.phi;
    });
    return num / (cd * cd * s.variance_tau());
}

double fano_threshold(const FunctionalContext& ctx, const std::vector<double>& dirs)
{
    double best = INFINITY;
    for (double d : dirs) best = std::min(best, fano_ratio(ctx, TorusWeight{d}));
    return best;
}

VolReport vol_report(const FunctionalContext& ctx, TorusWeight w, double lambda)
{
    Sampler s(ctx, w.chi);
    const int n = ctx.spec.complex_dim;
    VolReport r;
    r.chi = w.chi;
    r.lambda = lambda;
    r.sbar = s.sbar(lambda);
    r.log_vol = r.sbar + lambda * (log_factorial(n) + s.log_mass());
    r.mu_vol = -r.log_vol + lambda * (log_factorial(n) + n);
    r.theta_bar = s.expect([&](double t, const ProfileValue&) { return s.theta(t); });
    r.futaki_self = s.futaki(w.chi, lambda);
    r.nu_self = w.chi * w.chi * s.variance_tau();
    r.lambda_xi = w.chi == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                               : s.futaki(w.chi, 0.0) / r.nu_self;
    return r;
}

}  // namespace mucsc
