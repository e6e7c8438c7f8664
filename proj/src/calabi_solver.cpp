#include "mucsc/calabi_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mucsc {

namespace {

double poly_eval(const std::vector<double>& c, double x)
{
    double s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
    return s;
}

std::vector<double> poly_deriv(const std::vector<double>& c)
{
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
    if (d.empty()) d.push_back(0.0);
    return d;
}

// r(tau) = sum r_j tau^j and its derivatives
std::array<double, 4> forcing(const std::array<double, 3>& r, double t)
{
    return {r[0] + r[1] * t + r[2] * t * t, r[1] + 2 * r[2] * t, 2 * r[2], 0.0};
}

// Coefficients of the forcing split as r = r_lambda + c r_c.
void forcing_split(const SurfaceSpec& spec, double lambda, double chi, std::array<double, 3>& rl,
                   std::array<double, 3>& rc)
{
    const double k = spec.k_eff();
    rl = {spec.lg_eff(), chi * lambda, -chi * lambda * k};
    rc = {-1.0, k, 0.0};
}

// Particular solution with value and three derivatives.
std::array<double, 4> particular(const std::array<double, 3>& r, double chi, bool small, double t)
{
    std::array<double, 4> q{};
    if (small) {
        // Q = sum r_j K_j, K_j(x) = j! x^{j+2} phi'_{j+1}(chi x)
        const double z = chi * t;
        const double K0 = t * t * phi_function_derivative(1, z);
        const double K1 = t * t * t * phi_function_derivative(2, z);
        const double K2 = 2.0 * t * t * t * t * phi_function_derivative(3, z);
        const double xe = t * std::exp(z);
        q[0] = r[0] * K0 + r[1] * K1 + r[2] * K2;
        q[1] = r[0] * xe + r[1] * K0 + r[2] * 2.0 * K1;
        auto f = forcing(r, t);
        q[2] = f[0] + 2 * chi * q[1] - chi * chi * q[0];
        q[3] = f[1] + 2 * chi * q[2] - chi * chi * q[1];
        return q;
    }
    // q = sum_n (n+1) r^{(n)} / chi^{n+2}
    auto f = forcing(r, t);
    for (int d = 0; d < 4; ++d) {
        double s = 0.0;
        for (int n = 0; n + d < 3; ++n) s += (n + 1) * f[n + d] / std::pow(chi, n + 2);
        q[d] = s;
    }
    return q;
}

std::array<double, 4> homogeneous(double chi, double tau_star, double t, int which)
{
    const double x = t - tau_star;
    const double e = std::exp(chi * x);
    if (which == 0) return {e, chi * e, chi * chi * e, chi * chi * chi * e};
    return {x * e, e + chi * x * e, 2 * chi * e + chi * chi * x * e,
            3 * chi * chi * e + chi * chi * chi * x * e};
}

double residual_from(const SurfaceSpec& spec, const ClosedFormData& cf)
{
    const double tf = spec.bc.free_tau;
    auto ps = cf.psi(tf);
    // phi(tf) = 0, so phi'(tf) = psi'(tf) / p(tf)
    return ps[1] / spec.p(tf) - spec.bc.dphi_free;
}

}  // namespace

std::string SurfaceSpec::name() const
{
    std::ostringstream os;
    if (kind == SurfaceKind::CP1)
        os << "CP1(m=" << m << ")";
    else
        os << "Ruled(k=" << k << ",g=" << genus << ",m=" << m << ")";
    return os.str();
}

SurfaceSpec SurfaceSpec::cp1(double m)
{
    if (!(m > 0)) throw std::invalid_argument("cp1: m must be positive");
    SurfaceSpec s;
    s.kind = SurfaceKind::CP1;
    s.m = m;
    s.k = 0;
    s.genus = 0;
    s.l_g = 2.0;
    // omega/1! pushes forward to pi dtau on (0, 2m): total area 2 pi m
    s.measure = DHMeasure{0.0, 2.0 * m, {1.0}, M_PI};
    s.bc = BoundaryTargets{0.0, 2.0 * m, 2.0, -2.0};
    s.chi_convention = 2.0 * M_PI;
    s.complex_dim = 1;
    return s;
}

SurfaceSpec SurfaceSpec::ruled(int k, int genus, double m)
{
    if (k < 1) throw std::invalid_argument("ruled: k must be >= 1");
    if (genus < 0) throw std::invalid_argument("ruled: genus must be >= 0");
    if (!(m > 0)) throw std::invalid_argument("ruled: m must be positive");
    SurfaceSpec s;
    s.kind = SurfaceKind::Ruled;
    s.m = m;
    s.k = k;
    s.genus = genus;
    s.l_g = 2.0 - 2.0 * genus;
    // omega^2/2! of 2pi(F + mB) has total mass 2 pi^2 (2m + k m^2) = 4 pi^2 * int (1 - k tau)
    s.measure = DHMeasure{-m, 0.0, {1.0, -static_cast<double>(k)}, 4.0 * M_PI * M_PI};
    s.bc = BoundaryTargets{0.0, -m, -1.0, 1.0};
    s.chi_convention = 4.0 * M_PI;
    s.complex_dim = 2;
    return s;
}

std::array<double, 4> ClosedFormData::psi(double t) const
{
    auto h0 = homogeneous(chi, tau_star, t, 0);
    auto h1 = homogeneous(chi, tau_star, t, 1);
    auto q = particular(r, chi, small_regime, t);
    std::array<double, 4> out{};
    for (int d = 0; d < 4; ++d) out[d] = A * h0[d] + B * h1[d] + q[d];
    return out;
}

MomentumProfile MomentumProfile::polynomial(double tau_min, double tau_max,
                                            std::vector<double> psi_coeffs, double k)
{
    MomentumProfile p;
    p.kind_ = Kind::Polynomial;
    p.tau_min_ = tau_min;
    p.tau_max_ = tau_max;
    p.poly_ = std::move(psi_coeffs);
    p.k_ = k;
    return p;
}

MomentumProfile MomentumProfile::closed_form(double tau_min, double tau_max, ClosedFormData data)
{
    MomentumProfile p;
    p.kind_ = Kind::ClosedForm;
    p.tau_min_ = tau_min;
    p.tau_max_ = tau_max;
    p.k_ = data.k;
    p.cf_ = std::make_shared<const ClosedFormData>(std::move(data));
    return p;
}

MomentumProfile MomentumProfile::sampled(ChebyshevLobatto grid, std::vector<double> phi,
                                         std::vector<double> dphi)
{
    if (phi.size() != grid.nodes().size() || dphi.size() != grid.nodes().size())
        throw std::invalid_argument("sampled profile: size mismatch");
    MomentumProfile p;
    p.kind_ = Kind::Sampled;
    p.tau_min_ = grid.a();
    p.tau_max_ = grid.b();
    p.grid_ = std::make_shared<const ChebyshevLobatto>(std::move(grid));
    p.s_phi_ = std::move(phi);
    p.s_dphi_ = std::move(dphi);
    return p;
}

MomentumProfile MomentumProfile::reference(const SurfaceSpec& spec)
{
    const double m = spec.m;
    if (spec.kind == SurfaceKind::CP1) return polynomial(0.0, 2 * m, {0.0, 2.0, -1.0 / m}, 0.0);
    // psi = (1 - k tau)(-tau(tau + m)/m)
    const double k = spec.k_eff();
    return polynomial(-m, 0.0, {0.0, -1.0, -1.0 / m + k, k / m}, k);
}

ProfileValue MomentumProfile::eval(double tau) const
{
    switch (kind_) {
    case Kind::Sampled: {
        const double phi = grid_->interpolate(s_phi_, tau);
        auto [dphi, d2phi] = grid_->interpolate_d(s_dphi_, tau);
        return {phi, dphi, d2phi};
    }
    case Kind::Polynomial: {
        const double psi = poly_eval(poly_, tau);
        auto d1 = poly_deriv(poly_);
        const double dpsi = poly_eval(d1, tau);
        const double d2psi = poly_eval(poly_deriv(d1), tau);
        const double p = 1.0 - k_ * tau;
        const double phi = psi / p;
        const double dphi = (dpsi + k_ * phi) / p;
        return {phi, dphi, (d2psi + 2 * k_ * dphi) / p};
    }
    case Kind::ClosedForm: {
        auto ps = cf_->psi(tau);
        const double p = 1.0 - k_ * tau;
        const double phi = ps[0] / p;
        const double dphi = (ps[1] + k_ * phi) / p;
        return {phi, dphi, (ps[2] + 2 * k_ * dphi) / p};
    }
    }
    return {};
}

double mu_scalar_curvature(const SurfaceSpec& spec, const ProfileValue& v, double chi,
                           double lambda, double tau)
{
    const double k = spec.k_eff();
    const double p = spec.p(tau);
    const double psi = p * v.phi;
    const double dpsi = p * v.dphi - k * v.phi;
    const double d2psi = p * v.d2phi - 2 * k * v.dphi;
    const double op = d2psi - 2 * chi * dpsi + chi * chi * psi;
    return (-op + spec.lg_eff()) / p + lambda * chi * tau;
}

double mu_scalar_curvature(const SurfaceSpec& spec, const MomentumProfile& profile, TorusWeight w,
                           double lambda, double tau)
{
    if (!(tau >= spec.tau_min() && tau <= spec.tau_max()))
        throw DomainError("mu_scalar_curvature: tau outside the moment interval");
    return mu_scalar_curvature(spec, profile.eval(tau), w.chi, lambda, tau);
}

SolutionBasis solution_basis(const SurfaceSpec& spec, double lambda, TorusWeight w)
{
    if (std::abs(w.chi) < kChiBranchThreshold)
        throw DomainError("solution_basis: |chi| below the branch threshold, use chi_zero_branch");
    return SolutionBasis{spec, lambda, w.chi};
}

std::array<ProfileValue, 4> SolutionBasis::eval(double tau) const
{
    std::array<double, 3> rl, rc;
    forcing_split(spec, lambda, chi, rl, rc);
    std::array<std::array<double, 4>, 4> psi;
    psi[0] = homogeneous(chi, 0.0, tau, 0);
    psi[1] = homogeneous(chi, 0.0, tau, 1);
    psi[2] = particular(rc, chi, false, tau);
    psi[3] = particular(rl, chi, false, tau);
    const double k = spec.k_eff();
    const double p = spec.p(tau);
    std::array<ProfileValue, 4> out;
    for (int i = 0; i < 4; ++i) {
        const double phi = psi[i][0] / p;
        const double dphi = (psi[i][1] + k * phi) / p;
        out[i] = {phi, dphi, (psi[i][2] + 2 * k * dphi) / p};
    }
    return out;
}

namespace {

void finish_coefficients(ClosedFormData& cf)
{
    if (cf.chi == 0.0) return;
    const double chi = cf.chi;
    const double es = std::exp(-chi * cf.tau_star);
    double a = (cf.A - cf.B * cf.tau_star) * es;
    double b = cf.B * es;
    if (cf.small_regime) {
        // exponential part of K_j: j! e^{chi t}(t/chi^{j+1} - (j+1)/chi^{j+2})
        double fact = 1.0;
        for (int j = 0; j < 3; ++j) {
            if (j > 0) fact *= j;
            a -= cf.r[j] * fact * (j + 1) / std::pow(chi, j + 2);
            b += cf.r[j] * fact / std::pow(chi, j + 1);
        }
    }
    cf.a = a;
    cf.b = b;
}

ClosedFormData init_data(const SurfaceSpec& spec, double lambda, double chi)
{
    ClosedFormData cf;
    cf.chi = chi;
    cf.lambda = lambda;
    cf.k = spec.k_eff();
    cf.l_g = spec.lg_eff();
    if (std::abs(chi) * spec.length() > 1400.0)
        throw DegenerateParameterError("solve_system: |chi| too large for double range", lambda, chi);
    cf.small_regime = std::abs(chi) * spec.length() < 2.0;
    cf.tau_star = cf.small_regime ? 0.0 : (chi > 0 ? spec.tau_max() : spec.tau_min());
    return cf;
}

// Column-equilibrated solve with a condition-number guard.
template <int N>
Eigen::Matrix<double, N, 1> guarded_solve(const Eigen::Matrix<double, N, N>& M,
                                          const Eigen::Matrix<double, N, 1>& rhs, double lambda,
                                          double chi)
{
    Eigen::Matrix<double, N, 1> colscale = M.colwise().norm().transpose();
    for (int j = 0; j < N; ++j)
        if (colscale(j) == 0.0) colscale(j) = 1.0;
    Eigen::Matrix<double, N, N> Ms = M * colscale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::Matrix<double, N, N>> svd(Ms);
    const auto& sv = svd.singularValues();
    const double cond = sv(N - 1) > 0 ? sv(0) / sv(N - 1) : INFINITY;
    if (!(cond <= kConditionLimit)) {
        std::ostringstream os;
        os << "boundary system degenerate (cond " << cond << ") at lambda=" << lambda
           << ", chi=" << chi;
        throw DegenerateParameterError(os.str(), lambda, chi);
    }
    Eigen::Matrix<double, N, 1> y = Ms.colPivHouseholderQr().solve(rhs);
    return y.cwiseQuotient(colscale);
}

}  // namespace

ClosedFormData solve_system(const SurfaceSpec& spec, double lambda, double chi)
{
    ClosedFormData cf = init_data(spec, lambda, chi);
    std::array<double, 3> rl, rc;
    forcing_split(spec, lambda, chi, rl, rc);
    const double ta = spec.bc.anchor_tau, tf = spec.bc.free_tau;
    auto h0a = homogeneous(chi, cf.tau_star, ta, 0), h1a = homogeneous(chi, cf.tau_star, ta, 1);
    auto h0f = homogeneous(chi, cf.tau_star, tf, 0), h1f = homogeneous(chi, cf.tau_star, tf, 1);
    auto qca = particular(rc, chi, cf.small_regime, ta), qcf = particular(rc, chi, cf.small_regime, tf);
    auto qla = particular(rl, chi, cf.small_regime, ta), qlf = particular(rl, chi, cf.small_regime, tf);

    Eigen::Matrix3d M;
    M << h0a[0], h1a[0], qca[0], h0a[1], h1a[1], qca[1], h0f[0], h1f[0], qcf[0];
    // psi(anchor) = 0, psi'(anchor) = p * phi'(anchor), psi(free) = 0
    Eigen::Vector3d rhs(-qla[0], spec.p(ta) * spec.bc.dphi_anchor - qla[1], -qlf[0]);
    Eigen::Vector3d x = guarded_solve<3>(M, rhs, lambda, chi);
    cf.A = x(0);
    cf.B = x(1);
    cf.c = x(2);
    for (int j = 0; j < 3; ++j) cf.r[j] = rl[j] + cf.c * rc[j];
    finish_coefficients(cf);
    return cf;
}

ClosedFormData solve_system_all_bc(const SurfaceSpec& spec, double chi)
{
    if (chi == 0.0) throw DomainError("solve_system_all_bc: lambda is free at chi = 0");
    ClosedFormData cf = init_data(spec, 0.0, chi);
    std::array<double, 3> rg, r1, rc, unused;
    forcing_split(spec, 0.0, chi, rg, rc);
    forcing_split(spec, 1.0, chi, r1, unused);
    for (int j = 0; j < 3; ++j) r1[j] -= rg[j];
    const double ta = spec.bc.anchor_tau, tf = spec.bc.free_tau;
    const bool sm = cf.small_regime;
    auto h0a = homogeneous(chi, cf.tau_star, ta, 0), h1a = homogeneous(chi, cf.tau_star, ta, 1);
    auto h0f = homogeneous(chi, cf.tau_star, tf, 0), h1f = homogeneous(chi, cf.tau_star, tf, 1);
    auto qca = particular(rc, chi, sm, ta), qcf = particular(rc, chi, sm, tf);
    auto q1a = particular(r1, chi, sm, ta), q1f = particular(r1, chi, sm, tf);
    auto qga = particular(rg, chi, sm, ta), qgf = particular(rg, chi, sm, tf);

    Eigen::Matrix4d M;
    M << h0a[0], h1a[0], qca[0], q1a[0],
         h0a[1], h1a[1], qca[1], q1a[1],
         h0f[0], h1f[0], qcf[0], q1f[0],
         h0f[1], h1f[1], qcf[1], q1f[1];
    Eigen::Vector4d rhs(-qga[0], spec.p(ta) * spec.bc.dphi_anchor - qga[1], -qgf[0],
                        spec.p(tf) * spec.bc.dphi_free - qgf[1]);
    Eigen::Vector4d x = guarded_solve<4>(M, rhs, NAN, chi);
    cf.A = x(0);
    cf.B = x(1);
    cf.c = x(2);
    cf.lambda = x(3);
    for (int j = 0; j < 3; ++j) cf.r[j] = rg[j] + cf.lambda * r1[j] + cf.c * rc[j];
    finish_coefficients(cf);
    return cf;
}

Coefficients solve_coefficients(const SurfaceSpec& spec, double lambda, TorusWeight w)
{
    auto cf = solve_system(spec, lambda, w.chi);
    return {cf.a, cf.b, cf.c};
}

MomentumProfile solve_profile(const SurfaceSpec& spec, double lambda, TorusWeight w)
{
    if (std::abs(w.chi) < kChiBranchThreshold) return chi_zero_branch(spec, lambda).profile;
    return MomentumProfile::closed_form(spec.tau_min(), spec.tau_max(), solve_system(spec, lambda, w.chi));
}

double residual(const SurfaceSpec& spec, double lambda, TorusWeight w)
{
    const double chi = std::abs(w.chi) < kChiBranchThreshold ? 0.0 : w.chi;
    return residual_from(spec, solve_system(spec, lambda, chi));
}

double lambda_on_residual_curve(const SurfaceSpec& spec, double chi)
{
    if (std::abs(chi) < kChiBranchThreshold)
        throw DegenerateParameterError("lambda_on_residual_curve: undefined at chi = 0", NAN, chi);
    return solve_system_all_bc(spec, chi).lambda;
}

double ode_sup_residual(const SurfaceSpec& spec, const MomentumProfile& profile, double chi,
                        double lambda, double c)
{
    double sup = 0.0;
    const int n = 401;
    for (int i = 1; i <= n; ++i) {
        const double t = spec.tau_min() + spec.length() * i / (n + 1.0);
        sup = std::max(sup, std::abs(mu_scalar_curvature(spec, profile.eval(t), chi, lambda, t) - c));
    }
    return sup;
}

PositivityCertificate positivity_certificate(const MomentumProfile& profile, const SurfaceSpec& spec)
{
    PositivityCertificate cert;
    const int n = 10001;
    const double a = spec.tau_min(), L = spec.length();
    cert.min_phi = INFINITY;
    double prev_d2 = NAN;
    double prev_t = a;
    for (int i = 1; i <= n; ++i) {
        const double t = a + L * i / (n + 1.0);
        auto v = profile.eval(t);
        if (v.phi < cert.min_phi) {
            cert.min_phi = v.phi;
            cert.argmin_tau = t;
        }
        if (!std::isnan(prev_d2) && (prev_d2 > 0) != (v.d2phi > 0) && prev_d2 != 0.0) {
            auto d2 = [&](double s) { return profile.eval(s).d2phi; };
            try {
                cert.inflection_points.push_back(bracketed_root(d2, prev_t, t, 1e-12));
            } catch (const BracketError&) {
            }
        }
        prev_d2 = v.d2phi;
        prev_t = t;
    }
    if (const auto* cf = profile.closed_form_data(); cf && cf->a && cf->b && *cf->b != 0.0) {
        // psi''' = (b chi^3 tau + a chi^3 + 3 b chi^2) e^{chi tau}: one zero at most
        cert.psi3_zero = -*cf->a / *cf->b - 3.0 / cf->chi;
        cert.analytic = true;
    }
    // phi must leave both ends with the inward slope prescribed by the boundary data
    auto left = profile.eval(a), right = profile.eval(spec.tau_max());
    const bool ends_ok = left.dphi > 0 && right.dphi < 0;
    cert.verdict = cert.min_phi > 0 && ends_ok && std::isfinite(cert.min_phi);
    return cert;
}

SolveResult assemble_result(const SurfaceSpec& spec, double lambda, double chi)
{
    SolveResult res;
    res.lambda = lambda;
    res.chi = chi;
    const bool zero = std::abs(chi) < kChiBranchThreshold;
    ClosedFormData cf = solve_system(spec, lambda, zero ? 0.0 : chi);
    res.c = cf.c;
    res.residual = residual_from(spec, cf);
    if (zero) {
        // psi = A + B tau + sum r_j tau^{j+2}/((j+1)(j+2))
        std::vector<double> coeffs{cf.A, cf.B, cf.r[0] / 2.0, cf.r[1] / 6.0, cf.r[2] / 12.0};
        res.chi = 0.0;
        res.profile = MomentumProfile::polynomial(spec.tau_min(), spec.tau_max(), coeffs, spec.k_eff());
    } else {
        res.a = cf.a;
        res.b = cf.b;
        res.profile = MomentumProfile::closed_form(spec.tau_min(), spec.tau_max(), cf);
    }
    res.ode_sup_residual = ode_sup_residual(spec, res.profile, res.chi, lambda, res.c);
    res.positivity = positivity_certificate(res.profile, spec);
    return res;
}

SolveResult chi_zero_branch(const SurfaceSpec& spec, double lambda)
{
    return assemble_result(spec, lambda, 0.0);
}

SolveResult solve_chi(const SurfaceSpec& spec, double lambda, std::pair<double, double> bracket)
{
    auto f = [&](double chi) { return residual(spec, lambda, TorusWeight{chi}); };
    // relative tolerance near the origin, where lambda(chi) is steep
    const double scale = std::min(std::abs(bracket.first), std::abs(bracket.second));
    const bool straddles = (bracket.first > 0) != (bracket.second > 0);
    const double xtol = straddles ? 1e-12 : std::min(1e-12, 1e-13 * scale);
    const double root = bracketed_root(f, bracket.first, bracket.second, xtol);
    return assemble_result(spec, lambda, root);
}

std::vector<SolveResult> solve_all_roots(const SurfaceSpec& spec, double lambda, double chi_max,
                                         double chi_min)
{
    auto f = [&](double chi) { return residual(spec, lambda, TorusWeight{chi}); };
    auto grid = signed_log_grid(chi_min, chi_max, 40, true);
    std::vector<SolveResult> out;
    for (double r : scan_roots(f, grid, 1e-13)) out.push_back(assemble_result(spec, lambda, r));
    return out;
}

double flat_disk_limit_gap(const SurfaceSpec& spec, double chi)
{
    if (spec.kind != SurfaceKind::CP1 || spec.m != 1.0)
        throw std::invalid_argument("flat_disk_limit_gap: defined for CP1 with m = 1");
    if (chi < 10.0) throw std::invalid_argument("flat_disk_limit_gap: requires chi >= 10");
    auto prof = MomentumProfile::closed_form(spec.tau_min(), spec.tau_max(), solve_system_all_bc(spec, chi));
    double gap = 0.0;
    const int n = 1800;
    for (int i = 0; i <= n; ++i) {
        const double t = 1.8 * i / n;
        gap = std::max(gap, std::abs(prof.eval(t).phi - 2.0 * t));
    }
    return gap;
}

}  // namespace mucsc
