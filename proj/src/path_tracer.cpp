#include "mucsc/path_tracer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mucsc {

namespace {

// Coefficient of chi^j in (a chi^2 + b chi + c) e^{s chi}, times j! / s^j.
double exp_quad_weight(double a, double b, double c, double s, int j)
{
    return a * j * (j - 1) / (s * s) + b * j / s + c;
}

// sum_j coef_j chi^{j - lead}, where the expansion of
// (q2 chi^2 + q1 chi + q0) e^{2chi} + (r2 chi^2 + r1 chi + r0) e^{-2chi} + poly
// vanishes below order lead. Every j! coef_j is formed exactly before dividing.
double shifted_series(const double q[3], const double r[3], const std::vector<double>& poly,
                      int lead, double chi)
{
    double sum = 0.0, pw = 1.0, fact = 1.0, two = 1.0;
    for (int j = 0; j < 60; ++j) {
        if (j > 0) {
            fact *= j;
            two *= 2.0;
        }
        const double sgn = (j % 2) ? -1.0 : 1.0;
        double jc = two * exp_quad_weight(q[2], q[1], q[0], 2.0, j) +
                    sgn * two * exp_quad_weight(r[2], r[1], r[0], -2.0, j);
        if (j < static_cast<int>(poly.size())) jc += poly[j] * fact;
        if (j < lead) continue;  // identically zero
        const double term = jc / fact * pw;
        sum += term;
        pw *= chi;
        if (j > lead + 8 && std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace

double lambda_of_chi_p2blowup(double chi)
{
    if (chi == 0.0) throw PoleError("lambda_of_chi_p2blowup: pole at chi = 0");
    const double qn[3] = {-2, -6, 9}, rn[3] = {-2, 2, -1};
    const double qd[3] = {2, -12, 9}, rd[3] = {2, -4, 1};
    const std::vector<double> pn{4, 4, 16, -12}, pd{-4, 16, -2, 16, -12};
    if (std::abs(chi) < 1.0) {
        // numerator O(chi^4), denominator O(chi^6)
        const double N = shifted_series(qn, rn, pn, 4, chi);
        const double D = shifted_series(qd, rd, pd, 6, chi);
        if (std::abs(D) < 1e-14) throw PoleError("lambda_of_chi_p2blowup: denominator vanishes");
        return N / (D * chi);
    }
    const double ep = std::exp(2 * chi), em = std::exp(-2 * chi);
    const double c2 = chi * chi, c3 = c2 * chi, c4 = c3 * chi;
    const double N = (9 * c2 - 6 * chi - 2) * ep + (-c2 + 2 * chi - 2) * em +
                     (-12 * c3 + 16 * c2 + 4 * chi + 4);
    const double D = (9 * c2 - 12 * chi + 2) * ep + (c2 - 4 * chi + 2) * em +
                     (-12 * c4 + 16 * c3 - 2 * c2 + 16 * chi - 4);
    if (std::abs(D) < 1e-14) throw PoleError("lambda_of_chi_p2blowup: denominator vanishes");
    return chi * N / D;
}

Tau0Polynomials tau0_polynomials(double x)
{
    const double e = std::exp(-2 * x);
    const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
    return {(-2 * x4 + x3 + 2 * x2 - 6 * x) * e + 9 * x3 - 14 * x2 + 6 * x,
            (4 * x2 + 6 * x - 6) * e + 6 * x3 + 5 * x2 + 28 * x - 6,
            (-x3 + 2 * x2 - 2 * x) * e + 3 * x3 - 6 * x2 + 2 * x,
            (-x2 + 4 * x - 2) * e + 7 * x2 + 8 * x - 2};
}

Tau0Report tau0_positivity(double chi, double lambda)
{
    if (!(chi < 0 && chi > -1)) throw std::invalid_argument("tau0_positivity: chi must lie in (-1, 0)");
    if (!(lambda < 0)) throw std::invalid_argument("tau0_positivity: lambda must be negative");
    const auto spec = SurfaceSpec::ruled(1, 0, 2);
    const auto cf = solve_system(spec, lambda, chi);
    Tau0Report r;
    r.tau0 = -*cf.a / *cf.b - 3.0 / chi;
    r.positive = r.tau0 > 0;
    r.polys = tau0_polynomials(chi);
    r.sign_pattern = r.polys.alpha > 0 && r.polys.gamma > 0 && r.polys.beta < 0 && r.polys.delta < 0;
    return r;
}

std::vector<PathPoint> trace(const SurfaceSpec& spec, const std::vector<double>& lambda_grid,
                             std::pair<double, double> seed_bracket, bool report_all_roots)
{
    for (std::size_t i = 1; i < lambda_grid.size(); ++i)
        if ((lambda_grid[i] - lambda_grid[i - 1]) * (lambda_grid[1] - lambda_grid[0]) <= 0)
            throw std::invalid_argument("trace: lambda grid must be strictly monotone");
    std::vector<PathPoint> out;
    std::optional<double> prev;
    for (double lambda : lambda_grid) {
        PathPoint pt;
        pt.lambda = lambda;
        auto f = [&](double chi) { return residual(spec, lambda, TorusWeight{chi}); };
        std::optional<std::pair<double, double>> br;
        if (!prev) {
            br = seed_bracket;
        } else {
            const double c = *prev;
            double d = std::max(0.05 * std::abs(c), 1e-6);
            for (int it = 0; it < 40 && !br; ++it, d *= 2) {
                double lo = c - d, hi = c + d;
                // stay on the side of the origin the branch started on
                if (c < 0) hi = std::min(hi, c * 1e-6);
                if (c > 0) lo = std::max(lo, c * 1e-6);
                if ((f(lo) > 0) != (f(hi) > 0)) br = std::make_pair(lo, hi);
            }
        }
        try {
            if (!br) throw BracketError("no sign change near the previous root");
            pt.result = solve_chi(spec, lambda, *br);
            pt.chi = pt.result->chi;
            prev = pt.chi;
        } catch (const std::exception& e) {
            pt.chi = NAN;
            pt.note = e.what();
        }
        if (report_all_roots) {
            for (const auto& r : solve_all_roots(spec, lambda))
                if (!pt.result || std::abs(r.chi - pt.chi) > 1e-9) pt.other_roots.push_back(r.chi);
        }
        out.push_back(std::move(pt));
    }
    return out;
}

std::pair<double, double> extremal_limit_check(const SurfaceSpec& spec, double lambda_far)
{
    const double chi_ext = extremal_chi(FunctionalContext::reference(spec));
    // roots approach the origin like chi_ext / lambda
    auto roots = solve_all_roots(spec, lambda_far, 30.0, 1e-8);
    std::vector<double> nonzero;
    for (const auto& r : roots)
        if (r.chi != 0.0 && r.certified()) nonzero.push_back(r.chi);
    if (nonzero.empty()) return {0.0, chi_ext};
    // the branch continuing the extremal limit is the one nearest the origin
    const double chi = *std::min_element(nonzero.begin(), nonzero.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    });
    return {lambda_far * chi, chi_ext};
}

FreezeEstimate lambda_freeze_estimate(const SurfaceSpec& spec, double lo, double hi, double tol)
{
    if (!(lo < hi)) throw std::invalid_argument("lambda_freeze_estimate: need lo < hi");
    const auto ctx = FunctionalContext::reference(spec);
    auto count = [&](double l) { return static_cast<int>(find_critical(ctx, l).size()); };
    FreezeEstimate est;
    est.count_lo = count(lo);
    est.count_hi = count(hi);
    if (est.count_lo > 1 || est.count_hi <= 1) {
        est.exhausted = true;
        est.value = NAN;
        return est;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (count(mid) > 1 ? hi : lo) = mid;
    }
    est.value = 0.5 * (lo + hi);
    return est;
}

PhaseDiagram phase_diagram(const SurfaceSpec& spec, const std::vector<double>& lambda_grid)
{
    const auto ctx = FunctionalContext::reference(spec);
    PhaseDiagram pd;
    pd.lambda_grid = lambda_grid;
    for (double l : lambda_grid) {
        std::vector<CriticalPoint> pts;
        for (double chi : find_critical(ctx, l)) {
            CriticalPoint cp;
            cp.chi = chi;
            cp.mu_vol = mu_vol(ctx, TorusWeight{chi}, l);
            cp.d2_log_vol = d2_log_vol(ctx, TorusWeight{chi}, l, TorusWeight{1.0});
            // mu_vol = -log Vol + const
            if (cp.d2_log_vol > 1e-10)
                cp.kind = CriticalKind::LocalMaxMu;
            else if (cp.d2_log_vol < -1e-10)
                cp.kind = CriticalKind::LocalMinMu;
            pts.push_back(cp);
        }
        double best = -INFINITY;
        for (const auto& p : pts) best = std::max(best, p.mu_vol);
        for (auto& p : pts) p.stable = p.mu_vol >= best - 1e-12 * std::max(1.0, std::abs(best));
        pd.critical_counts.push_back(static_cast<int>(pts.size()));
        pd.critical_points.push_back(std::move(pts));
    }
    for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
        if (pd.critical_counts[i - 1] == 1 && pd.critical_counts[i] > 1) {
            auto est = lambda_freeze_estimate(spec, lambda_grid[i - 1], lambda_grid[i]);
            if (!est.exhausted) pd.transition_lambda = est.value;
            break;
        }
    }
    return pd;
}

const char* to_string(CriticalKind k)
{
    switch (k) {
    case CriticalKind::LocalMaxMu: return "local_max_mu";
    case CriticalKind::LocalMinMu: return "local_min_mu";
    case CriticalKind::Degenerate: return "degenerate";
    }
    return "degenerate";
}

}  // namespace mucsc
