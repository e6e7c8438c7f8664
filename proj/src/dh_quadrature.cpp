#include "mucsc/dh_quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <sstream>

namespace mucsc {

namespace {

struct GLTable {
    std::vector<double> x, w;  // on [-1, 1]
};

const GLTable& gl16()
{
    static const GLTable table = [] {
        GLTable t;
        std::unique_ptr<gsl_integration_glfixed_table, void (*)(gsl_integration_glfixed_table*)>
            g(gsl_integration_glfixed_table_alloc(kNodesPerPanel), gsl_integration_glfixed_table_free);
        for (int i = 0; i < kNodesPerPanel; ++i) {
            double xi = 0, wi = 0;
            gsl_integration_glfixed_point(-1.0, 1.0, static_cast<size_t>(i), &xi, &wi, g.get());
            t.x.push_back(xi);
            t.w.push_back(wi);
        }
        return t;
    }();
    return table;
}

double poly_eval(const std::vector<double>& c, double x)
{
    double s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
    return s;
}

double max_log_weight(const DHMeasure& m, double chi)
{
    return std::max(-chi * m.tau_min, -chi * m.tau_max);
}

std::vector<std::pair<double, double>> panel_edges(const DHMeasure& m, int panels)
{
    std::vector<std::pair<double, double>> edges;
    const double h = m.length() / panels;
    auto push_split = [&](double a, double b, int parts) {
        for (int j = 0; j < parts; ++j)
            edges.emplace_back(a + (b - a) * j / parts, a + (b - a) * (j + 1) / parts);
    };
    for (int p = 0; p < panels; ++p) {
        double a = m.tau_min + h * p;
        double b = (p == panels - 1) ? m.tau_max : m.tau_min + h * (p + 1);
        push_split(a, b, (p == 0 || p == panels - 1) ? 4 : 1);
    }
    return edges;
}

int initial_panels(const DHMeasure& m, double chi)
{
    // keep |chi| * panel width below ~2 so each panel sees a tame exponential
    int p = kDefaultPanels;
    while (p < kMaxPanels && std::abs(chi) * m.length() / p > 2.0) p *= 2;
    return p;
}

}  // namespace

double DHMeasure::density(double tau) const { return poly_eval(density_coeffs, tau); }

double DHMeasure::total_mass() const { return moment(*this, TorusWeight{0.0}, 0); }

void DHMeasure::validate() const
{
    if (!(tau_min < tau_max)) throw std::invalid_argument("DHMeasure: tau_min must be < tau_max");
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("DHMeasure: scale must be positive");
    if (density_coeffs.empty()) throw std::invalid_argument("DHMeasure: empty density");
    if (density_coeffs.size() > 2) throw std::invalid_argument("DHMeasure: density degree must be <= 1");
    for (int i = 1; i < 1000; ++i) {
        double t = tau_min + (tau_max - tau_min) * i / 1000.0;
        if (!(density(t) > 0.0)) throw std::invalid_argument("DHMeasure: density not positive");
    }
    if (density(tau_min) < 0.0 || density(tau_max) < 0.0)
        throw std::invalid_argument("DHMeasure: density negative at an endpoint");
}

double ScaledValue::value() const { return mantissa * std::exp(log_scale); }

double WeightedRule::mass() const
{
    double s = 0.0;
    for (double wi : w) s += wi;
    return s;
}

double WeightedRule::log_mass() const { return std::log(mass()) + log_shift; }

WeightedRule make_rule(const DHMeasure& measure, TorusWeight wt, int panels)
{
    const auto& gl = gl16();
    WeightedRule r;
    r.panels = panels;
    r.log_shift = max_log_weight(measure, wt.chi);
    for (auto [a, b] : panel_edges(measure, panels)) {
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int i = 0; i < kNodesPerPanel; ++i) {
            const double t = mid + half * gl.x[i];
            r.tau.push_back(t);
            r.w.push_back(measure.scale * half * gl.w[i] * measure.density(t) *
                          std::exp(-wt.chi * t - r.log_shift));
        }
    }
    return r;
}

WeightedRule adaptive_rule(const DHMeasure& measure, TorusWeight wt)
{
    int p = initial_panels(measure, wt.chi);
    WeightedRule cur = make_rule(measure, wt, p);
    const double c = 0.5 * (measure.tau_min + measure.tau_max);
    auto stats = [&](const WeightedRule& r) {
        const double m0 = r.mass();
        const double m1 = r.sum([&](double t) { return t - c; }) / m0;
        const double m2 = r.sum([&](double t) { return (t - c) * (t - c); }) / m0;
        return std::array<double, 3>{m0, m1, m2};
    };
    auto s0 = stats(cur);
    while (p < kMaxPanels) {
        WeightedRule next = make_rule(measure, wt, 2 * p);
        auto s1 = stats(next);
        const double L = measure.length();
        bool ok = std::abs(s1[0] - s0[0]) <= 1e-14 * std::abs(s1[0]) &&
                  std::abs(s1[1] - s0[1]) <= 1e-14 * L && std::abs(s1[2] - s0[2]) <= 1e-14 * L * L;
        if (ok) return cur;
        cur = std::move(next);
        s0 = s1;
        p *= 2;
    }
    return cur;
}

ScaledValue integrate_weighted_scaled(const DHMeasure& measure,
                                      const std::function<double(double)>& f, TorusWeight wt)
{
    struct Est {
        ScaledValue v;
        double abs_mass;
    };
    auto eval = [&](int panels) {
        WeightedRule r = make_rule(measure, wt, panels);
        double s = 0.0, a = 0.0;
        for (std::size_t i = 0; i < r.tau.size(); ++i) {
            const double v = f(r.tau[i]);
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "integrate_weighted: non-finite integrand at tau = " << r.tau[i];
                throw EvaluationError(os.str(), r.tau[i]);
            }
            s += r.w[i] * v;
            a += r.w[i] * std::abs(v);
        }
        return Est{ScaledValue{s, r.log_shift}, a};
    };
    int p = initial_panels(measure, wt.chi);
    Est prev = eval(p);
    while (p < kMaxPanels) {
        Est next = eval(2 * p);
        // relative agreement, with a floor for integrands that cancel to roundoff
        const double tol = kQuadratureRelTol * std::abs(next.v.mantissa) + 1e-15 * next.abs_mass;
        if (std::abs(next.v.mantissa - prev.v.mantissa) <= tol) return next.v;
        prev = next;
        p *= 2;
    }
    return prev.v;
}

double integrate_weighted(const DHMeasure& measure, const std::function<double(double)>& f,
                          TorusWeight wt)
{
    return integrate_weighted_scaled(measure, f, wt).value();
}

double exp_power_integral(double A, double B, double chi, int n)
{
    const double R = std::max(std::abs(A), std::abs(B));
    const double z = std::abs(chi) * R;
    auto series_term = [&](int k, double fact) {
        const int p = n + k + 1;
        return std::pow(-chi, k) / fact * (std::pow(B, p) - std::pow(A, p)) / p;
    };
    if (z < kChiSeriesThreshold) {
        double s = 0.0, fact = 1.0;
        for (int k = 0; k < 6; ++k) {
            if (k > 0) fact *= k;
            s += series_term(k, fact);
        }
        return s;
    }
    if (z < 2.0) {
        double s = 0.0, fact = 1.0;
        for (int k = 0; k < 80; ++k) {
            if (k > 0) fact *= k;
            const double t = series_term(k, fact);
            s += t;
            if (k > 4 && std::abs(t) < 1e-18 * std::abs(s)) break;
        }
        return s;
    }
    const double eA = std::exp(-chi * A), eB = std::exp(-chi * B);
    double I = (eA - eB) / chi;
    for (int j = 1; j <= n; ++j)
        I = (std::pow(A, j) * eA - std::pow(B, j) * eB + j * I) / chi;
    return I;
}

double moment(const DHMeasure& measure, TorusWeight wt, int order)
{
    if (order < 0 || order > 4) throw std::invalid_argument("moment: order must be in [0, 4]");
    double s = 0.0;
    for (std::size_t i = 0; i < measure.density_coeffs.size(); ++i)
        s += measure.density_coeffs[i] *
             exp_power_integral(measure.tau_min, measure.tau_max, wt.chi, order + static_cast<int>(i));
    return measure.scale * s;
}

double barycenter(const DHMeasure& measure, TorusWeight wt)
{
    return moment(measure, wt, 1) / moment(measure, wt, 0);
}

}  // namespace mucsc
