#include "mucsc/special.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace mucsc {

double phi_function_derivative(int k, double z)
{
    // sum_{i>=1} i z^{i-1} / (i+k)!
    double fact = 1.0;
    for (int j = 2; j <= k + 1; ++j) fact *= j;  // (1+k)!
    double zp = 1.0, s = 0.0;
    for (int i = 1; i < 60; ++i) {
        const double term = i * zp / fact;
        s += term;
        if (i > 3 && std::abs(term) < 1e-18 * std::abs(s)) break;
        zp *= z;
        fact *= (i + k + 1);
    }
    return s;
}

double bracketed_root(const std::function<double(double)>& f, double a, double b, double fa,
                      double fb, double xtol)
{
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw BracketError("bracketed_root: no sign change on bracket");
    auto tol = [xtol](double x, double y) { return std::abs(x - y) <= xtol; };
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    // return the endpoint with the smaller residual
    const double fl = f(r.first), fr = f(r.second);
    return std::abs(fl) <= std::abs(fr) ? r.first : r.second;
}

double bracketed_root(const std::function<double(double)>& f, double a, double b, double xtol)
{
    return bracketed_root(f, a, b, f(a), f(b), xtol);
}

std::vector<double> signed_log_grid(double lo, double hi, int per_decade, bool include_zero)
{
    const double decades = std::log10(hi / lo);
    const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
    std::vector<double> pos(n);
    for (int i = 0; i < n; ++i) pos[i] = lo * std::pow(10.0, decades * i / (n - 1));
    std::vector<double> g;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) g.push_back(-*it);
    if (include_zero) g.push_back(0.0);
    g.insert(g.end(), pos.begin(), pos.end());
    return g;
}

std::vector<double> scan_roots(const std::function<double(double)>& f,
                               const std::vector<double>& grid, double zero_tol, double xtol)
{
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = f(grid[i]);
    std::vector<double> roots;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(vals[i]) <= zero_tol) {
            roots.push_back(grid[i]);
            continue;
        }
        if (i + 1 < grid.size() && std::abs(vals[i + 1]) > zero_tol &&
            (vals[i] > 0) != (vals[i + 1] > 0))
        {
            // brackets away from 0 get a tolerance relative to their size
            double tol = xtol;
            if ((grid[i] > 0) == (grid[i + 1] > 0) && grid[i] != 0.0 && grid[i + 1] != 0.0)
                tol = std::min(xtol, 1e-13 * std::min(std::abs(grid[i]), std::abs(grid[i + 1])));
            roots.push_back(bracketed_root(f, grid[i], grid[i + 1], vals[i], vals[i + 1], tol));
        }
    }
    return roots;
}

ChebyshevLobatto::ChebyshevLobatto(double a, double b, int n) : a_(a), b_(b), x_(n + 1), w_(n + 1)
{
    for (int j = 0; j <= n; ++j) {
        // ascending order
        const double c = -std::cos(M_PI * j / n);
        x_[j] = 0.5 * (a + b) + 0.5 * (b - a) * c;
        w_[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
    }
    x_.front() = a;
    x_.back() = b;
}

double ChebyshevLobatto::interpolate(const std::vector<double>& f, double t) const
{
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
        const double d = t - x_[j];
        if (d == 0.0) return f[j];
        const double c = w_[j] / d;
        num += c * f[j];
        den += c;
    }
    return num / den;
}

std::pair<double, double> ChebyshevLobatto::interpolate_d(const std::vector<double>& f,
                                                          double t) const
{
    const double near = 1e-11 * (b_ - a_);
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (std::abs(t - x_[i]) <= near) {
            double d = 0.0;
            for (std::size_t j = 0; j < x_.size(); ++j)
                if (j != i) d += (w_[j] / w_[i]) * (f[j] - f[i]) / (x_[i] - x_[j]);
            return {f[i], d};
        }
    }
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
        const double c = w_[j] / (t - x_[j]);
        num += c * f[j];
        den += c;
    }
    const double p = num / den;
    double dn = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
        const double d = t - x_[j];
        dn += w_[j] * (p - f[j]) / (d * d);
    }
    return {p, dn / den};
}

}  // namespace mucsc
