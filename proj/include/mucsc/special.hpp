#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace mucsc {

class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// phi_k'(z) where phi_k(z) = sum_i z^i/(i+k)!; series, intended for |z| <= 3.
double phi_function_derivative(int k, double z);

/// Root of f in [a, b] (TOMS 748) to |dx| <= xtol. Throws BracketError without a sign change.
double bracketed_root(const std::function<double(double)>& f, double a, double b,
                      double xtol = 1e-12);

/// Same, reusing already computed endpoint values.
double bracketed_root(const std::function<double(double)>& f, double a, double b, double fa,
                      double fb, double xtol);

/// Log-spaced samples of |x| in [lo, hi] with the given density, both signs,
/// optionally including 0; sorted ascending.
std::vector<double> signed_log_grid(double lo, double hi, int per_decade, bool include_zero);

/// All roots of f detected on grid: sign changes refined by bracketed_root, plus
/// grid points where |f| <= zero_tol.
std::vector<double> scan_roots(const std::function<double(double)>& f,
                               const std::vector<double>& grid, double zero_tol,
                               double xtol = 1e-12);

/// Barycentric interpolation on the Chebyshev-Lobatto grid of [a, b].
class ChebyshevLobatto {
public:
    ChebyshevLobatto() = default;
    ChebyshevLobatto(double a, double b, int n);

    const std::vector<double>& nodes() const { return x_; }
    double a() const { return a_; }
    double b() const { return b_; }

    double interpolate(const std::vector<double>& values, double t) const;
    /// Value and first derivative of the interpolant.
    std::pair<double, double> interpolate_d(const std::vector<double>& values, double t) const;

private:
    double a_ = 0, b_ = 1;
    std::vector<double> x_, w_;
};

}  // namespace mucsc
