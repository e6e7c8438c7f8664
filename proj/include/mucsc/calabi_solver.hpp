#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mucsc/dh_quadrature.hpp"
#include "mucsc/special.hpp"

namespace mucsc {

enum class SurfaceKind { CP1, Ruled };

/// Boundary data for phi. The anchor end carries phi = 0 and a prescribed slope;
/// the free end carries phi = 0, and its slope target is the shooting residual.
struct BoundaryTargets {
    double anchor_tau = 0.0;
    double free_tau = 0.0;
    double dphi_anchor = 0.0;
    double dphi_free = 0.0;
};

/// CP^1 with interval (0, 2m), or the ruled surface P(L + O) over a genus g curve,
/// deg L = k, class 2pi(F + mB), interval (-m, 0). psi = (1 - k tau) phi.
struct SurfaceSpec {
    SurfaceKind kind = SurfaceKind::CP1;
    double m = 1.0;
    int k = 0;
    int genus = 0;
    double l_g = 0.0;
    DHMeasure measure;
    BoundaryTargets bc;
    double chi_convention = 2.0 * M_PI;
    int complex_dim = 1;

    static SurfaceSpec cp1(double m);
    static SurfaceSpec ruled(int k, int genus, double m);

    double tau_min() const { return measure.tau_min; }
    double tau_max() const { return measure.tau_max; }
    double length() const { return measure.length(); }
    /// Effective degree in p(tau) = 1 - k tau (0 on CP^1).
    double k_eff() const { return kind == SurfaceKind::Ruled ? static_cast<double>(k) : 0.0; }
    /// Curvature of the base curve entering s (0 on CP^1).
    double lg_eff() const { return kind == SurfaceKind::Ruled ? l_g : 0.0; }
    double p(double tau) const { return 1.0 - k_eff() * tau; }
    double x_of_chi(double chi) const { return chi / chi_convention; }
    double chi_of_x(double x) const { return x * chi_convention; }
    std::string name() const;
};

struct ProfileValue {
    double phi = 0, dphi = 0, d2phi = 0;
};

class DegenerateParameterError : public std::runtime_error {
public:
    DegenerateParameterError(const std::string& what, double lambda, double chi)
        : std::runtime_error(what), lambda_(lambda), chi_(chi) {}
    double lambda() const { return lambda_; }
    double chi() const { return chi_; }

private:
    double lambda_, chi_;
};

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact solution of (d/dtau - chi)^2 psi = p(tau)(chi lambda tau - c) + l_g, stored as
/// psi = A E0 + B E1 + Q(tau) with E0 = e^{chi(tau - tau_star)}, E1 = (tau - tau_star) E0.
/// Q is the polynomial particular solution when |chi| L >= 2, otherwise the particular
/// solution with Q(0) = Q'(0) = 0 written through phi-functions (stable as chi -> 0).
struct ClosedFormData {
    double chi = 0, lambda = 0, c = 0;
    double k = 0, l_g = 0;
    double A = 0, B = 0, tau_star = 0;
    bool small_regime = true;
    std::array<double, 3> r{};  // forcing polynomial coefficients (c already substituted)
    std::optional<double> a, b; // coefficients of e^{chi tau}, tau e^{chi tau} (chi != 0)

    /// psi and its first three derivatives.
    std::array<double, 4> psi(double tau) const;
};

class MomentumProfile {
public:
    enum class Kind { ClosedForm, Polynomial, Sampled };

    /// phi = psi / (1 - k tau), psi given by ascending coefficients.
    static MomentumProfile polynomial(double tau_min, double tau_max, std::vector<double> psi_coeffs,
                                      double k = 0.0);
    static MomentumProfile closed_form(double tau_min, double tau_max, ClosedFormData data);
    /// phi and phi' sampled on a Chebyshev-Lobatto grid.
    static MomentumProfile sampled(ChebyshevLobatto grid, std::vector<double> phi,
                                   std::vector<double> dphi);

    /// Fubini-Study type reference: tau(2m - tau)/m on CP^1, -tau(tau + m)/m on ruled.
    static MomentumProfile reference(const SurfaceSpec& spec);

    Kind kind() const { return kind_; }
    double tau_min() const { return tau_min_; }
    double tau_max() const { return tau_max_; }
    ProfileValue eval(double tau) const;
    const ClosedFormData* closed_form_data() const { return cf_.get(); }
    const std::vector<double>& psi_coeffs() const { return poly_; }
    double poly_k() const { return k_; }

private:
    Kind kind_ = Kind::Polynomial;
    double tau_min_ = 0, tau_max_ = 1;
    std::vector<double> poly_;
    double k_ = 0;
    std::shared_ptr<const ClosedFormData> cf_;
    std::shared_ptr<const ChebyshevLobatto> grid_;
    std::vector<double> s_phi_, s_dphi_;
};

struct PositivityCertificate {
    double min_phi = 0;
    double argmin_tau = 0;
    std::vector<double> inflection_points;
    std::optional<double> psi3_zero;  // tau_0 where psi''' vanishes (closed form only)
    bool analytic = false;            // false: dense-scan fallback only
    bool verdict = false;
};

struct SolveResult {
    double lambda = 0, chi = 0;
    std::optional<double> a, b;
    double c = 0;
    double residual = 0;
    double ode_sup_residual = 0;
    PositivityCertificate positivity;
    MomentumProfile profile;

    bool certified() const
    {
        return std::abs(residual) <= 1e-10 && ode_sup_residual <= 1e-8 && positivity.verdict;
    }
};

struct Coefficients {
    std::optional<double> a, b;
    double c = 0;
};

inline constexpr double kChiBranchThreshold = 1e-6;
inline constexpr double kConditionLimit = 1e12;

/// mu^lambda scalar curvature in momentum coordinates.
double mu_scalar_curvature(const SurfaceSpec& spec, const MomentumProfile& profile, TorusWeight w,
                           double lambda, double tau);
/// Same, from raw profile values.
double mu_scalar_curvature(const SurfaceSpec& spec, const ProfileValue& v, double chi,
                           double lambda, double tau);

/// phi = a f1 + b f2 + c f3 + f4 solves the constant-curvature equation with constant c.
struct SolutionBasis {
    SurfaceSpec spec;
    double lambda = 0, chi = 0;
    /// Values, first and second derivatives of f1..f4 at tau.
    std::array<ProfileValue, 4> eval(double tau) const;
};
SolutionBasis solution_basis(const SurfaceSpec& spec, double lambda, TorusWeight w);

/// Exact solution data from the 3x3 boundary system.
ClosedFormData solve_system(const SurfaceSpec& spec, double lambda, double chi);
/// All four boundary conditions imposed, with lambda as the fourth unknown (chi != 0).
/// Well conditioned even where lambda(chi) is exponentially sensitive.
ClosedFormData solve_system_all_bc(const SurfaceSpec& spec, double chi);
Coefficients solve_coefficients(const SurfaceSpec& spec, double lambda, TorusWeight w);
MomentumProfile solve_profile(const SurfaceSpec& spec, double lambda, TorusWeight w);

/// phi'(free end) - target; |chi| < 1e-6 uses the polynomial branch.
double residual(const SurfaceSpec& spec, double lambda, TorusWeight w);
/// The lambda that zeroes the residual at chi (via solve_system_all_bc).
double lambda_on_residual_curve(const SurfaceSpec& spec, double chi);

SolveResult assemble_result(const SurfaceSpec& spec, double lambda, double chi);
SolveResult solve_chi(const SurfaceSpec& spec, double lambda, std::pair<double, double> bracket);
SolveResult chi_zero_branch(const SurfaceSpec& spec, double lambda);
/// Every root on the log-spaced scan over |chi| in [chi_min, chi_max] (plus chi = 0).
std::vector<SolveResult> solve_all_roots(const SurfaceSpec& spec, double lambda,
                                         double chi_max = 30.0, double chi_min = 1e-3);

PositivityCertificate positivity_certificate(const MomentumProfile& profile, const SurfaceSpec& spec);
double ode_sup_residual(const SurfaceSpec& spec, const MomentumProfile& profile, double chi,
                        double lambda, double c);

/// sup over tau in [0, 1.8] of |phi - 2 tau| on CP^1 (m = 1), lambda on the residual curve.
double flat_disk_limit_gap(const SurfaceSpec& spec, double chi);

}  // namespace mucsc
