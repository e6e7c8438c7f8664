#pragma once

#include <utility>
#include <vector>

#include "mucsc/calabi_solver.hpp"

namespace mucsc {

/// Geometry plus one admissible metric. `shift` adds a constant to the moment map,
/// tau -> tau + shift, so theta_xi -> theta_xi - chi * shift.
struct FunctionalContext {
    SurfaceSpec spec;
    MomentumProfile profile;
    double shift = 0.0;

    static FunctionalContext reference(const SurfaceSpec& spec);
};

struct VolReport {
    double chi = 0, lambda = 0;
    double log_vol = 0;
    double mu_vol = 0;
    double sbar = 0;
    double theta_bar = 0;
    double futaki_self = 0;
    double nu_self = 0;
    double lambda_xi = 0;  // NaN at chi = 0
};

class UndefinedAtOriginError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Weighted average of s + box(theta) minus lambda times the weighted average of theta.
double sbar(const FunctionalContext& ctx, TorusWeight w, double lambda);
/// log of the weighted mass of the DH measure, log int e^{theta} DH.
double log_weighted_mass(const FunctionalContext& ctx, TorusWeight w);
/// Weighted average of theta_xi.
double theta_bar(const FunctionalContext& ctx, TorusWeight w);
/// log Vol^lambda, with omega^n = n! DH.
double log_vol(const FunctionalContext& ctx, TorusWeight w, double lambda);
/// -log(Vol^lambda / (n! e^n)^lambda).
double mu_vol(const FunctionalContext& ctx, TorusWeight w, double lambda);
/// Closed form of mu_vol on CP^1 for the class parameter m.
double mu_vol_cp1_closed_form(double m, double chi, double lambda);

/// Weighted variance of theta_dir.
double nu(const FunctionalContext& ctx, TorusWeight base, TorusWeight dir);
/// Weighted average of hat-s^lambda times theta_dir.
double futaki(const FunctionalContext& ctx, TorusWeight base, TorusWeight dir, double lambda);
/// Directional derivative of log Vol^lambda (equals futaki).
double d_log_vol(const FunctionalContext& ctx, TorusWeight w, double lambda, TorusWeight dir);
/// Second directional derivative of log Vol^lambda along dir.
double d2_log_vol(const FunctionalContext& ctx, TorusWeight w, double lambda, TorusWeight dir);

double lambda_xi(const FunctionalContext& ctx, TorusWeight w);
/// |xi| lambda_xi on the ray of sign `ray_sign` at radius r (|xi|^2 = int theta^2 omega^n,
/// theta centred); r = 0 gives the boundary value.
double lambda_hat(const FunctionalContext& ctx, int ray_sign, double r);
/// chi of the unit-norm vector on the positive ray.
double unit_chi(const FunctionalContext& ctx);

/// Roots in chi of d_log_vol, scanned on the signed log grid over [1e-3, chi_max] plus 0.
std::vector<double> find_critical(const FunctionalContext& ctx, double lambda,
                                  double chi_max = 30.0);

double C_functional(const FunctionalContext& ctx, TorusWeight w);
/// Derivative of C in chi.
double dC_functional(const FunctionalContext& ctx, TorusWeight w);
double extremal_chi(const FunctionalContext& ctx);

/// t^{-1} log Vol^lambda(t xi) for xi with chi = dir.chi.
std::vector<double> properness_slope(const FunctionalContext& ctx, TorusWeight dir, double lambda,
                                     const std::vector<double>& t_list);

/// kappa^{-1} W(kappa eta, kappa^{-1}); kappa = 0 gives the closed limit.
double W_check(const FunctionalContext& ctx, TorusWeight eta, double kappa);
/// The closed kappa -> 0 limit of W_check.
double W_check_limit(const FunctionalContext& ctx, TorusWeight eta);

/// (weighted avg of (s - s_) theta^2 + 2|zeta^J|^2) / nu_0 at the origin, for direction dir.
double fano_ratio(const FunctionalContext& ctx, TorusWeight dir);
/// Minimum of fano_ratio over the given directions.
double fano_threshold(const FunctionalContext& ctx, const std::vector<double>& dirs);

VolReport vol_report(const FunctionalContext& ctx, TorusWeight w, double lambda);

}  // namespace mucsc
