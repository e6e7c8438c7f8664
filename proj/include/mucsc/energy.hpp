#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mucsc/calabi_solver.hpp"

namespace mucsc {

class PathDegeneracyError : public std::runtime_error {
public:
    PathDegeneracyError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
    double t() const { return t_; }

private:
    double t_;
};

/// Values of a smooth function h and its first four derivatives.
struct SmoothValue {
    double h = 0, d1 = 0, d2 = 0, d3 = 0, d4 = 0;
};

/// A smooth function on [0, 2m] given by a Chebyshev series of h'' (integrated twice,
/// h(0) = h'(0) = 0) plus an affine part c0 + c1 tau.
class SmoothPart {
public:
    SmoothPart() = default;
    static SmoothPart zero(double m);
    static SmoothPart affine(double m, double c0, double c1);
    static SmoothPart from_second_derivative(double m, const std::function<double(double)>& h2,
                                             int order = 96);

    double m() const { return m_; }
    /// Copy with c0 + c1 tau added.
    SmoothPart plus_affine(double c0, double c1) const;
    SmoothValue eval(double tau) const;
    /// Largest magnitude among the last few Chebyshev coefficients of h''.
    double tail() const;
    bool has_series() const { return s_ != nullptr; }

private:
    struct Series;
    double m_ = 1.0;
    double c0_ = 0, c1_ = 0;
    std::shared_ptr<const Series> s_;
};

/// Guillemin reference G plus a smooth part: U = G + h on [0, 2m],
/// G = (1/2)[tau log tau + (2m - tau) log(2m - tau)], so G'' = 1/phi_FS.
class SymplecticPotential {
public:
    SymplecticPotential() = default;
    SymplecticPotential(double m, SmoothPart h) : m_(m), h_(std::move(h)) {}
    static SymplecticPotential fubini_study(double m) { return {m, SmoothPart::zero(m)}; }

    double m() const { return m_; }
    const SmoothPart& smooth() const { return h_; }
    double U(double tau) const;
    double dU(double tau) const;
    ProfileValue profile(double tau) const;

private:
    double m_ = 1.0;
    SmoothPart h_;
};

double guillemin(double m, double tau);
double guillemin_d1(double m, double tau);

/// phi = 1/U'' with the singular part of U fixed to the Guillemin reference.
SymplecticPotential potential_from_profile(const MomentumProfile& profile, double m, int order = 96);
/// Sampled profile on a Chebyshev-Lobatto grid of n intervals.
MomentumProfile potential_to_profile(const SymplecticPotential& u, int n = 128);

/// Profile of G + h from the derivatives of h, without endpoint cancellation.
ProfileValue profile_from_smooth(double m, const SmoothValue& h, double tau);

/// t -> U_t = G + sum_i w_i(t) h_i with weights and their t-derivatives.
struct PotentialPath {
    double m = 1.0;
    std::vector<SmoothPart> parts;
    std::function<void(double t, std::vector<double>& w, std::vector<double>& wdot)> weights;

    static PotentialPath linear(const SymplecticPotential& u0, const SymplecticPotential& u1);
    /// Linear path plus t(1-t) bump.
    static PotentialPath with_bump(const SymplecticPotential& u0, const SymplecticPotential& u1,
                                   const SmoothPart& bump);
    /// U_s = U_0 + chi_zeta s tau: pull-back along the flow of zeta.
    static PotentialPath vector_field(const SymplecticPotential& u0, double chi_zeta);
    /// Adds c(t) to the velocity (a t-dependent constant gauge).
    PotentialPath with_gauge(std::function<double(double)> c) const;

    SymplecticPotential at(double t) const;
};

struct EnergyOptions {
    int t_nodes = 32;
    int tau_panels = 32;
};

/// Path-integral definition, integrated over t in [0, t_end].
double muk_energy_path(const SurfaceSpec& spec, TorusWeight w, double lambda,
                       const PotentialPath& path, double t_end = 1.0, EnergyOptions opt = {});

struct ChenTianTerms {
    double entropy = 0, ricci = 0, sbar_term = 0, lambda_term = 0;
    double total() const { return entropy + ricci + sbar_term + lambda_term; }
};
/// Entropy plus the remaining t-integrals, along the linear path from u0 to u1.
ChenTianTerms muk_energy_chen_tian(const SurfaceSpec& spec, TorusWeight w, double lambda,
                                   const SymplecticPotential& u0, const SymplecticPotential& u1,
                                   EnergyOptions opt = {});

/// Derivative of the energy at u in the direction U -> U + s dh.
double muk_energy_derivative(const SurfaceSpec& spec, TorusWeight w, double lambda,
                             const SymplecticPotential& u, const SmoothPart& dh,
                             EnergyOptions opt = {});

/// Energies along the linear path at the given (uniform) t values, and their second differences.
struct ConvexityTrace {
    std::vector<double> t, energy, second_difference;
};
ConvexityTrace geodesic_convexity(const SurfaceSpec& spec, TorusWeight w, double lambda,
                                  const SymplecticPotential& u0, const SymplecticPotential& u1,
                                  const std::vector<double>& t_grid, EnergyOptions opt = {});

/// sup over the t x tau grid of |u_tt - tau_t^2 / phi_t| at fixed rho for the linear path.
double geodesic_residual(const SymplecticPotential& u0, const SymplecticPotential& u1,
                         int nt = 11, int ntau = 41);

/// tau with U'(tau) = rho (Newton in the logit variable).
double invert_gradient(const PotentialPath& path, double t, double rho);
double invert_gradient(const SymplecticPotential& u, double rho);

}  // namespace mucsc
