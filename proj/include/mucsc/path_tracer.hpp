#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mucsc/calabi_solver.hpp"
#include "mucsc/volume_functional.hpp"

namespace mucsc {

class PoleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PathPoint {
    double lambda = 0;
    double chi = 0;
    std::optional<SolveResult> result;  // empty when no root was found
    std::string note;                   // reason for a gap
    std::vector<double> other_roots;    // further roots at this lambda, when requested
};

/// lambda(chi) on the one-point blow-up of CP^2 (k = 1, g = 0, m = 2), from the
/// closed-form quotient; exact-coefficient series for |chi| < 1.
double lambda_of_chi_p2blowup(double chi);

/// The four functions in tau_0 = -(alpha + lambda beta) / (chi (gamma + lambda delta)).
struct Tau0Polynomials {
    double alpha, beta, gamma, delta;
};
Tau0Polynomials tau0_polynomials(double chi);

struct Tau0Report {
    double tau0 = 0;          // -a/b - 3/chi from the solved coefficients
    bool positive = false;
    Tau0Polynomials polys{};
    bool sign_pattern = false;  // alpha, gamma > 0 and beta, delta < 0
};
/// On CP^2 # -CP^2 with class 2pi(F + 2B).
Tau0Report tau0_positivity(double chi, double lambda);

/// Continuation in lambda; the first point uses seed_bracket, later points search
/// outward from the previous chi. Missing roots leave gaps.
std::vector<PathPoint> trace(const SurfaceSpec& spec, const std::vector<double>& lambda_grid,
                             std::pair<double, double> seed_bracket, bool report_all_roots = false);

/// (lambda chi(lambda), extremal chi) at lambda_far.
std::pair<double, double> extremal_limit_check(const SurfaceSpec& spec, double lambda_far);

struct FreezeEstimate {
    double value = 0;
    bool exhausted = false;  // no change of multiplicity inside the window
    int count_lo = 0, count_hi = 0;
};
/// Smallest lambda in [lo, hi] at which more than one critical point appears (bisection).
FreezeEstimate lambda_freeze_estimate(const SurfaceSpec& spec, double lo, double hi,
                                      double tol = 1e-5);

enum class CriticalKind { LocalMaxMu, LocalMinMu, Degenerate };

struct CriticalPoint {
    double chi = 0;
    double mu_vol = 0;
    double d2_log_vol = 0;
    CriticalKind kind = CriticalKind::Degenerate;
    bool stable = false;  // attains the largest mu_vol among the critical points
};

struct PhaseDiagram {
    std::vector<double> lambda_grid;
    std::vector<int> critical_counts;
    std::vector<std::vector<CriticalPoint>> critical_points;
    std::optional<double> transition_lambda;
};

PhaseDiagram phase_diagram(const SurfaceSpec& spec, const std::vector<double>& lambda_grid);

const char* to_string(CriticalKind k);

}  // namespace mucsc
