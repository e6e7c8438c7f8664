#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mucsc {

/// Pushforward of the Liouville measure (omega^n/n!) to the moment interval:
/// scale * p(tau) dtau on [tau_min, tau_max], p given by ascending coefficients.
struct DHMeasure {
    double tau_min = 0.0;
    double tau_max = 1.0;
    std::vector<double> density_coeffs{1.0};
    double scale = 1.0;

    double density(double tau) const;
    double length() const { return tau_max - tau_min; }
    double total_mass() const;
    /// Throws std::invalid_argument when the invariants fail.
    void validate() const;
};

/// Exponential weight e^{-chi tau}; theta_xi = -chi tau in momentum coordinates.
struct TorusWeight {
    double chi = 0.0;
};

class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, double node)
        : std::runtime_error(what), node_(node) {}
    double node() const { return node_; }

private:
    double node_;
};

/// A value stored as mantissa * exp(log_scale), so huge weights do not overflow.
struct ScaledValue {
    double mantissa = 0.0;
    double log_scale = 0.0;
    double value() const;
};

/// Composite Gauss-Legendre rule with the weight folded into the node weights.
/// True weight at node i is w[i] * exp(log_shift).
struct WeightedRule {
    std::vector<double> tau;
    std::vector<double> w;
    double log_shift = 0.0;
    int panels = 0;

    double mass() const;
    double log_mass() const;

    template <class F>
    double sum(F&& f) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < tau.size(); ++i) s += w[i] * f(tau[i]);
        return s;
    }
    /// Average of f under the normalized weighted measure.
    template <class F>
    double expect(F&& f) const
    {
        return sum(f) / mass();
    }
};

inline constexpr int kNodesPerPanel = 16;
inline constexpr int kDefaultPanels = 64;
inline constexpr int kMaxPanels = 4096;
inline constexpr double kQuadratureRelTol = 1e-12;
inline constexpr double kChiSeriesThreshold = 1e-6;

/// Uniform panels, the two endpoint panels split 4x.
WeightedRule make_rule(const DHMeasure& measure, TorusWeight w, int panels);

/// Rule whose panel count is doubled until the weighted moments 0..2 settle.
WeightedRule adaptive_rule(const DHMeasure& measure, TorusWeight w);

/// scale * int f p e^{-chi tau}, panel doubling until successive results agree.
double integrate_weighted(const DHMeasure& measure, const std::function<double(double)>& f,
                          TorusWeight w);
ScaledValue integrate_weighted_scaled(const DHMeasure& measure,
                                      const std::function<double(double)>& f, TorusWeight w);

/// Exact moments scale * int tau^order p e^{-chi tau}, order <= 4.
double moment(const DHMeasure& measure, TorusWeight w, int order);
double barycenter(const DHMeasure& measure, TorusWeight w);

/// int_A^B tau^n e^{-chi tau} dtau in closed form.
double exp_power_integral(double A, double B, double chi, int n);

}  // namespace mucsc
