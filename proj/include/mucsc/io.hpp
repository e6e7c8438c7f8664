#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mucsc/calabi_solver.hpp"
#include "mucsc/energy.hpp"
#include "mucsc/path_tracer.hpp"
#include "mucsc/volume_functional.hpp"

namespace mucsc {

using json = nlohmann::json;

/// Nodes used when a profile is written into JSON (Chebyshev-Lobatto intervals).
inline constexpr int kProfileJsonIntervals = 48;

json surface_to_json(const SurfaceSpec& spec);
SurfaceSpec surface_from_json(const json& j);

/// Profiles are stored as phi, phi' samples; parsing yields a Sampled profile.
json profile_to_json(const MomentumProfile& p, int intervals = kProfileJsonIntervals);
MomentumProfile profile_from_json(const json& j);

/// Absent a, b become null.
json to_json(const SolveResult& r);
SolveResult solve_result_from_json(const json& j);

json to_json(const VolReport& r);
VolReport vol_report_from_json(const json& j);

json to_json(const PathPoint& p);
PathPoint path_point_from_json(const json& j);

json to_json(const PhaseDiagram& pd);

/// %.17g; NaN and infinities as nan, inf, -inf.
std::string fmt17(double v);

/// RFC-4180 writer: CRLF line ends, fields quoted when they contain a comma,
/// quote, or line break.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& os_;
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// tau, phi, dphi, s_mu on n + 1 equispaced points of the interval.
void write_profile_csv(std::ostream& os, const SurfaceSpec& spec, const MomentumProfile& p,
                       double chi, double lambda, int n = 200);
/// lambda, chi, a, b, c, residual, ode_sup_residual, positive. Gaps leave the solve fields empty.
void write_path_csv(std::ostream& os, const std::vector<PathPoint>& pts);
/// Same columns for a list of results.
void write_results_csv(std::ostream& os, const std::vector<SolveResult>& rs);
/// t, M_value, second_difference (empty at the two ends).
void write_energy_csv(std::ostream& os, const ConvexityTrace& tr);

}  // namespace mucsc
