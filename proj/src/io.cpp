#include "mucsc/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace mucsc {

namespace {

json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> num_opt(const json& j)
{
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

// NaN is not representable in JSON; it travels as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num_or_nan(const json& j) { return j.is_null() ? NAN : j.get<double>(); }

json measure_to_json(const DHMeasure& m)
{
    return {{"tau_min", m.tau_min}, {"tau_max", m.tau_max}, {"density_coeffs", m.density_coeffs}, {"scale", m.scale}};
}

json certificate_to_json(const PositivityCertificate& c)
{
    return {{"min_phi", c.min_phi},
            {"argmin_tau", c.argmin_tau},
            {"inflection_points", c.inflection_points},
            {"psi3_zero", opt_num(c.psi3_zero)},
            {"analytic", c.analytic},
            {"verdict", c.verdict}};
}

PositivityCertificate certificate_from_json(const json& j)
{
    PositivityCertificate c;
    c.min_phi = j.at("min_phi").get<double>();
    c.argmin_tau = j.at("argmin_tau").get<double>();
    c.inflection_points = j.at("inflection_points").get<std::vector<double>>();
    c.psi3_zero = num_opt(j.at("psi3_zero"));
    c.analytic = j.at("analytic").get<bool>();
    c.verdict = j.at("verdict").get<bool>();
    return c;
}

std::string field(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

std::vector<std::string> result_fields(const SolveResult& r)
{
    return {fmt17(r.lambda), fmt17(r.chi),           field(r.a),        field(r.b),
            fmt17(r.c),      fmt17(r.residual),      fmt17(r.ode_sup_residual),
            r.positivity.verdict ? "1" : "0"};
}

const std::vector<std::string> kPathHeader{"lambda", "chi", "a", "b", "c", "residual", "ode_sup_residual", "positive"};

}  // namespace

json surface_to_json(const SurfaceSpec& spec)
{
    json j;
    if (spec.kind == SurfaceKind::CP1) {
        j = {{"kind", "cp1"}, {"m", spec.m}};
    } else {
        j = {{"kind", "ruled"}, {"k", spec.k}, {"genus", spec.genus}, {"m", spec.m}};
    }
    j["measure"] = measure_to_json(spec.measure);
    return j;
}

SurfaceSpec surface_from_json(const json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    SurfaceSpec spec;
    if (kind == "cp1") {
        spec = SurfaceSpec::cp1(j.at("m").get<double>());
    } else if (kind == "ruled") {
        spec = SurfaceSpec::ruled(j.at("k").get<int>(), j.at("genus").get<int>(), j.at("m").get<double>());
    } else {
        throw std::invalid_argument("surface.kind must be \"cp1\" or \"ruled\"");
    }
    if (j.contains("measure")) {
        const json& mj = j.at("measure");
        DHMeasure m;
        m.tau_min = mj.at("tau_min").get<double>();
        m.tau_max = mj.at("tau_max").get<double>();
        m.density_coeffs = mj.at("density_coeffs").get<std::vector<double>>();
        m.scale = mj.at("scale").get<double>();
        m.validate();
        if (m.tau_min != spec.tau_min() || m.tau_max != spec.tau_max())
            throw std::invalid_argument("surface.measure: interval must match the surface");
        spec.measure = m;
    }
    return spec;
}

json profile_to_json(const MomentumProfile& p, int intervals)
{
    ChebyshevLobatto grid(p.tau_min(), p.tau_max(), intervals);
    std::vector<double> phi, dphi;
    for (double t : grid.nodes()) {
        const ProfileValue v = p.eval(t);
        phi.push_back(v.phi);
        dphi.push_back(v.dphi);
    }
    return {{"tau_min", p.tau_min()}, {"tau_max", p.tau_max()}, {"intervals", intervals}, {"phi", phi}, {"dphi", dphi}};
}

MomentumProfile profile_from_json(const json& j)
{
    ChebyshevLobatto grid(j.at("tau_min").get<double>(), j.at("tau_max").get<double>(), j.at("intervals").get<int>());
    return MomentumProfile::sampled(std::move(grid), j.at("phi").get<std::vector<double>>(),
                                    j.at("dphi").get<std::vector<double>>());
}

json to_json(const SolveResult& r)
{
    return {{"lambda", r.lambda},
            {"chi", r.chi},
            {"a", opt_num(r.a)},
            {"b", opt_num(r.b)},
            {"c", r.c},
            {"residual", r.residual},
            {"ode_sup_residual", r.ode_sup_residual},
            {"certified", r.certified()},
            {"positivity", certificate_to_json(r.positivity)},
            {"profile", profile_to_json(r.profile)}};
}

SolveResult solve_result_from_json(const json& j)
{
    SolveResult r;
    r.lambda = j.at("lambda").get<double>();
    r.chi = j.at("chi").get<double>();
    r.a = num_opt(j.at("a"));
    r.b = num_opt(j.at("b"));
    r.c = j.at("c").get<double>();
    r.residual = j.at("residual").get<double>();
    r.ode_sup_residual = j.at("ode_sup_residual").get<double>();
    r.positivity = certificate_from_json(j.at("positivity"));
    r.profile = profile_from_json(j.at("profile"));
    return r;
}

json to_json(const VolReport& r)
{
    return {{"chi", r.chi},           {"lambda", r.lambda},   {"log_vol", r.log_vol},
            {"mu_vol", r.mu_vol},     {"sbar", r.sbar},       {"theta_bar", r.theta_bar},
            {"futaki_self", r.futaki_self}, {"nu_self", r.nu_self}, {"lambda_xi", num(r.lambda_xi)}};
}

VolReport vol_report_from_json(const json& j)
{
    VolReport r;
    r.chi = j.at("chi").get<double>();
    r.lambda = j.at("lambda").get<double>();
    r.log_vol = j.at("log_vol").get<double>();
    r.mu_vol = j.at("mu_vol").get<double>();
    r.sbar = j.at("sbar").get<double>();
    r.theta_bar = j.at("theta_bar").get<double>();
    r.futaki_self = j.at("futaki_self").get<double>();
    r.nu_self = j.at("nu_self").get<double>();
    r.lambda_xi = num_or_nan(j.at("lambda_xi"));
    return r;
}

json to_json(const PathPoint& p)
{
    return {{"lambda", p.lambda},
            {"chi", num(p.chi)},
            {"result", p.result ? to_json(*p.result) : json(nullptr)},
            {"note", p.note},
            {"other_roots", p.other_roots}};
}

PathPoint path_point_from_json(const json& j)
{
    PathPoint p;
    p.lambda = j.at("lambda").get<double>();
    p.chi = num_or_nan(j.at("chi"));
    if (!j.at("result").is_null()) p.result = solve_result_from_json(j.at("result"));
    p.note = j.at("note").get<std::string>();
    p.other_roots = j.at("other_roots").get<std::vector<double>>();
    return p;
}

json to_json(const PhaseDiagram& pd)
{
    json rows = json::array();
    for (std::size_t i = 0; i < pd.lambda_grid.size(); ++i) {
        json pts = json::array();
        for (const auto& c : pd.critical_points[i])
            pts.push_back({{"chi", c.chi},
                           {"mu_vol", c.mu_vol},
                           {"d2_log_vol", c.d2_log_vol},
                           {"kind", to_string(c.kind)},
                           {"stable", c.stable}});
        rows.push_back({{"lambda", pd.lambda_grid[i]}, {"count", pd.critical_counts[i]}, {"critical_points", pts}});
    }
    return {{"rows", rows}, {"transition_lambda", opt_num(pd.transition_lambda)}};
}

std::string fmt17(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void CsvWriter::row(const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os_ << ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\r\n") == std::string::npos) {
            os_ << f;
            continue;
        }
        os_ << '"';
        for (char ch : f) {
            if (ch == '"') os_ << '"';
            os_ << ch;
        }
        os_ << '"';
    }
    os_ << "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cur;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
            continue;
        }
        if (ch == '"') {
            quoted = true;
            any = true;
        } else if (ch == ',') {
            row.push_back(std::move(cur));
            cur.clear();
            any = true;
        } else if (ch == '\r' || ch == '\n') {
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(cur));
            cur.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            cur += ch;
            any = true;
        }
    }
    if (quoted) throw std::invalid_argument("parse_csv: unterminated quoted field");
    if (any) {
        row.push_back(std::move(cur));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_profile_csv(std::ostream& os, const SurfaceSpec& spec, const MomentumProfile& p, double chi,
                       double lambda, int n)
{
    CsvWriter w(os);
    w.row({"tau", "phi", "dphi", "s_mu"});
    for (int i = 0; i <= n; ++i) {
        const double tau = p.tau_min() + (p.tau_max() - p.tau_min()) * i / n;
        const ProfileValue v = p.eval(tau);
        w.row({fmt17(tau), fmt17(v.phi), fmt17(v.dphi), fmt17(mu_scalar_curvature(spec, v, chi, lambda, tau))});
    }
}

void write_path_csv(std::ostream& os, const std::vector<PathPoint>& pts)
{
    CsvWriter w(os);
    w.row(kPathHeader);
    for (const auto& p : pts) {
        if (p.result)
            w.row(result_fields(*p.result));
        else
            w.row({fmt17(p.lambda), "", "", "", "", "", "", ""});
    }
}

void write_results_csv(std::ostream& os, const std::vector<SolveResult>& rs)
{
    CsvWriter w(os);
    w.row(kPathHeader);
    for (const auto& r : rs) w.row(result_fields(r));
}

void write_energy_csv(std::ostream& os, const ConvexityTrace& tr)
{
    CsvWriter w(os);
    w.row({"t", "M_value", "second_difference"});
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const bool inner = i > 0 && i + 1 < tr.t.size();
        w.row({fmt17(tr.t[i]), fmt17(tr.energy[i]), inner ? fmt17(tr.second_difference[i - 1]) : ""});
    }
}

}  // namespace mucsc
