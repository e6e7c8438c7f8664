#include "mucsc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace mucsc {

namespace {

const std::set<std::string> kCommands{"muvol", "solve", "path", "energy", "phase", "futaki"};

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed)
{
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key \"" + k + "\"");
}

const json& req(const json& j, const std::string& where, const std::string& key)
{
    if (!j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

double number(const json& j, const std::string& where)
{
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + ": must be finite");
    return v;
}

double req_num(const json& j, const std::string& where, const std::string& key)
{
    return number(req(j, where, key), where + "." + key);
}

double opt_num(const json& j, const std::string& where, const std::string& key, double def)
{
    return j.contains(key) ? number(j.at(key), where + "." + key) : def;
}

double positive(double v, const std::string& where)
{
    if (!(v > 0)) throw ConfigError(where + ": must be positive");
    return v;
}

int count(const json& j, const std::string& where, const std::string& key, int def, int lo)
{
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < lo)
        throw ConfigError(where + "." + key + ": expected an integer >= " + std::to_string(lo));
    return v.get<int>();
}

bool flag(const json& j, const std::string& where, const std::string& key)
{
    if (!j.contains(key)) return false;
    if (!j.at(key).is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
    return j.at(key).get<bool>();
}

std::vector<double> number_list(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> monotone_grid(const json& j, const std::string& where)
{
    std::vector<double> g;
    if (j.is_object()) {
        check_keys(j, where, {"min", "max", "n"});
        const double lo = req_num(j, where, "min"), hi = req_num(j, where, "max");
        const int n = count(j, where, "n", 0, 2);
        if (n == 0) throw ConfigError(where + ": missing \"n\"");
        if (!(lo < hi)) throw ConfigError(where + ": need min < max");
        for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
        return g;
    }
    g = number_list(j, where);
    for (std::size_t i = 1; i < g.size(); ++i)
        if ((g[i] - g[i - 1]) * (g.back() - g.front()) <= 0)
            throw ConfigError(where + ": grid must be strictly monotone");
    return g;
}

std::pair<double, double> bracket(const json& j, const std::string& where)
{
    const auto v = number_list(j, where);
    if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError(where + ": expected [lo, hi] with lo < hi");
    return {v[0], v[1]};
}

void validate_surface(const json& j)
{
    check_keys(j, "surface", {"kind", "m", "k", "genus", "measure"});
    const json& kind = req(j, "surface", "kind");
    if (!kind.is_string()) throw ConfigError("surface.kind: expected a string");
    positive(req_num(j, "surface", "m"), "surface.m");
    if (kind == "ruled") {
        if (count(j, "surface", "k", 0, 1) < 1) throw ConfigError("surface.k: required for ruled surfaces");
        count(j, "surface", "genus", 0, 0);
        if (!j.contains("genus")) throw ConfigError("surface: missing \"genus\"");
    } else if (kind == "cp1") {
        if (j.contains("k") || j.contains("genus")) throw ConfigError("surface: k and genus apply to ruled surfaces only");
    } else {
        throw ConfigError("surface.kind must be \"cp1\" or \"ruled\"");
    }
    if (j.contains("measure")) {
        check_keys(j.at("measure"), "surface.measure", {"tau_min", "tau_max", "density_coeffs", "scale"});
        positive(req_num(j.at("measure"), "surface.measure", "scale"), "surface.measure.scale");
    }
}

void validate_potential(const json& j, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const json& type = req(j, where, "type");
    if (type == "fubini_study") {
        check_keys(j, where, {"type"});
    } else if (type == "solver") {
        check_keys(j, where, {"type", "lambda", "chi"});
        req_num(j, where, "lambda");
        req_num(j, where, "chi");
    } else if (type == "cosine") {
        check_keys(j, where, {"type", "amplitudes", "c0", "c1"});
        number_list(req(j, where, "amplitudes"), where + ".amplitudes");
        opt_num(j, where, "c0", 0);
        opt_num(j, where, "c1", 0);
    } else {
        throw ConfigError(where + ".type must be fubini_study, solver or cosine");
    }
}

void validate_block(const std::string& cmd, const json& b)
{
    const std::string w = cmd;
    if (cmd == "muvol") {
        check_keys(b, w, {"lambda", "chi_grid", "chi_max"});
        req_num(b, w, "lambda");
        monotone_grid(req(b, w, "chi_grid"), w + ".chi_grid");
        positive(opt_num(b, w, "chi_max", 30), w + ".chi_max");
    } else if (cmd == "solve") {
        check_keys(b, w, {"lambda", "bracket", "profile_points", "chi_min", "chi_max"});
        req_num(b, w, "lambda");
        if (b.contains("bracket")) bracket(b.at("bracket"), w + ".bracket");
        count(b, w, "profile_points", 200, 2);
        const double lo = positive(opt_num(b, w, "chi_min", 1e-3), w + ".chi_min");
        const double hi = positive(opt_num(b, w, "chi_max", 30), w + ".chi_max");
        if (!(lo < hi)) throw ConfigError(w + ": need chi_min < chi_max");
    } else if (cmd == "path") {
        check_keys(b, w, {"lambda_grid", "seed_bracket", "report_all_roots"});
        monotone_grid(req(b, w, "lambda_grid"), w + ".lambda_grid");
        bracket(req(b, w, "seed_bracket"), w + ".seed_bracket");
        flag(b, w, "report_all_roots");
    } else if (cmd == "energy") {
        check_keys(b, w, {"lambda", "chi", "path", "u0", "u1", "chi_zeta", "t_grid", "t_nodes", "tau_panels"});
        req_num(b, w, "lambda");
        req_num(b, w, "chi");
        const std::string kind = b.contains("path") ? b.at("path").get<std::string>() : "linear";
        if (kind == "linear") {
            validate_potential(req(b, w, "u0"), w + ".u0");
            validate_potential(req(b, w, "u1"), w + ".u1");
            if (b.contains("chi_zeta")) throw ConfigError(w + ".chi_zeta: only for the vector_field path");
        } else if (kind == "vector_field") {
            validate_potential(req(b, w, "u0"), w + ".u0");
            if (b.contains("u1")) throw ConfigError(w + ".u1: not used by the vector_field path");
            req_num(b, w, "chi_zeta");
        } else {
            throw ConfigError(w + ".path must be linear or vector_field");
        }
        const auto t = monotone_grid(req(b, w, "t_grid"), w + ".t_grid");
        if (t.size() < 3 || t.front() < 0 || t.back() <= t.front())
            throw ConfigError(w + ".t_grid: need at least 3 increasing values starting at t >= 0");
        const double h = t[1] - t[0];
        for (std::size_t i = 1; i < t.size(); ++i)
            if (std::abs(t[i] - t[i - 1] - h) > 1e-12 * std::max(1.0, std::abs(t.back())))
                throw ConfigError(w + ".t_grid: must be uniform");
        count(b, w, "t_nodes", 32, 2);
        count(b, w, "tau_panels", 32, 1);
    } else if (cmd == "phase") {
        check_keys(b, w, {"lambda_grid", "freeze_window", "tol"});
        monotone_grid(req(b, w, "lambda_grid"), w + ".lambda_grid");
        if (b.contains("freeze_window")) bracket(b.at("freeze_window"), w + ".freeze_window");
        positive(opt_num(b, w, "tol", 1e-5), w + ".tol");
    } else if (cmd == "futaki") {
        check_keys(b, w, {"lambda", "chi", "dir_chi"});
        req_num(b, w, "lambda");
        req_num(b, w, "chi");
        if (opt_num(b, w, "dir_chi", 1.0) == 0.0) throw ConfigError(w + ".dir_chi: must be nonzero");
    }
}

SymplecticPotential build_potential(const SurfaceSpec& spec, const json& j)
{
    const std::string type = j.at("type").get<std::string>();
    const double m = spec.m;
    if (type == "fubini_study") return SymplecticPotential::fubini_study(m);
    if (type == "solver")
        return potential_from_profile(solve_profile(spec, j.at("lambda").get<double>(), TorusWeight{j.at("chi").get<double>()}), m);
    const auto amp = j.at("amplitudes").get<std::vector<double>>();
    auto h2 = [amp, m](double tau) {
        double s = 0;
        for (std::size_t k = 0; k < amp.size(); ++k) s += amp[k] * std::cos(k * M_PI * tau / (2 * m));
        return s;
    };
    return SymplecticPotential(m, SmoothPart::from_second_derivative(m, h2).plus_affine(
                                      j.value("c0", 0.0), j.value("c1", 0.0)));
}

std::string render(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

RunConfig parse_config(const json& doc, const std::string& command)
{
    if (!kCommands.count(command)) throw ConfigError("unknown command \"" + command + "\"");
    check_keys(doc, "config", {"surface", "output", "muvol", "solve", "path", "energy", "phase", "futaki"});
    RunConfig cfg;
    cfg.command = command;
    try {
        validate_surface(req(doc, "config", "surface"));
        cfg.surface = surface_from_json(doc.at("surface"));
        if (doc.contains("output")) {
            const json& o = doc.at("output");
            check_keys(o, "output", {"path", "format"});
            if (o.contains("path")) cfg.out_path = o.at("path").get<std::string>();
            if (o.contains("format")) {
                const std::string f = o.at("format").get<std::string>();
                if (f != "csv" && f != "json") throw ConfigError("output.format must be csv or json");
                cfg.format = f == "csv" ? OutputFormat::Csv : OutputFormat::Json;
            }
        }
        for (const auto& c : kCommands)
            if (doc.contains(c)) validate_block(c, doc.at(c));
        cfg.block = req(doc, "config", command);
        if (command == "energy" && cfg.surface.kind != SurfaceKind::CP1)
            throw ConfigError("energy: only cp1 surfaces are supported");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

std::string cmd_muvol(const RunConfig& cfg)
{
    const json& b = cfg.block;
    const double lambda = b.at("lambda").get<double>();
    const auto grid = monotone_grid(b.at("chi_grid"), "muvol.chi_grid");
    const auto ctx = FunctionalContext::reference(cfg.surface);
    const auto crit = find_critical(ctx, lambda, b.value("chi_max", 30.0));
    struct Row {
        std::string kind;
        double chi, mu, d;
    };
    std::vector<Row> rows;
    for (double chi : grid)
        rows.push_back({"curve", chi, mu_vol(ctx, TorusWeight{chi}, lambda), d_log_vol(ctx, TorusWeight{chi}, lambda, TorusWeight{1.0})});
    for (double chi : crit)
        rows.push_back({"critical", chi, mu_vol(ctx, TorusWeight{chi}, lambda), d_log_vol(ctx, TorusWeight{chi}, lambda, TorusWeight{1.0})});
    if (cfg.format == OutputFormat::Json) {
        json curve = json::array(), cr = json::array();
        for (const auto& r : rows) {
            json e = {{"chi", r.chi}, {"x", cfg.surface.x_of_chi(r.chi)}, {"mu_vol", r.mu}, {"d_log_vol", r.d}};
            (r.kind == "curve" ? curve : cr).push_back(e);
        }
        return render({{"surface", surface_to_json(cfg.surface)}, {"lambda", lambda}, {"curve", curve}, {"critical", cr}});
    }
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"kind", "chi", "x", "mu_vol", "d_log_vol"});
    for (const auto& r : rows) w.row({r.kind, fmt17(r.chi), fmt17(cfg.surface.x_of_chi(r.chi)), fmt17(r.mu), fmt17(r.d)});
    return os.str();
}

std::string cmd_solve(const RunConfig& cfg)
{
    const json& b = cfg.block;
    const double lambda = b.at("lambda").get<double>();
    std::ostringstream os;
    if (b.contains("bracket")) {
        const auto br = bracket(b.at("bracket"), "solve.bracket");
        const SolveResult r = solve_chi(cfg.surface, lambda, br);
        if (cfg.format == OutputFormat::Json) return render(to_json(r));
        write_profile_csv(os, cfg.surface, r.profile, r.chi, lambda, b.value("profile_points", 200));
        return os.str();
    }
    const auto rs = solve_all_roots(cfg.surface, lambda, b.value("chi_max", 30.0), b.value("chi_min", 1e-3));
    if (cfg.format == OutputFormat::Json) {
        json arr = json::array();
        for (const auto& r : rs) arr.push_back(to_json(r));
        return render(arr);
    }
    write_results_csv(os, rs);
    return os.str();
}

std::string cmd_path(const RunConfig& cfg)
{
    const json& b = cfg.block;
    const auto grid = monotone_grid(b.at("lambda_grid"), "path.lambda_grid");
    const auto pts = trace(cfg.surface, grid, bracket(b.at("seed_bracket"), "path.seed_bracket"), b.value("report_all_roots", false));
    if (cfg.format == OutputFormat::Json) {
        json arr = json::array();
        for (const auto& p : pts) arr.push_back(to_json(p));
        return render(arr);
    }
    std::ostringstream os;
    write_path_csv(os, pts);
    return os.str();
}

std::string cmd_energy(const RunConfig& cfg)
{
    const json& b = cfg.block;
    const SurfaceSpec& spec = cfg.surface;
    const double lambda = b.at("lambda").get<double>();
    const TorusWeight w{b.at("chi").get<double>()};
    EnergyOptions opt;
    opt.t_nodes = b.value("t_nodes", 32);
    opt.tau_panels = b.value("tau_panels", 32);
    const auto t = monotone_grid(b.at("t_grid"), "energy.t_grid");
    const std::string kind = b.value("path", std::string("linear"));
    const SymplecticPotential u0 = build_potential(spec, b.at("u0"));

    ConvexityTrace tr;
    json extra;
    if (kind == "linear") {
        const SymplecticPotential u1 = build_potential(spec, b.at("u1"));
        tr = geodesic_convexity(spec, w, lambda, u0, u1, t, opt);
        const ChenTianTerms ct = muk_energy_chen_tian(spec, w, lambda, u0, u1, opt);
        extra["chen_tian"] = {{"entropy", ct.entropy}, {"ricci", ct.ricci}, {"sbar_term", ct.sbar_term},
                              {"lambda_term", ct.lambda_term}, {"total", ct.total()}};
        extra["M_path"] = muk_energy_path(spec, w, lambda, PotentialPath::linear(u0, u1), 1.0, opt);
    } else {
        const double cz = b.at("chi_zeta").get<double>();
        const PotentialPath path = PotentialPath::vector_field(u0, cz);
        tr.t = t;
        for (double ti : t) tr.energy.push_back(muk_energy_path(spec, w, lambda, path, ti, opt));
        for (std::size_t i = 1; i + 1 < t.size(); ++i)
            tr.second_difference.push_back(tr.energy[i + 1] - 2 * tr.energy[i] + tr.energy[i - 1]);
        const auto ctx = FunctionalContext::reference(spec);
        extra["futaki_slope"] = -cz * std::exp(log_weighted_mass(ctx, w)) * futaki(ctx, w, TorusWeight{1.0}, lambda);
    }
    if (cfg.format == OutputFormat::Json) {
        json j = {{"t", tr.t}, {"M_value", tr.energy}, {"second_difference", tr.second_difference}};
        j.update(extra);
        return render(j);
    }
    std::ostringstream os;
    write_energy_csv(os, tr);
    return os.str();
}

std::string cmd_phase(const RunConfig& cfg)
{
    const json& b = cfg.block;
    PhaseDiagram pd = phase_diagram(cfg.surface, monotone_grid(b.at("lambda_grid"), "phase.lambda_grid"));
    if (b.contains("freeze_window")) {
        const auto win = bracket(b.at("freeze_window"), "phase.freeze_window");
        const auto est = lambda_freeze_estimate(cfg.surface, win.first, win.second, b.value("tol", 1e-5));
        if (!est.exhausted) pd.transition_lambda = est.value;
    }
    if (cfg.format == OutputFormat::Json) return render(to_json(pd));
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"lambda", "count", "chi", "mu_vol", "d2_log_vol", "kind", "stable"});
    for (std::size_t i = 0; i < pd.lambda_grid.size(); ++i)
        for (const auto& c : pd.critical_points[i])
            w.row({fmt17(pd.lambda_grid[i]), std::to_string(pd.critical_counts[i]), fmt17(c.chi), fmt17(c.mu_vol),
                   fmt17(c.d2_log_vol), to_string(c.kind), c.stable ? "1" : "0"});
    if (pd.transition_lambda) w.row({fmt17(*pd.transition_lambda), "", "", "", "", "transition", ""});
    return os.str();
}

std::string cmd_futaki(const RunConfig& cfg)
{
    const json& b = cfg.block;
    const double lambda = b.at("lambda").get<double>();
    const TorusWeight w{b.at("chi").get<double>()}, dir{b.value("dir_chi", 1.0)};
    const auto ctx = FunctionalContext::reference(cfg.surface);
    const VolReport r = vol_report(ctx, w, lambda);
    const double f = futaki(ctx, w, dir, lambda), n = nu(ctx, w, dir);
    if (cfg.format == OutputFormat::Json) {
        json j = to_json(r);
        j["dir_chi"] = dir.chi;
        j["futaki_dir"] = f;
        j["nu_dir"] = n;
        return render(j);
    }
    std::ostringstream os;
    CsvWriter cw(os);
    cw.row({"chi", "lambda", "log_vol", "mu_vol", "sbar", "theta_bar", "futaki_self", "nu_self", "lambda_xi", "dir_chi",
            "futaki_dir", "nu_dir"});
    cw.row({fmt17(r.chi), fmt17(r.lambda), fmt17(r.log_vol), fmt17(r.mu_vol), fmt17(r.sbar), fmt17(r.theta_bar),
            fmt17(r.futaki_self), fmt17(r.nu_self), std::isnan(r.lambda_xi) ? "" : fmt17(r.lambda_xi), fmt17(dir.chi),
            fmt17(f), fmt17(n)});
    return os.str();
}

int run_cli(const CliOptions& opt, std::ostream& out, std::ostream& err)
{
    RunConfig cfg;
    try {
        std::ifstream in(opt.config_path);
        if (!in) throw ConfigError("cannot read config file " + opt.config_path);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        cfg = parse_config(doc, opt.command);
        if (!opt.out.empty()) cfg.out_path = opt.out;
        if (!opt.format.empty()) {
            if (opt.format != "csv" && opt.format != "json") throw ConfigError("--format must be csv or json");
            cfg.format = opt.format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
        }
        cfg.quiet = opt.quiet;
        if (const char* dir = std::getenv(kOutDirEnv); dir && *dir && !cfg.out_path.empty() &&
                                                       std::filesystem::path(cfg.out_path).is_relative())
            cfg.out_path = (std::filesystem::path(dir) / cfg.out_path).string();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    std::string text;
    try {
        if (cfg.command == "muvol") text = cmd_muvol(cfg);
        else if (cfg.command == "solve") text = cmd_solve(cfg);
        else if (cfg.command == "path") text = cmd_path(cfg);
        else if (cfg.command == "energy") text = cmd_energy(cfg);
        else if (cfg.command == "phase") text = cmd_phase(cfg);
        else text = cmd_futaki(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }

    if (cfg.out_path.empty()) {
        out << text;
    } else {
        std::ofstream f(cfg.out_path, std::ios::binary);
        if (!f || !(f << text)) {
            err << "cannot write " << cfg.out_path << "\n";
            return kExitNumerical;
        }
        if (!cfg.quiet) err << "wrote " << cfg.out_path << "\n";
    }
    return kExitOk;
}

}  // namespace mucsc
