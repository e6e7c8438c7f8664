#include <iostream>

#include <CLI11.hpp>

#include "mucsc/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"mu-cscK numerical laboratory"};
    app.require_subcommand(1);
    mucsc::CliOptions opt;
    const char* help[][2] = {{"muvol", "mu-volume curve and its critical points"},
                             {"solve", "solve the boundary-value problem for chi"},
                             {"path", "continuation of chi(lambda)"},
                             {"energy", "muK-energy along a path of symplectic potentials"},
                             {"phase", "critical-point counts and the transition lambda"},
                             {"futaki", "volume report and Futaki invariant at one chi"}};
    for (const auto& h : help) {
        CLI::App* sub = app.add_subcommand(h[0], h[1]);
        sub->add_option("--config", opt.config_path, "JSON config file")->required();
        sub->add_option("--out", opt.out, "output file (default: output.path, else stdout)");
        sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--quiet", opt.quiet, "no progress messages");
        sub->callback([&opt, name = std::string(h[0])] { opt.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return mucsc::kExitConfig;
    }
    return mucsc::run_cli(opt, std::cout, std::cerr);
}
