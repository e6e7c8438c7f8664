#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "mucsc/io.hpp"

namespace mucsc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Output directory override; relative output paths are resolved against it.
inline constexpr const char* kOutDirEnv = "MUCSC_OUT_DIR";

enum class OutputFormat { Csv, Json };

/// A parsed and validated config. Only the block of the running command is required.
struct RunConfig {
    std::string command;
    SurfaceSpec surface;
    json block;               // the command's parameter block
    std::string out_path;     // empty: standard output
    OutputFormat format = OutputFormat::Csv;
    bool quiet = false;
};

/// Rejects unknown keys at every level, nonpositive tolerances, and non-monotone grids.
RunConfig parse_config(const json& doc, const std::string& command);

struct CliOptions {
    std::string command;
    std::string config_path;
    std::string out;     // overrides output.path
    std::string format;  // overrides output.format
    bool quiet = false;
};

/// Loads the config, applies flag overrides, runs the command and writes the output once.
int run_cli(const CliOptions& opt, std::ostream& out, std::ostream& err);

/// Each command renders its whole output into a string.
std::string cmd_muvol(const RunConfig& cfg);
std::string cmd_solve(const RunConfig& cfg);
std::string cmd_path(const RunConfig& cfg);
std::string cmd_energy(const RunConfig& cfg);
std::string cmd_phase(const RunConfig& cfg);
std::string cmd_futaki(const RunConfig& cfg);

}  // namespace mucsc
