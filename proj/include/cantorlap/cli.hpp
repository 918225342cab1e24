#pragma once

#include "cantorlap/bratteli.hpp"
#include "cantorlap/error.hpp"
#include "cantorlap/gibbs.hpp"
#include "cantorlap/lc_function.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cantorlap {

struct RunConfig {
    IntMatrix matrix;
    Potential potential;
    bool potential_given = false;
    StartWeighting weighting = StartWeighting::kInvariant;
    double gamma = 1.0;
    int level = 1;
    nlohmann::json document;  // the whole config, for command-specific options
    std::uint64_t hash = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);

RunConfig parse_config(const nlohmann::json& document);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Functions travel as arrays of ["v:e1,e2", value] pairs of one common
/// length; absent paths are 0.
LCFunction function_from_json(const Diagram& d, const nlohmann::json& pairs, std::size_t cap = kDefaultPathCap);
nlohmann::json function_to_json(const PathTree& tree, const LCFunction& f);

enum class Command { kSpectrum, kWeyl, kHeat, kCohomology, kHodge, kGibbs };
Command parse_command(std::string_view name);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    bool exact = false;
    unsigned threads = 1;
    std::size_t cap = kDefaultPathCap;
};

struct RunResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
    std::string report;  // human-readable summary, also written to disk
};

RunResult run_command(Command command, const RunConfig& config, const RunOptions& options);

/// 2 config, 3 capacity, 4 threshold, 1 anything else.
int exit_code_for(ErrorCode code);

/// printf("%.17g").
std::string format_double(double x);

}  // namespace cantorlap
