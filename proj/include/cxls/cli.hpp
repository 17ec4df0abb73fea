#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cxls::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct RunConfig {
    std::string command;

    // utility
    std::string utility = "tvar";
    std::optional<double> alpha;
    std::optional<double> truncation;  // --K for truncated-mean
    std::string loss_path;
    std::string kusuoka_path;

    // inputs
    std::string dist_path;
    std::string dist_g_path;
    std::string space_path;
    std::string variable;
    std::string eta;
    std::string densities_path;
    std::string partition;
    std::string forecasts_a_path;
    std::string forecasts_b_path;
    std::string outcomes_path;

    // scoring
    std::string score = "squared";
    std::optional<double> w_over;
    std::optional<double> w_under;

    // grids
    std::string grid = "-5:5:0.5";
    std::size_t lambdas = 101;
    std::size_t residual_grid = 10;
    std::optional<std::size_t> trials;
    std::uint64_t seed = kDefaultSeed;

    // outputs
    std::string output_path;
    std::string table_path;
};

/// Parses argv into a RunConfig. The default seed is taken from CXLS_SEED when
/// set. Throws ParseError on malformed command lines; returns std::nullopt
/// after printing help.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Runs one command. Human-readable table on `out`; the JSON report goes to
/// config.output_path, or to `out` after the table when no path is given.
/// Returns the exit status: 0 ok, 1 parse, 2 invariant, 3 numeric,
/// 4 precondition. Diagnostics go to `err` as a single line.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with the same exit-code mapping.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cxls::cli
