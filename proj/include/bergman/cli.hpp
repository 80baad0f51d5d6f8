#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bergman/operators.hpp"

namespace bergman::cli {

enum class Command { decompose, avg, carleson, apply, converge, spectrum, reproduce_prop15 };
enum class Format { csv, json };

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConvergence = 3;

/// Every run parameter with its default. Field names double as config keys.
struct RunConfig {
    Command command = Command::spectrum;
    std::string symbol = "ab:0.25";
    int m_min = 4;                 // first ladder generation (avg, carleson)
    int m_max = 14;                // last ladder generation; decompose depth; series depth
    int n_max = 10000;             // spectrum length
    int zeta_grid = 16;            // zeta samples per axis (avg)
    int grid_angles = 8;           // apply / converge grid
    std::string grid_radii = "0,0.3,0.6,0.8,0.9";
    std::string op = "toeplitz";   // toeplitz | hankel | series
    bool transpose = false;
    double rho = 0.875;
    std::string f = "1";           // polynomial coefficients c0,c1,...; complex as re:im
    double tol = 1e-8;
    double cauchy_eps = 1e-5;
    int section = 0;               // spectrum: also report the N x N section norm when > 0
    double b = 0.25;               // reproduce-prop15 exponent
    std::string output = "-";
    Format format = Format::csv;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

std::string_view to_string(Command command);
Command parse_command(std::string_view text);
std::string_view to_string(Format format);

/// Applies key=value lines ('#' starts a comment) on top of config; unknown
/// keys and malformed values throw ParseError with line and column.
void apply_config_text(RunConfig& config, std::string_view text);
/// Applies a single key=value assignment (line 0 in errors).
void apply_setting(RunConfig& config, std::string_view key, std::string_view value, std::size_t line = 0,
                   std::size_t column = 0);
/// Range checks; throws ParseError naming the field.
void validate(const RunConfig& config);

/// One key=value line per field in a fixed order; parsing it gives back the same config.
std::string canonical_text(const RunConfig& config);

/// Comma-separated radii in [0, 1).
std::vector<double> parse_radii(std::string_view text);
/// Comma-separated coefficients c0,c1,... (complex ones as re:im), or z^k.
TestFunction parse_test_function(std::string_view text);

/// Runs the configured command, writing its table to out. Returns an exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Plain table written as CSV or as a JSON array of records.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
void write_table(std::ostream& out, const Table& table, Format format);

}  // namespace bergman::cli
