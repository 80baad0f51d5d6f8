#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bergman {

/// Shortest round-trip-safe decimal form (17 significant digits).
std::string format_real(double value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position of name; throws ParseError when absent.
    std::size_t column(const std::string& name) const;
};

/// Comma-separated, first line is the header, blank lines skipped.
CsvTable read_csv(std::istream& in);
double parse_real_cell(const std::string& cell, std::size_t line, std::size_t column);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

/// Fewest significant digits (up to 17) that parse back to the same double.
std::string format_real_short(double value);

}  // namespace bergman
