#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "bergman/cli.hpp"
#include "bergman/csv.hpp"
#include "bergman/errors.hpp"
#include "bergman/symbols.hpp"

namespace bergman::cli {
namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::decompose, "decompose"}, {Command::avg, "avg"},           {Command::carleson, "carleson"},
    {Command::apply, "apply"},         {Command::converge, "converge"}, {Command::spectrum, "spectrum"},
    {Command::reproduce_prop15, "reproduce-prop15"},
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Where {
    std::string_view key;
    std::size_t line, column;

    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError(std::string(key) + ": " + why, line, column);
    }
};

int to_int(std::string_view v, const Where& at) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) at.fail("expected an integer, got '" + std::string(v) + "'");
    return out;
}

double to_real(std::string_view v, const Where& at) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        at.fail("expected a finite number, got '" + std::string(v) + "'");
    return out;
}

bool to_bool(std::string_view v, const Where& at) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    at.fail("expected true or false, got '" + std::string(v) + "'");
}

// Key table. Order here is the canonical order.
struct Field {
    std::string_view key;
    std::function<void(RunConfig&, std::string_view, const Where&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field int_field(std::string_view key, T RunConfig::*member) {
    return {key, [member](RunConfig& c, std::string_view v, const Where& at) { c.*member = to_int(v, at); },
            [member](const RunConfig& c) { return std::to_string(c.*member); }};
}
Field real_field(std::string_view key, double RunConfig::*member) {
    return {key, [member](RunConfig& c, std::string_view v, const Where& at) { c.*member = to_real(v, at); },
            [member](const RunConfig& c) { return format_real_short(c.*member); }};
}
Field text_field(std::string_view key, std::string RunConfig::*member) {
    return {key, [member](RunConfig& c, std::string_view v, const Where&) { c.*member = std::string(v); },
            [member](const RunConfig& c) { return c.*member; }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"command", [](RunConfig& c, std::string_view v, const Where& at) {
             try {
                 c.command = parse_command(v);
             } catch (const ParseError& e) {
                 at.fail(e.what());
             }
         },
         [](const RunConfig& c) { return std::string(to_string(c.command)); }},
        text_field("symbol", &RunConfig::symbol),
        int_field("m_min", &RunConfig::m_min),
        int_field("m_max", &RunConfig::m_max),
        int_field("n_max", &RunConfig::n_max),
        int_field("zeta_grid", &RunConfig::zeta_grid),
        int_field("grid_angles", &RunConfig::grid_angles),
        text_field("grid_radii", &RunConfig::grid_radii),
        text_field("op", &RunConfig::op),
        {"transpose", [](RunConfig& c, std::string_view v, const Where& at) { c.transpose = to_bool(v, at); },
         [](const RunConfig& c) { return std::string(c.transpose ? "true" : "false"); }},
        real_field("rho", &RunConfig::rho),
        text_field("f", &RunConfig::f),
        real_field("tol", &RunConfig::tol),
        real_field("cauchy_eps", &RunConfig::cauchy_eps),
        int_field("section", &RunConfig::section),
        real_field("b", &RunConfig::b),
        text_field("output", &RunConfig::output),
        {"format", [](RunConfig& c, std::string_view v, const Where& at) {
             if (v == "csv") c.format = Format::csv;
             else if (v == "json") c.format = Format::json;
             else at.fail("expected csv or json, got '" + std::string(v) + "'");
         },
         [](const RunConfig& c) { return std::string(to_string(c.format)); }},
    };
    return table;
}

void check(bool ok, std::string_view key, const std::string& why) {
    if (!ok) throw ParseError(std::string(key) + ": " + why, 0, 0);
}

}  // namespace

std::string_view to_string(Command command) {
    for (const auto& [c, name] : kCommands)
        if (c == command) return name;
    return "?";
}

Command parse_command(std::string_view text) {
    for (const auto& [c, name] : kCommands)
        if (name == text) return c;
    throw ParseError("unknown command '" + std::string(text) + "'", 0, 0);
}

std::string_view to_string(Format format) { return format == Format::csv ? "csv" : "json"; }

void apply_setting(RunConfig& config, std::string_view key, std::string_view value, std::size_t line,
                   std::size_t column) {
    for (const auto& field : fields()) {
        if (field.key == key) {
            field.set(config, trim(value), Where{key, line, column});
            return;
        }
    }
    throw ParseError("unknown key '" + std::string(key) + "'", line, column);
}

void apply_config_text(RunConfig& config, std::string_view text) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        const std::string_view raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        const std::size_t indent = raw.find_first_not_of(" \t\r") + 1;
        if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no, indent);
        const std::string_view key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", line_no, indent);
        const std::size_t value_column = indent + eq + 1;
        apply_setting(config, key, line.substr(eq + 1), line_no, value_column);
    }
}

void validate(const RunConfig& c) {
    check(c.m_min >= 1 && c.m_min <= kDefaultGenerationCap, "m_min", "must lie in [1, 24]");
    check(c.m_max >= 1 && c.m_max <= 60, "m_max", "must lie in [1, 60]");
    if (c.command == Command::decompose || c.command == Command::avg || c.command == Command::carleson ||
        c.command == Command::reproduce_prop15 || (c.command == Command::apply && c.op == "series"))
        check(c.m_max <= kDefaultGenerationCap, "m_max", "must not exceed 24 for this command");
    if (c.command == Command::avg || c.command == Command::carleson)
        check(c.m_max - c.m_min >= 2, "m_min", "the ladder needs at least 3 generations (m_max - m_min >= 2)");
    check(c.n_max >= 0 && c.n_max <= 1'000'000, "n_max", "must lie in [0, 1000000]");
    check(c.zeta_grid >= 2 && c.zeta_grid <= 1024, "zeta_grid", "must lie in [2, 1024]");
    check(c.grid_angles >= 1 && c.grid_angles <= 4096, "grid_angles", "must lie in [1, 4096]");
    check(c.op == "toeplitz" || c.op == "hankel" || c.op == "series", "op", "must be toeplitz, hankel or series");
    if (c.command == Command::converge) check(c.op != "series", "op", "converge takes toeplitz or hankel");
    check(c.rho > 0.0 && c.rho < 1.0, "rho", "must lie in (0, 1)");
    check(c.tol > 0.0 && c.tol < 1.0, "tol", "must lie in (0, 1)");
    check(c.cauchy_eps > 0.0 && c.cauchy_eps < 1.0, "cauchy_eps", "must lie in (0, 1)");
    check(c.section >= 0 && c.section <= 4096, "section", "must lie in [0, 4096]");
    check(c.b > 0.0 && c.b <= 0.5, "b", "must lie in (0, 1/2]");
    if (c.command == Command::reproduce_prop15)
        check(c.n_max >= 300, "n_max", "reproduce-prop15 fits on [100, n_max] and needs n_max >= 300");
    check(!c.output.empty(), "output", "must not be empty");
    for (const auto& field : fields()) {
        const std::string v = field.get(c);
        check(v == trim(v) && v.find('\n') == std::string::npos, field.key,
              "must not carry surrounding whitespace or newlines");
    }
    parse_symbol(c.symbol);
    parse_radii(c.grid_radii);
    parse_test_function(c.f);
}

std::string canonical_text(const RunConfig& config) {
    std::string out;
    for (const auto& field : fields()) {
        out += field.key;
        out += '=';
        out += field.get(config);
        out += '\n';
    }
    return out;
}

}  // namespace bergman::cli
