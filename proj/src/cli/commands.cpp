#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bergman/averaging.hpp"
#include "bergman/cli.hpp"
#include "bergman/csv.hpp"
#include "bergman/errors.hpp"
#include "bergman/geometry.hpp"
#include "bergman/operators.hpp"
#include "bergman/spectral.hpp"
#include "bergman/symbols.hpp"

namespace bergman::cli {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    while (true) {
        const auto pos = text.find(sep);
        parts.push_back(text.substr(0, pos));
        if (pos == std::string_view::npos) return parts;
        text.remove_prefix(pos + 1);
    }
}

double real_item(std::string_view item, std::string_view what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v))
        throw ParseError(std::string(what) + ": bad number '" + std::string(item) + "'", 0, 0);
    return v;
}

std::string cell(double v) { return format_real(v); }
std::string flag(bool v) { return v ? "true" : "false"; }

// delta = 2^-m ladder of boxes D(1 - 2 delta, 0)
double ladder_delta(int m) { return std::ldexp(1.0, -m); }
DyadicBox ladder_box(int m) { return DyadicBox::from_corner(1.0 - 2.0 * ladder_delta(m), 0.0); }

// Thresholds of the dichotomy verdict.
constexpr double kSlopeWindow = 0.05;
constexpr double kAreaSlopeSlack = 0.15;
constexpr double kSupSlopeFloor = -0.05;
constexpr double kMedianRatio = 5.0;
constexpr std::size_t kFitStart = 100;

struct Outcome {
    Table table;
    bool converged = true;
};

Outcome run_decompose(const RunConfig& c) {
    Outcome out;
    out.table.header = {"m", "mu", "r_in", "r_out", "theta_in", "theta_out", "area"};
    const auto dec = enumerate_decomposition(c.m_max);
    for (const auto& box : dec.boxes()) {
        const auto& idx = *box.index();
        out.table.rows.push_back({std::to_string(idx.m), std::to_string(idx.mu), cell(box.r_in()), cell(box.r_out()),
                                  cell(box.theta_in()), cell(box.theta_out()), cell(box.area())});
    }
    return out;
}

Outcome run_avg(const RunConfig& c, const Symbol& a) {
    Outcome out;
    out.table.header = {"m",   "r_in",  "theta_in", "sup_avg",        "argmax_rho", "argmax_phi",
                        "carleson_mean", "tol", "delta", "error_estimate", "converged"};
    const auto n = static_cast<std::size_t>(c.zeta_grid);
    for (int m = c.m_min; m <= c.m_max; ++m) {
        const auto box = ladder_box(m);
        const auto r = sup_avg(a, box, {n, n}, c.tol);
        out.converged = out.converged && r.converged;
        out.table.rows.push_back({std::to_string(m), cell(box.r_in()), cell(box.theta_in()), cell(r.sup_over_zeta),
                                  cell(r.argmax_zeta.rho), cell(r.argmax_zeta.phi), cell(r.carleson_mean),
                                  cell(c.tol), cell(ladder_delta(m)), cell(r.error_estimate), flag(r.converged)});
    }
    return out;
}

Outcome run_carleson(const RunConfig& c, const Symbol& a) {
    Outcome out;
    out.table.header = {"m", "r_in", "theta_in", "carleson_mean", "tol", "delta"};
    for (int m = c.m_min; m <= c.m_max; ++m) {
        const auto box = ladder_box(m);
        out.table.rows.push_back({std::to_string(m), cell(box.r_in()), cell(box.theta_in()),
                                  cell(carleson_mean(a, box, c.tol)), cell(c.tol), cell(ladder_delta(m))});
    }
    return out;
}

OperatorKind kind_of(const std::string& op) { return op == "hankel" ? OperatorKind::hankel : OperatorKind::toeplitz; }

std::vector<Complex> config_grid(const RunConfig& c) {
    return tensor_grid(parse_radii(c.grid_radii), static_cast<std::size_t>(c.grid_angles));
}

Outcome field_outcome(const FieldSample& s) {
    Outcome out;
    out.table.header = {"z_re", "z_im", "value_re", "value_im", "err", "converged"};
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        out.table.rows.push_back({cell(s.grid[i].real()), cell(s.grid[i].imag()), cell(s.values[i].real()),
                                  cell(s.values[i].imag()), cell(s.per_point_error[i]), flag(s.converged[i])});
    out.converged = s.all_converged();
    return out;
}

Outcome run_apply(const RunConfig& c, const Symbol& a, std::ostream& log) {
    const auto f = parse_test_function(c.f);
    const auto grid = config_grid(c);
    FieldSample s;
    if (c.op == "series")
        s = series_apply(OperatorKind::toeplitz, c.transpose ? conjugate(a) : a, f, c.m_max, grid, c.tol);
    else if (c.transpose)
        s = transpose_apply(kind_of(c.op), a, c.rho, f, grid, c.tol);
    else
        s = truncated_apply(kind_of(c.op), a, c.rho, f, grid, c.tol);
    log << "apply: " << s.descriptor << '\n';
    return field_outcome(s);
}

Outcome run_converge(const RunConfig& c, const Symbol& a, std::ostream& log) {
    const auto r = limit_apply(kind_of(c.op), a, parse_test_function(c.f), config_grid(c), dyadic_schedule(c.m_max),
                               c.tol, c.cauchy_eps);
    Outcome out;
    out.table.header = {"m", "rho", "grid_l2_diff"};
    for (const auto& e : r.log)
        out.table.rows.push_back({std::to_string(e.m), cell(e.rho), cell(e.grid_l2_diff)});
    out.converged = r.converged;
    log << "converge: " << (r.converged ? "converged" : "not converged") << " after " << r.log.size() << " steps\n";
    return out;
}

Outcome spectrum_outcome(const SpectralSequence& seq) {
    Outcome out;
    out.table.header = {"n", "gamma_re", "gamma_im", "err"};
    for (std::size_t n = 0; n < seq.gamma.size(); ++n)
        out.table.rows.push_back(
            {std::to_string(n), cell(seq.gamma[n].real()), cell(seq.gamma[n].imag()), cell(seq.error[n])});
    out.converged = seq.converged;
    return out;
}

Outcome run_spectrum(const RunConfig& c, const Symbol& a, std::ostream& log) {
    const auto seq = radial_sequence(a, static_cast<std::size_t>(c.n_max), c.tol);
    if (c.n_max >= 300) {
        try {
            const auto fit = growth_fit(seq, kFitStart, static_cast<std::size_t>(c.n_max));
            log << "spectrum: growth slope " << format_real_short(fit.fit.slope) << " on [100, " << c.n_max << "]\n";
        } catch (const DomainError&) {
            log << "spectrum: no growth fit (too few nonzero terms)\n";
        }
    }
    auto out = spectrum_outcome(seq);
    if (c.section > 0) {
        const auto norm = finite_section_norm(a, static_cast<std::size_t>(c.section), c.tol);
        log << "spectrum: section norm " << format_real_short(norm.norm) << " (N = " << c.section << ")\n";
        out.converged = out.converged && norm.converged;
    }
    return out;
}

Outcome run_reproduce(const RunConfig& c, std::ostream& log) {
    const double b = c.b;
    const auto ab = make_ab(b);
    const auto abs_ab = modulus(ab);
    Outcome out;
    out.table.header = {"check", "value", "threshold", "pass", "role"};
    auto row = [&](std::string name, std::string value, std::string threshold, bool pass, std::string role) {
        out.table.rows.push_back({std::move(name), std::move(value), std::move(threshold), flag(pass), std::move(role)});
    };

    std::vector<std::pair<double, double>> carleson, area_sup, sup;
    const auto n = static_cast<std::size_t>(c.zeta_grid);
    for (int m = c.m_min; m <= c.m_max; ++m) {
        const auto box = ladder_box(m);
        const double delta = ladder_delta(m);
        carleson.emplace_back(delta, carleson_mean(abs_ab, box, c.tol));
        const auto grid = avg_hat_grid(ab, box, n, n, c.tol);
        out.converged = out.converged && grid.converged;
        double s = 0.0;
        for (const auto& v : grid.values) s = std::max(s, std::abs(v));
        sup.emplace_back(delta, s);
        area_sup.emplace_back(delta, box.area() * s);
        log << "reproduce: m = " << m << " carleson " << format_real_short(carleson.back().second) << " sup "
            << format_real_short(s) << '\n';
    }
    const double carleson_slope = scaling_fit(carleson).slope;
    const double area_slope = scaling_fit(area_sup).slope;
    const double sup_slope = scaling_fit(sup).slope;
    double sup_max = 0.0;
    for (const auto& [d, s] : sup) sup_max = std::max(sup_max, s);

    const double spectral_tol = std::max(c.tol, 1e-6);
    const auto n_max = static_cast<std::size_t>(c.n_max);
    const auto seq_abs = radial_sequence(abs_ab, n_max, spectral_tol);
    const auto seq = radial_sequence(ab, n_max, spectral_tol);
    out.converged = out.converged && seq_abs.converged && seq.converged;
    const double abs_slope = growth_fit(seq_abs, kFitStart, n_max).fit.slope;
    const double a_slope = growth_fit(seq, kFitStart, n_max).fit.slope;
    double head = 0.0, tail = 0.0;
    std::vector<double> window;
    for (std::size_t k = 0; k <= n_max; ++k) {
        const double v = std::abs(seq.gamma[k]);
        if (k < kFitStart) head = std::max(head, v);
        else {
            tail = std::max(tail, v);
            window.push_back(v);
        }
    }
    std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
    const double median = window[window.size() / 2];
    const double ratio = median > 0.0 ? tail / median : INFINITY;

    const bool carleson_ok = std::abs(carleson_slope + b) <= kSlopeWindow;
    const bool area_ok = area_slope >= 3.0 - b - kAreaSlopeSlack;
    const bool sup_ok = sup_slope >= kSupSlopeFloor;
    const bool abs_ok = std::abs(abs_slope - b) <= kSlopeWindow;
    const bool tail_ok = tail <= head;

    const std::string bw = format_real_short(b);
    row("carleson_slope_abs_ab", cell(carleson_slope), "-" + bw + " +- 0.05", carleson_ok, "verdict");
    row("area_sup_avg_slope", cell(area_slope), ">= 3 - " + bw + " - 0.15", area_ok, "verdict");
    row("sup_avg_slope", cell(sup_slope), ">= -0.05", sup_ok, "verdict");
    row("sup_avg_max", cell(sup_max), "report", true, "informational");
    row("gamma_abs_ab_slope", cell(abs_slope), bw + " +- 0.05", abs_ok, "verdict");
    row("gamma_ab_tail_max", cell(tail), "<= head max " + format_real_short(head), tail_ok, "verdict");
    row("gamma_ab_slope", cell(a_slope), "|slope| <= 0.05", std::abs(a_slope) <= kSlopeWindow, "informational");
    row("gamma_ab_max_over_median", cell(ratio), "<= 5", ratio <= kMedianRatio, "informational");

    const bool unbounded = carleson_ok && abs_ok;
    const bool bounded = area_ok && sup_ok && tail_ok;
    row("T_abs_a_unbounded_trend", unbounded ? "TRUE" : "FALSE", "all verdict checks on |a_b|", unbounded, "verdict");
    row("T_a_bounded_trend", bounded ? "TRUE" : "FALSE", "all verdict checks on a_b", bounded, "verdict");
    log << "verdict: T_{|a|} unbounded-trend " << (unbounded ? "TRUE" : "FALSE") << ", T_a bounded-trend "
        << (bounded ? "TRUE" : "FALSE") << '\n';
    return out;
}

nlohmann::ordered_json json_cell(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (!s.empty() && ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v)) {
        if (s.find_first_of(".eE") == std::string::npos) return std::stoll(s);
        return v;
    }
    return s;
}

}  // namespace

std::vector<double> parse_radii(std::string_view text) {
    std::vector<double> radii;
    for (const auto item : split(text, ',')) {
        const double r = real_item(item, "grid_radii");
        if (!(r >= 0.0 && r < 1.0)) throw ParseError("grid_radii: radius outside [0, 1)", 0, 0);
        radii.push_back(r);
    }
    return radii;
}

TestFunction parse_test_function(std::string_view text) {
    if (text.starts_with("z^")) {
        const auto digits = text.substr(2);
        std::size_t k = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
            throw ParseError("f: bad exponent in '" + std::string(text) + "'", 0, 0);
        return TestFunction::monomial(k);
    }
    std::vector<Complex> coefficients;
    for (const auto item : split(text, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) coefficients.emplace_back(real_item(item, "f"), 0.0);
        else coefficients.emplace_back(real_item(item.substr(0, colon), "f"), real_item(item.substr(colon + 1), "f"));
    }
    return TestFunction::polynomial(std::move(coefficients));
}

void write_table(std::ostream& out, const Table& table, Format format) {
    if (format == Format::csv) {
        write_csv_row(out, table.header);
        for (const auto& r : table.rows) write_csv_row(out, r);
        return;
    }
    auto records = nlohmann::ordered_json::array();
    for (const auto& r : table.rows) {
        nlohmann::ordered_json rec = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < table.header.size(); ++i) rec[table.header[i]] = json_cell(r.at(i));
        records.push_back(std::move(rec));
    }
    out << records.dump(2) << '\n';
}

int run(const RunConfig& config, std::ostream& out, std::ostream& log) {
    Outcome outcome;
    try {
        validate(config);
        const auto a = parse_symbol(config.symbol);
        switch (config.command) {
            case Command::decompose: outcome = run_decompose(config); break;
            case Command::avg: outcome = run_avg(config, a); break;
            case Command::carleson: outcome = run_carleson(config, a); break;
            case Command::apply: outcome = run_apply(config, a, log); break;
            case Command::converge: outcome = run_converge(config, a, log); break;
            case Command::spectrum: outcome = run_spectrum(config, a, log); break;
            case Command::reproduce_prop15: outcome = run_reproduce(config, log); break;
        }
    } catch (const ParseError& e) {
        log << "error: " << e.what();
        log << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        log << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ResourceError& e) {
        log << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    // Everything is computed before anything is written.
    std::ostringstream buffer;
    write_table(buffer, outcome.table, config.format);
    if (config.output == "-") {
        out << buffer.str();
    } else {
        std::ofstream file(config.output, std::ios::binary);
        if (!file) {
            log << "error: cannot open " << config.output << '\n';
            return kExitConfig;
        }
        file << buffer.str();
    }
    if (!outcome.converged) {
        log << "warning: numerical non-convergence; see the converged/err columns\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

}  // namespace bergman::cli
