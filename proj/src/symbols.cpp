#include "bergman/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "bergman/csv.hpp"
#include "bergman/errors.hpp"

namespace bergman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe_complex(Complex c) {
    if (c.imag() == 0.0) return format_real_short(c.real());
    return format_real_short(c.real()) + "," + format_real_short(c.imag());
}

std::string point_text(const PolarPoint& p) {
    return "(rho=" + format_real_short(p.rho) + ", phi=" + format_real_short(p.phi) + ")";
}

}  // namespace

Symbol::Symbol(Function fn, Traits traits)
    : impl_(std::make_shared<Impl>(Impl{std::move(fn), std::move(traits), nullptr, 1.0})) {}

Complex Symbol::operator()(double rho, double phi) const {
    if (!(rho >= 0.0 && rho < 1.0))
        throw DomainError("symbol evaluated outside the open disc at " + point_text({rho, phi}));
    return impl_->fn(rho, phi);
}

std::optional<double> Symbol::truncation_radius() const {
    if (!impl_->truncation_base) return std::nullopt;
    return impl_->truncation_radius;
}

std::vector<double> Symbol::radial_breaks(double r0, double r1) const {
    std::vector<double> out;
    for (double b : breaks())
        if (b > r0 && b < r1) out.push_back(b);
    if (const auto& onset = oscillation_onset(); onset && r1 > *onset) {
        const double start = std::max(r0, *onset);
        const double y0 = 1.0 / (1.0 - start);
        const double y1 = 1.0 / (1.0 - r1);
        for (auto k = static_cast<long long>(std::floor(y0 / kPi)) + 1; kPi * k < y1; ++k) {
            const double r = 1.0 - 1.0 / (kPi * static_cast<double>(k));
            if (r > r0 && r < r1) out.push_back(r);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Symbol make_constant(Complex c) {
    return Symbol([c](double, double) { return c; },
                  {true, kInf, std::nullopt, {}, "const:" + describe_complex(c)});
}

Symbol make_ab(double b) {
    if (!(b > 0.0 && b <= 0.5)) throw DomainError("a_b requires 0 < b <= 1/2");
    auto fn = [b](double r, double) -> Complex {
        if (r < 0.5) return 1.0;
        const double s = 1.0 - r;
        return std::pow(s, -b) * std::sin(1.0 / s) / r;
    };
    return Symbol(fn, {true, 1.0 / b, 0.5, {0.5}, "ab:" + format_real_short(b)});
}

Symbol make_pow(double b) {
    if (!(b < 1.0) || !std::isfinite(b)) throw DomainError("pow:b requires b < 1 for integrability");
    auto fn = [b](double r, double) -> Complex { return std::pow(1.0 - r, -b); };
    return Symbol(fn, {true, b > 0.0 ? 1.0 / b : kInf, std::nullopt, {}, "pow:" + format_real_short(b)});
}

Symbol modulus(const Symbol& a) {
    auto traits = Symbol::Traits{a.is_radial(), a.integrability_bound(), a.oscillation_onset(),
                                 a.breaks(), "abs(" + a.description() + ")"};
    return Symbol([a](double r, double p) -> Complex { return std::abs(a(r, p)); }, std::move(traits));
}

Symbol conjugate(const Symbol& a) {
    auto traits = Symbol::Traits{a.is_radial(), a.integrability_bound(), a.oscillation_onset(),
                                 a.breaks(), "conj(" + a.description() + ")"};
    return Symbol([a](double r, double p) { return std::conj(a(r, p)); }, std::move(traits));
}

Symbol truncate(const Symbol& a, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("truncation radius must lie in (0, 1)");
    if (a.impl_->truncation_base) {
        return truncate(Symbol(a.impl_->truncation_base), std::min(rho, a.impl_->truncation_radius));
    }
    auto breaks = a.breaks();
    std::erase_if(breaks, [rho](double b) { return b >= rho; });
    breaks.push_back(rho);
    std::optional<double> onset = a.oscillation_onset();
    if (onset && *onset >= rho) onset.reset();
    Symbol::Traits traits{a.is_radial(), kInf, onset, std::move(breaks),
                          "trunc:" + format_real_short(rho) + "(" + a.description() + ")"};
    auto fn = [a, rho](double r, double p) -> Complex { return r <= rho ? a(r, p) : Complex{}; };
    Symbol out(std::move(fn), std::move(traits));
    auto impl = std::make_shared<Symbol::Impl>(*out.impl_);
    impl->truncation_base = a.impl_;
    impl->truncation_radius = rho;
    return Symbol(std::move(impl));
}

Symbol sum(const Symbol& a, const Symbol& b) {
    std::optional<double> onset = a.oscillation_onset();
    if (b.oscillation_onset()) onset = onset ? std::min(*onset, *b.oscillation_onset()) : b.oscillation_onset();
    std::optional<double> bound;
    if (a.integrability_bound() && b.integrability_bound())
        bound = std::min(*a.integrability_bound(), *b.integrability_bound());
    auto breaks = a.breaks();
    breaks.insert(breaks.end(), b.breaks().begin(), b.breaks().end());
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    Symbol::Traits traits{a.is_radial() && b.is_radial(), bound, onset, std::move(breaks),
                          "sum(" + a.description() + "," + b.description() + ")"};
    return Symbol([a, b](double r, double p) { return a(r, p) + b(r, p); }, std::move(traits));
}

Symbol scale(const Symbol& a, Complex factor) {
    Symbol::Traits traits{a.is_radial(), a.integrability_bound(), a.oscillation_onset(), a.breaks(),
                          "scale(" + describe_complex(factor) + "," + a.description() + ")"};
    return Symbol([a, factor](double r, double p) { return factor * a(r, p); }, std::move(traits));
}

Symbol make_function(Symbol::Function fn, bool radial, std::string description) {
    return Symbol(std::move(fn), {radial, std::nullopt, std::nullopt, {}, std::move(description)});
}

Symbol make_table(SymbolTable table, std::string description) {
    const std::size_t nr = table.rho.size();
    const std::size_t np = table.phi.size();
    if (nr < 1 || np < 1 || table.values.size() != nr * np)
        throw DomainError("symbol table must be a full rho x phi tensor grid");
    if (!std::is_sorted(table.rho.begin(), table.rho.end()) ||
        std::adjacent_find(table.rho.begin(), table.rho.end()) != table.rho.end())
        throw DomainError("table rho values must be distinct and ascending");
    if (np > 1 && table.phi.back() - table.phi.front() >= kTwoPi)
        throw DomainError("table phi values must lie within one period");
    auto data = std::make_shared<const SymbolTable>(std::move(table));
    auto fn = [data](double r, double p) -> Complex {
        const auto& rho = data->rho;
        const auto& phi = data->phi;
        const std::size_t cols = phi.size();
        std::size_t i0 = 0, i1 = 0;
        double tr = 0.0;
        if (r <= rho.front()) {
            i0 = i1 = 0;
        } else if (r >= rho.back()) {
            i0 = i1 = rho.size() - 1;
        } else {
            i1 = static_cast<std::size_t>(std::upper_bound(rho.begin(), rho.end(), r) - rho.begin());
            i0 = i1 - 1;
            tr = (r - rho[i0]) / (rho[i1] - rho[i0]);
        }
        std::size_t j0 = 0, j1 = 0;
        double tp = 0.0;
        if (cols > 1) {
            double q = std::fmod(p - phi.front(), kTwoPi);
            if (q < 0.0) q += kTwoPi;
            q += phi.front();
            j1 = static_cast<std::size_t>(std::upper_bound(phi.begin(), phi.end(), q) - phi.begin());
            if (j1 == cols) {
                j0 = cols - 1;
                j1 = 0;
                tp = (q - phi.back()) / (phi.front() + kTwoPi - phi.back());
            } else {
                j0 = j1 - 1;
                tp = (q - phi[j0]) / (phi[j1] - phi[j0]);
            }
        }
        auto at = [&](std::size_t i, std::size_t j) { return data->values[i * cols + j]; };
        const Complex lo = (1.0 - tp) * at(i0, j0) + tp * at(i0, j1);
        const Complex hi = (1.0 - tp) * at(i1, j0) + tp * at(i1, j1);
        return (1.0 - tr) * lo + tr * hi;
    };
    std::vector<double> knots(data->rho.begin(), data->rho.end());
    return Symbol(fn, {np == 1, kInf, std::nullopt, std::move(knots), std::move(description)});
}

Symbol load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open symbol table '" + path + "'", 0, 0);
    const CsvTable csv = read_csv(in);
    const std::size_t c_rho = csv.column("rho"), c_phi = csv.column("phi");
    const std::size_t c_re = csv.column("re"), c_im = csv.column("im");
    std::map<std::pair<double, double>, Complex> cells;
    std::vector<double> rhos, phis;
    for (std::size_t k = 0; k < csv.rows.size(); ++k) {
        const auto& row = csv.rows[k];
        const std::size_t line = k + 2;
        const double r = parse_real_cell(row[c_rho], line, c_rho + 1);
        const double p = parse_real_cell(row[c_phi], line, c_phi + 1);
        const Complex v{parse_real_cell(row[c_re], line, c_re + 1), parse_real_cell(row[c_im], line, c_im + 1)};
        if (!(r >= 0.0 && r < 1.0)) throw ParseError("rho must lie in [0, 1)", line, c_rho + 1);
        if (!cells.emplace(std::make_pair(r, p), v).second) throw ParseError("duplicate grid point", line, 1);
        rhos.push_back(r);
        phis.push_back(p);
    }
    for (auto* v : {&rhos, &phis}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    if (cells.size() != rhos.size() * phis.size())
        throw ParseError("table in '" + path + "' is not a full rho x phi grid", 0, 0);
    SymbolTable table{rhos, phis, {}};
    for (double r : rhos)
        for (double p : phis) table.values.push_back(cells.at({r, p}));
    return make_table(std::move(table), "table:" + path);
}

Symbol transform(const Symbol& a, const Transform& t) {
    switch (t.kind) {
        case TransformKind::modulus: return modulus(a);
        case TransformKind::conjugate: return conjugate(a);
        case TransformKind::truncate: return truncate(a, t.rho);
    }
    throw DomainError("unknown symbol transform");
}

std::vector<Complex> eval_grid(const Symbol& a, const std::vector<PolarPoint>& grid) {
    std::vector<Complex> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& p = grid[i];
        if (!(p.rho >= 0.0 && p.rho < 1.0))
            throw DomainError("grid point " + std::to_string(i) + " " + point_text(p) +
                              " lies outside the open disc");
        out.push_back(a(p));
    }
    return out;
}

}  // namespace bergman
