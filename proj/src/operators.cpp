#include "bergman/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "bergman/csv.hpp"
#include "bergman/errors.hpp"
#include "bergman/parallel.hpp"

namespace bergman {

// ---------------------------------------------------------------------------
// Test functions

TestFunction TestFunction::polynomial(std::vector<Complex> coefficients) {
    if (coefficients.empty()) coefficients.push_back(0.0);
    TestFunction t;
    std::string text = "poly:";
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        if (i) text += ';';
        text += format_real(coefficients[i].real()) + "," + format_real(coefficients[i].imag());
    }
    t.poly_ = std::move(coefficients);
    t.description_ = std::move(text);
    return t;
}

TestFunction TestFunction::monomial(std::size_t k) {
    std::vector<Complex> c(k + 1, 0.0);
    c[k] = 1.0;
    auto t = polynomial(std::move(c));
    t.description_ = "z^" + std::to_string(k);
    return t;
}

TestFunction TestFunction::callable(Fn f, std::string description) {
    TestFunction t;
    t.f_ = std::move(f);
    t.description_ = std::move(description);
    return t;
}

TestFunction TestFunction::callable(Fn f, Fn df, Fn d2f, std::string description) {
    TestFunction t = callable(std::move(f), std::move(description));
    t.df_ = std::move(df);
    t.d2f_ = std::move(d2f);
    return t;
}

Complex TestFunction::operator()(Complex z) const {
    if (!poly_) return f_(z);
    Complex v{};
    for (auto it = poly_->rbegin(); it != poly_->rend(); ++it) v = v * z + *it;
    return v;
}

Complex TestFunction::derivative(Complex z) const {
    if (!poly_) {
        if (!df_) throw DomainError("test function has no derivative");
        return df_(z);
    }
    Complex v{};
    for (std::size_t k = poly_->size(); k-- > 1;) v = v * z + static_cast<double>(k) * (*poly_)[k];
    return v;
}

Complex TestFunction::second_derivative(Complex z) const {
    if (!poly_) {
        if (!d2f_) throw DomainError("test function has no second derivative");
        return d2f_(z);
    }
    Complex v{};
    for (std::size_t k = poly_->size(); k-- > 2;) v = v * z + static_cast<double>(k * (k - 1)) * (*poly_)[k];
    return v;
}

std::optional<std::size_t> TestFunction::degree() const {
    if (!poly_) return std::nullopt;
    std::size_t d = poly_->size() - 1;
    while (d > 0 && (*poly_)[d] == Complex{}) --d;
    return d;
}

const std::vector<Complex>& TestFunction::coefficients() const {
    if (!poly_) throw DomainError("test function is not a polynomial");
    return *poly_;
}

const char* to_string(OperatorKind kind) { return kind == OperatorKind::toeplitz ? "toeplitz" : "hankel"; }

// ---------------------------------------------------------------------------
// Grids and kernels

bool FieldSample::all_converged() const {
    return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

void write_field_csv(std::ostream& out, const FieldSample& sample) {
    write_csv_row(out, {"z_re", "z_im", "value_re", "value_im", "err"});
    for (std::size_t i = 0; i < sample.grid.size(); ++i) {
        write_csv_row(out, {format_real(sample.grid[i].real()), format_real(sample.grid[i].imag()),
                            format_real(sample.values[i].real()), format_real(sample.values[i].imag()),
                            format_real(sample.per_point_error[i])});
    }
}

std::vector<Complex> tensor_grid(const std::vector<double>& radii, std::size_t angles) {
    std::vector<Complex> grid;
    for (double r : radii) {
        if (!(r >= 0.0 && r < 1.0)) throw DomainError("grid radius outside [0, 1)");
        if (r == 0.0) {
            grid.emplace_back(0.0, 0.0);
            continue;
        }
        for (std::size_t j = 0; j < angles; ++j)
            grid.push_back(std::polar(r, kTwoPi * static_cast<double>(j) / static_cast<double>(angles)));
    }
    return grid;
}

std::vector<Complex> default_grid() { return tensor_grid({0.0, 0.3, 0.6, 0.8, 0.9}, 8); }

namespace {

void require_interior(Complex z, const char* what) {
    if (!(std::abs(z) < 1.0)) throw DomainError(std::string(what) + " must lie in the open unit disc");
}

void require_grid(const std::vector<Complex>& grid) {
    for (const auto& z : grid) require_interior(z, "grid point");
}

FieldSample empty_field(const std::vector<Complex>& grid, std::string descriptor, double tol) {
    FieldSample s;
    s.grid = grid;
    s.values.assign(grid.size(), Complex{});
    s.per_point_error.assign(grid.size(), 0.0);
    s.converged.assign(grid.size(), true);
    s.descriptor = std::move(descriptor);
    s.tol = tol;
    return s;
}

std::string describe(OperatorKind kind, const Symbol& a, const TestFunction& f, const std::string& extent) {
    return std::string(to_string(kind)) + " a=" + a.description() + " f=" + f.description() + " " + extent;
}

}  // namespace

Complex operator_kernel(OperatorKind kind, Complex z, Complex zeta) {
    const Complex w = kind == OperatorKind::toeplitz ? z * std::conj(zeta) : std::conj(z) * zeta;
    const Complex d = 1.0 - w;
    return 1.0 / (d * d);
}

Complex kernel_eval(KernelKind kind, Complex lambda, Complex z) {
    require_interior(lambda, "lambda");
    require_interior(z, "z");
    switch (kind) {
        case KernelKind::bergman:
            return operator_kernel(OperatorKind::toeplitz, z, lambda);
        case KernelKind::normalized:
            return (1.0 - std::norm(lambda)) * operator_kernel(OperatorKind::toeplitz, z, lambda);
        case KernelKind::weight:
            return 1.0 - std::norm(z);
        case KernelKind::mobius:
            return (lambda - z) / (1.0 - z * std::conj(lambda));
    }
    throw DomainError("unknown kernel kind");
}

// ---------------------------------------------------------------------------
// Truncated operators

FieldSample annulus_apply(OperatorKind kind, const Symbol& a, double r0, double r1, const TestFunction& f,
                          const std::vector<Complex>& grid, double tol) {
    require_grid(grid);
    if (!(r0 >= 0.0 && r0 <= r1 && r1 < 1.0)) throw DomainError("annulus radii must satisfy 0 <= r0 <= r1 < 1");
    auto sample = empty_field(grid, describe(kind, a, f, "annulus=" + format_real(r0) + ".." + format_real(r1)), tol);
    if (grid.empty() || r0 == r1) return sample;
    // w = z conj(zeta) for Toeplitz, conj(z) zeta for Hankel.
    const bool toeplitz = kind == OperatorKind::toeplitz;
    std::vector<Complex> points = grid;
    if (!toeplitz)
        for (auto& z : points) z = std::conj(z);
    const BatchIntegrand integrand = [&](double rho, double phi, std::span<Complex> out) {
        const Complex zeta = std::polar(rho, phi);
        const Complex v = a(rho, phi) * f(zeta);
        const Complex factor = toeplitz ? std::conj(zeta) : zeta;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const Complex d = 1.0 - points[k] * factor;
            out[k] = v / (d * d);
        }
    };
    AnnulusOptions options;
    options.radial_breaks = a.radial_breaks(r0, r1);
    const auto results = integrate_annulus_batch(grid.size(), integrand, r0, r1, tol, options);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        sample.values[k] = results[k].value;
        sample.per_point_error[k] = results[k].error_estimate;
        sample.converged[k] = results[k].converged;
    }
    return sample;
}

FieldSample truncated_apply(OperatorKind kind, const Symbol& a, double rho, const TestFunction& f,
                            const std::vector<Complex>& grid, double tol) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("truncation radius must lie in (0, 1)");
    auto sample = annulus_apply(kind, a, 0.0, rho, f, grid, tol);
    sample.descriptor = describe(kind, a, f, "rho=" + format_real(rho));
    return sample;
}

FieldSample toeplitz_truncated(const Symbol& a, double rho, const TestFunction& f, const std::vector<Complex>& grid,
                               double tol) {
    return truncated_apply(OperatorKind::toeplitz, a, rho, f, grid, tol);
}

FieldSample hankel_truncated(const Symbol& a, double rho, const TestFunction& f, const std::vector<Complex>& grid,
                             double tol) {
    return truncated_apply(OperatorKind::hankel, a, rho, f, grid, tol);
}

// ---------------------------------------------------------------------------
// Box partial operators

namespace {

QuadratureResult box_value(OperatorKind kind, const DyadicBox& box, const Symbol& a, const TestFunction& f, Complex z,
                           double tol) {
    const PolarIntegrand integrand = [&](double rho, double phi) {
        const Complex zeta = std::polar(rho, phi);
        return a(rho, phi) * f(zeta) * operator_kernel(kind, z, zeta);
    };
    BoxOptions options;
    options.radial_breaks = a.radial_breaks(box.r_in(), box.r_out());
    return integrate_box(integrand, PolarRect::of(box), tol, options);
}

}  // namespace

FieldSample box_partial_apply(OperatorKind kind, BoxIndex n, const Symbol& a, const TestFunction& f,
                              const std::vector<Complex>& grid, double tol) {
    require_grid(grid);
    const DyadicBox box = DyadicBox::from_index(n);
    auto sample = empty_field(
        grid, describe(kind, a, f, "box=" + std::to_string(n.m) + "," + std::to_string(n.mu)), tol);
    parallel_for(grid.size(), [&](std::size_t k) {
        const auto r = box_value(kind, box, a, f, grid[k], tol);
        sample.values[k] = r.value;
        sample.per_point_error[k] = r.error_estimate;
        sample.converged[k] = r.converged;
    });
    return sample;
}

FieldSample series_apply(OperatorKind kind, const Symbol& a, const TestFunction& f, int m,
                         const std::vector<Complex>& grid, double tol) {
    require_grid(grid);
    if (m < 0) throw DomainError("generation must be nonnegative");
    auto sample = empty_field(grid, describe(kind, a, f, "generations=" + std::to_string(m)), tol);
    if (m == 0 || grid.empty()) return sample;
    const Decomposition decomposition = enumerate_decomposition(m);
    const std::size_t boxes = decomposition.size();
    const double share = tol / static_cast<double>(boxes);
    std::vector<QuadratureResult> parts(boxes * grid.size());
    parallel_for(parts.size(), [&](std::size_t i) {
        const std::size_t b = i / grid.size(), k = i % grid.size();
        parts[i] = box_value(kind, decomposition.box(b), a, f, grid[k], share);
    });
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CompensatedSum<Complex> value;
        double err = 0.0;
        bool ok = true;
        for (std::size_t b = 0; b < boxes; ++b) {
            const auto& p = parts[b * grid.size() + k];
            value.add(p.value);
            err += p.error_estimate;
            ok = ok && p.converged;
        }
        sample.values[k] = value.value();
        sample.per_point_error[k] = err;
        sample.converged[k] = ok;
    }
    return sample;
}

// ---------------------------------------------------------------------------
// Limits along a radius schedule

std::vector<double> dyadic_schedule(int m_max) {
    if (m_max < 1) throw DomainError("schedule needs at least one generation");
    std::vector<double> out;
    for (int m = 1; m <= m_max; ++m) out.push_back(1.0 - std::ldexp(1.0, -m));
    return out;
}

LimitResult limit_apply(OperatorKind kind, const Symbol& a, const TestFunction& f, const std::vector<Complex>& grid,
                        const std::vector<double>& schedule, double tol, double cauchy_eps) {
    require_grid(grid);
    if (schedule.empty()) throw DomainError("empty radius schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] > 0.0 && schedule[i] < 1.0) || (i > 0 && !(schedule[i] > schedule[i - 1])))
            throw DomainError("schedule must increase within (0, 1)");
    }
    LimitResult result;
    result.sample = empty_field(grid, describe(kind, a, f, "limit"), tol);
    std::vector<CompensatedSum<Complex>> total(grid.size());
    const double step_tol = tol / static_cast<double>(schedule.size());
    double previous = 0.0;
    double last_diff = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const double r1 = schedule[i];
        const auto piece = annulus_apply(kind, a, previous, r1, f, grid, step_tol);
        double ss = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            total[k].add(piece.values[k]);
            ss += std::norm(piece.values[k]);
            result.sample.per_point_error[k] += piece.per_point_error[k];
            result.sample.converged[k] = result.sample.converged[k] && piece.converged[k];
        }
        const double diff = grid.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(grid.size()));
        result.log.push_back({static_cast<int>(i + 1), r1, diff});
        previous = r1;
        // Differences must also be shrinking: early annuli can be tiny simply
        // because f carries little mass near the origin.
        const bool done = diff < cauchy_eps && last_diff < cauchy_eps && diff < last_diff;
        last_diff = diff;
        if (done) {
            result.converged = true;
            break;
        }
    }
    for (std::size_t k = 0; k < grid.size(); ++k) result.sample.values[k] = total[k].value();
    result.sample.descriptor = describe(kind, a, f, "rho=" + format_real(previous));
    return result;
}

// ---------------------------------------------------------------------------
// Transposes and the dual pairing

FieldSample transpose_apply(OperatorKind kind, const Symbol& a, double rho, const TestFunction& g,
                            const std::vector<Complex>& grid, double tol) {
    return truncated_apply(kind, conjugate(a), rho, g, grid, tol);
}

DualityReport duality_defect(const Symbol& a, double rho, const TestFunction& f, const TestFunction& g, double tol,
                             const DualityOptions& options) {
    const double radii[] = {0.0, 1.0};
    const auto rule = polar_tensor_rule(radii, options.radial_order, options.angular);
    std::vector<Complex> points;
    points.reserve(rule.size());
    for (const auto& node : rule) points.push_back(std::polar(node.rho, node.phi));

    const auto tf = toeplitz_truncated(a, rho, f, points, tol);
    const auto tg = transpose_apply(OperatorKind::toeplitz, a, rho, g, points, tol);
    DualityReport report;
    CompensatedSum<Complex> lhs, rhs;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        lhs.add(rule[i].weight * tf.values[i] * std::conj(g(points[i])));
        rhs.add(rule[i].weight * f(points[i]) * std::conj(tg.values[i]));
    }
    report.lhs = lhs.value();
    report.rhs = rhs.value();

    const BatchIntegrand direct = [&](double r, double phi, std::span<Complex> out) {
        const Complex zeta = std::polar(r, phi);
        out[0] = a(r, phi) * f(zeta) * std::conj(g(zeta));
    };
    AnnulusOptions annulus;
    annulus.radial_breaks = a.radial_breaks(0.0, rho);
    const auto d = integrate_annulus_batch(1, direct, 0.0, rho, tol, annulus);
    report.direct = d[0].value;
    report.defect = std::abs(report.lhs - report.rhs);
    report.converged = tf.all_converged() && tg.all_converged() && d[0].converged;
    return report;
}

// ---------------------------------------------------------------------------
// Diagnostics

double majorant_GD(const TestFunction& f, const DyadicBox& box, Complex z, double tol) {
    if (!f.has_derivatives()) throw DomainError("majorant needs a test function with exact derivatives");
    require_interior(z, "z");
    const PolarIntegrand integrand = [&](double rho, double phi) {
        const Complex zeta = std::polar(rho, phi);
        const double w = 1.0 - rho * rho;
        const double g = std::abs(f(zeta)) + std::abs(f.derivative(zeta)) * w +
                         std::abs(f.second_derivative(zeta)) * w * w;
        return Complex(g / std::norm(1.0 - z * std::conj(zeta)));
    };
    return integrate_box(integrand, PolarRect::of(box), tol).value.real();
}

std::optional<double> BoxIntegralCache::find(BoxIndex box, const std::string& key) const {
    const auto it = values_.find({ordinal(box), key});
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

void BoxIntegralCache::store(BoxIndex box, const std::string& key, double value) {
    values_[{ordinal(box), key}] = value;
}

SubharmonicCheck subharmonic_bound_check(const TestFunction& f, BoxIndex n, const PolarPoint& w, double tol,
                                         BoxIntegralCache* cache) {
    const InscribedDisc disc = inscribed_disc(n, w);
    const NeighborSet set = neighbors(n, enumerate_decomposition(n.m));
    const PolarIntegrand modulus = [&f](double rho, double phi) { return Complex(std::abs(f(std::polar(rho, phi)))); };
    double integral = 0.0;
    for (std::size_t i = 0; i < set.members.size(); ++i) {
        const BoxIndex member = set.members[i];
        if (cache) {
            if (auto hit = cache->find(member, f.description())) {
                integral += *hit;
                continue;
            }
        }
        const DyadicBox& box = set.union_region[i];
        double scale = 0.0;
        for (double r : {box.r_in(), 0.5 * (box.r_in() + box.r_out()), box.r_out()})
            for (double t : {box.theta_in(), 0.5 * (box.theta_in() + box.theta_out()), box.theta_out()})
                scale = std::max(scale, std::abs(f(std::polar(r, t))));
        const double value =
            integrate_box(modulus, PolarRect::of(box), std::max(tol * scale * box.area(), 1e-300)).value.real();
        if (cache) cache->store(member, f.description(), value);
        integral += value;
    }
    SubharmonicCheck check;
    check.lhs = std::abs(f(w.z()));
    const double disc_area = disc.radius * disc.radius;
    check.rhs = integral / disc_area;
    check.constant = DyadicBox::from_index(n).area() / disc_area;
    check.pass = check.lhs <= check.rhs;
    return check;
}

}  // namespace bergman
