#include "bergman/averaging.hpp"

#include <algorithm>
#include <cmath>

#include "bergman/errors.hpp"
#include "bergman/parallel.hpp"

namespace bergman {

namespace {

constexpr double kAngleSlack = 1e-9;

// Angle of zeta past theta_in, clamped to [0, width]; zeta must lie in the closed box.
double cut_angle(const DyadicBox& box, const PolarPoint& zeta) {
    if (!box.contains_closed(zeta)) throw DomainError("zeta lies outside the box");
    const double rel = box.relative_angle(zeta);
    if (rel <= box.width()) return rel;
    if (kTwoPi - rel <= kAngleSlack) return 0.0;
    return box.width();
}

QuadratureResult radial_piece(const Symbol& a, double r0, double r1, double tol, bool absolute) {
    const RadialIntegrand g = [&a, absolute](double r) {
        const Complex v = a(r, 0.0);
        return (absolute ? Complex(std::abs(v)) : v) * r;
    };
    return integrate_radial(g, r0, r1, tol, a.breaks(), a.oscillation_onset());
}

QuadratureResult box_piece(const Symbol& a, const PolarRect& rect, double tol, bool absolute) {
    const PolarIntegrand f = [&a, absolute](double rho, double phi) {
        const Complex v = a(rho, phi);
        return absolute ? Complex(std::abs(v)) : v;
    };
    BoxOptions options;
    options.radial_breaks = a.radial_breaks(rect.r0, rect.r1);
    return integrate_box(f, rect, tol, options);
}

}  // namespace

Complex avg_hat(const Symbol& a, const DyadicBox& box, const PolarPoint& zeta, double tol) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    const double angle = cut_angle(box, zeta);
    const double rho = std::clamp(zeta.rho, box.r_in(), box.r_out());
    const double area = box.area();
    if (angle == 0.0 || rho == box.r_in()) return 0.0;
    if (a.is_radial()) {
        const auto r = radial_piece(a, box.r_in(), rho, tol * kPi * area / angle, false);
        return r.value * angle / (kPi * area);
    }
    const PolarRect rect{box.r_in(), rho, box.theta_in(), box.theta_in() + angle};
    return box_piece(a, rect, tol * area, false).value / area;
}

AverageGrid avg_hat_grid(const Symbol& a, const DyadicBox& box, std::size_t n_rho, std::size_t n_phi, double tol) {
    if (n_rho < 2 || n_phi < 2) throw DomainError("zeta grid must be at least 2 x 2");
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    AverageGrid out;
    out.rho.resize(n_rho);
    out.phi.resize(n_phi);
    for (std::size_t i = 0; i < n_rho; ++i)
        out.rho[i] = i + 1 == n_rho ? box.r_out()
                                    : box.r_in() + (box.r_out() - box.r_in()) * static_cast<double>(i) / (n_rho - 1);
    for (std::size_t j = 0; j < n_phi; ++j)
        out.phi[j] = box.theta_in() + box.width() * static_cast<double>(j) / static_cast<double>(n_phi - 1);
    out.values.assign(n_rho * n_phi, Complex{});
    const double area = box.area();

    if (a.is_radial()) {
        // The average factors into a radial prefix integral times the cut angle.
        const double radial_tol = tol * kPi * area / box.width();
        std::vector<QuadratureResult> pieces(n_rho - 1);
        parallel_for(n_rho - 1, [&](std::size_t i) {
            const double share = radial_tol / static_cast<double>(n_rho - 1);
            pieces[i] = radial_piece(a, out.rho[i], out.rho[i + 1], share, false);
        });
        CompensatedSum<Complex> prefix;
        double err = 0.0;
        for (std::size_t i = 1; i < n_rho; ++i) {
            prefix.add(pieces[i - 1].value);
            err += pieces[i - 1].error_estimate;
            for (std::size_t j = 0; j < n_phi; ++j) {
                const double angle = out.phi[j] - box.theta_in();
                out.values[i * n_phi + j] = prefix.value() * angle / (kPi * area);
            }
        }
        out.error_estimate = err * box.width() / (kPi * area);
        out.converged = out.error_estimate <= tol;
        return out;
    }

    // General symbols: integrate every grid cell once and take 2D prefix sums.
    const std::size_t cells = (n_rho - 1) * (n_phi - 1);
    std::vector<QuadratureResult> pieces(cells);
    parallel_for(cells, [&](std::size_t c) {
        const std::size_t i = c / (n_phi - 1), j = c % (n_phi - 1);
        const PolarRect rect{out.rho[i], out.rho[i + 1], out.phi[j], out.phi[j + 1]};
        pieces[c] = box_piece(a, rect, tol * area / static_cast<double>(cells), false);
    });
    std::vector<Complex> column(n_phi, Complex{});
    double err = 0.0;
    for (std::size_t i = 1; i < n_rho; ++i) {
        Complex row{};
        for (std::size_t j = 1; j < n_phi; ++j) {
            const auto& p = pieces[(i - 1) * (n_phi - 1) + (j - 1)];
            row += p.value;
            column[j] += row;
            err += p.error_estimate;
            out.values[i * n_phi + j] = column[j] / area;
        }
    }
    out.error_estimate = err / area;
    out.converged = out.error_estimate <= tol;
    return out;
}

double carleson_mean(const Symbol& a, const DyadicBox& box, double tol) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    const double area = box.area();
    if (a.is_radial()) {
        const auto r = radial_piece(a, box.r_in(), box.r_out(), tol * kPi * area / box.width(), true);
        return r.value.real() * box.width() / (kPi * area);
    }
    const auto r = box_piece(a, PolarRect::of(box), tol * area, true);
    return r.value.real() / area;
}

AveragingReport sup_avg(const Symbol& a, const DyadicBox& box, std::pair<std::size_t, std::size_t> grid,
                        double tol) {
    const auto values = avg_hat_grid(a, box, grid.first, grid.second, tol);
    AveragingReport report{box, 0.0, {box.r_in(), box.theta_in()}, 0.0, grid.first * grid.second,
                           values.error_estimate, values.converged};
    for (std::size_t i = 0; i < values.rho.size(); ++i) {
        for (std::size_t j = 0; j < values.phi.size(); ++j) {
            const double v = std::abs(values.values[i * values.phi.size() + j]);
            if (v > report.sup_over_zeta) {
                report.sup_over_zeta = v;
                report.argmax_zeta = {values.rho[i], values.phi[j]};
            }
        }
    }
    report.carleson_mean = carleson_mean(a, box, tol);
    return report;
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& values) {
    if (values.size() < 3) throw DomainError("scaling fit needs at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [d, y] : values) {
        if (!(d > 0.0 && y > 0.0)) throw DomainError("scaling fit needs positive data");
        const double lx = std::log(d), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(values.size());
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0)) throw DomainError("scaling fit needs distinct abscissae");
    ScalingFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (const auto& [d, y] : values) {
        const double r = std::log(y) - (fit.intercept + fit.slope * std::log(d));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

}  // namespace bergman
