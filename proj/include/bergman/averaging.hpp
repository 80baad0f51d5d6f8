#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bergman/geometry.hpp"
#include "bergman/quadrature.hpp"
#include "bergman/symbols.hpp"

namespace bergman {

inline constexpr std::size_t kDefaultZetaGrid = 16;

/// Normalized average of a over the part of box cut off at zeta:
///   (1/|D|) (1/pi) int_{r_in}^{|zeta|} int_{theta_in}^{arg zeta} a rho dphi drho.
/// tol bounds the error of the returned average. Zeta may lie anywhere in
/// the closed box; DomainError otherwise.
Complex avg_hat(const Symbol& a, const DyadicBox& box, const PolarPoint& zeta, double tol);

struct AveragingReport {
    DyadicBox box;
    double sup_over_zeta = 0.0;
    PolarPoint argmax_zeta;
    double carleson_mean = 0.0;
    std::size_t zeta_grid_size = 0;
    double error_estimate = 0.0;
    bool converged = true;
};

/// Maximum of |avg_hat| over a tensor grid of n_rho x n_phi points spanning
/// the closed box (corners included), plus the Carleson mean of the box.
AveragingReport sup_avg(const Symbol& a, const DyadicBox& box, std::pair<std::size_t, std::size_t> grid,
                        double tol);

/// Values of avg_hat on the tensor grid, row-major in rho.
struct AverageGrid {
    std::vector<double> rho;
    std::vector<double> phi;
    std::vector<Complex> values;
    double error_estimate = 0.0;
    bool converged = true;
};
AverageGrid avg_hat_grid(const Symbol& a, const DyadicBox& box, std::size_t n_rho, std::size_t n_phi, double tol);

/// (1/|D|) int_D |a| dA, within tol.
double carleson_mean(const Symbol& a, const DyadicBox& box, double tol);

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Root-mean-square residual of the log-log fit.
    double residual = 0.0;
};

/// Least squares fit of log y against log delta; at least 3 points, all positive.
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& values);

}  // namespace bergman
