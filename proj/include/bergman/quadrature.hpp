#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bergman/geometry.hpp"

namespace bergman {

using Complex = std::complex<double>;

struct QuadratureResult {
    Complex value{};
    double error_estimate = 0.0;
    std::size_t nodes_used = 0;
    bool converged = true;
};

/// Polar rectangle [r0, r1] x [t0, t1].
struct PolarRect {
    double r0 = 0.0;
    double r1 = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;

    static PolarRect of(const DyadicBox& box) { return {box.r_in(), box.r_out(), box.theta_in(), box.theta_out()}; }
};

using PolarIntegrand = std::function<Complex(double rho, double phi)>;
using RadialIntegrand = std::function<Complex(double r)>;
/// Writes one value per integrand of a batch at the node (rho, phi).
using BatchIntegrand = std::function<void(double rho, double phi, std::span<Complex> out)>;

inline constexpr int kPanelOrder = 16;
inline constexpr int kEstimateOrder = 8;
inline constexpr std::size_t kDefaultNodeBudget = 10'000'000;

/// Neumaier-compensated accumulator.
template <class T>
class CompensatedSum {
public:
    void add(T x) {
        const T t = sum_ + x;
        if (magnitude(sum_) >= magnitude(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    T value() const { return sum_ + comp_; }

private:
    static double magnitude(double x) { return x < 0 ? -x : x; }
    static double magnitude(const Complex& x) { return std::abs(x.real()) + std::abs(x.imag()); }
    T sum_{};
    T comp_{};
};

struct BoxOptions {
    /// Extra radial panel boundaries (discontinuities, oscillation periods).
    std::vector<double> radial_breaks;
    std::size_t node_budget = kDefaultNodeBudget;
    double max_angular_panel = kPi / 4.0;
};

/// (1/pi) * integral of f(rho, phi) rho drho dphi over rect, i.e. the integral
/// against normalized area measure. Tensor 16-point Gauss-Legendre panels with
/// adaptive splitting on the axis with the larger 16-vs-8 point difference.
/// Requires r1 < 1.
QuadratureResult integrate_box(const PolarIntegrand& f, const PolarRect& rect, double tol,
                               const BoxOptions& options = {});

/// Integral of f over the whole disc against normalized area measure: a center
/// disc plus dyadic annuli, stopped when annulus contributions fall below tol.
QuadratureResult integrate_disc(const PolarIntegrand& f, double tol, const BoxOptions& options = {});

struct AnnulusOptions {
    std::vector<double> radial_breaks;
    std::size_t initial_angular = 32;
    std::size_t max_angular = 8192;
    int max_depth = 24;
};

/// Batch of integrals over the annulus r0 <= |z| <= r1 (r1 < 1) sharing one
/// node set: radial Gauss panels (graded at the dyadic radii 1 - 2^-k) times a
/// periodic trapezoid rule in angle, refined until each integrand is within tol.
std::vector<QuadratureResult> integrate_annulus_batch(std::size_t count, const BatchIntegrand& f, double r0,
                                                      double r1, double tol, const AnnulusOptions& options = {});

/// Adaptive 1D Gauss-Legendre on [a, b], splitting first at the given breaks.
QuadratureResult integrate_interval(const RadialIntegrand& g, double a, double b, double tol,
                                    std::span<const double> breaks = {});

/// Integral of g over [r0, r1] for integrands carrying sin(1/(1-r)) factors:
/// substitutes y = 1/(1-r), dr = dy / y^2, and applies adaptive Gauss panels
/// to each half period [pi k, pi (k+1)] in y, with compensated summation of
/// the panel contributions. Requires 1/2 <= r0 <= r1 < 1.
QuadratureResult integrate_radial_oscillatory(const RadialIntegrand& g, double r0, double r1, double tol,
                                              std::span<const double> breaks = {});

/// Dispatches [r0, onset) to integrate_interval and [onset, r1] to the
/// oscillatory rule when an onset is given.
QuadratureResult integrate_radial(const RadialIntegrand& g, double r0, double r1, double tol,
                                  std::span<const double> breaks, std::optional<double> oscillation_onset);

/// Weighted nodes of a fixed polar tensor rule over r0 <= |z| <= r1: Gauss
/// panels between consecutive radii, angular trapezoid with the given count.
/// Weights include the rho / pi area factor.
struct WeightedNode {
    double rho;
    double phi;
    double weight;
};
std::vector<WeightedNode> polar_tensor_rule(std::span<const double> radii, int order, std::size_t angular);

}  // namespace bergman
