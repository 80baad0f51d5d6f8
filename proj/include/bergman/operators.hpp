#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bergman/geometry.hpp"
#include "bergman/quadrature.hpp"
#include "bergman/symbols.hpp"

namespace bergman {

/// Analytic test function with its first two derivatives. Polynomials are
/// evaluated by Horner recurrences; callables may omit derivatives, in which
/// case derivative-based diagnostics refuse them.
class TestFunction {
public:
    using Fn = std::function<Complex(Complex)>;

    static TestFunction polynomial(std::vector<Complex> coefficients);
    static TestFunction monomial(std::size_t k);
    static TestFunction callable(Fn f, std::string description);
    static TestFunction callable(Fn f, Fn df, Fn d2f, std::string description);

    Complex operator()(Complex z) const;
    Complex derivative(Complex z) const;
    Complex second_derivative(Complex z) const;

    bool has_derivatives() const { return poly_.has_value() || static_cast<bool>(df_); }
    bool is_polynomial() const { return poly_.has_value(); }
    /// Degree for polynomials, empty otherwise.
    std::optional<std::size_t> degree() const;
    const std::vector<Complex>& coefficients() const;
    const std::string& description() const { return description_; }

private:
    std::optional<std::vector<Complex>> poly_;
    Fn f_, df_, d2f_;
    std::string description_;
};

enum class OperatorKind { toeplitz, hankel };
const char* to_string(OperatorKind kind);

struct FieldSample {
    std::vector<Complex> grid;
    std::vector<Complex> values;
    std::vector<double> per_point_error;
    std::vector<bool> converged;
    std::string descriptor;
    double tol = 0.0;

    bool all_converged() const;
};

/// Columns z_re, z_im, value_re, value_im, err.
void write_field_csv(std::ostream& out, const FieldSample& sample);

/// Tensor grid of radii x equally spaced angles; a zero radius contributes one point.
std::vector<Complex> tensor_grid(const std::vector<double>& radii, std::size_t angles);
/// Radii {0, 0.3, 0.6, 0.8, 0.9} x 8 angles (33 points).
std::vector<Complex> default_grid();

enum class KernelKind { bergman, normalized, weight, mobius };

/// K_l(z) = (1 - z conj(l))^-2, k_l = W(l) K_l, W(z) = 1 - |z|^2 (l ignored),
/// phi_l(z) = (l - z) / (1 - z conj(l)). DomainError unless |l|, |z| < 1.
Complex kernel_eval(KernelKind kind, Complex lambda, Complex z);

/// (1 - z conj(zeta))^-2 for the Toeplitz kind, (1 - conj(z) zeta)^-2 for Hankel.
Complex operator_kernel(OperatorKind kind, Complex z, Complex zeta);

/// int_{|zeta| <= rho} a f K(z, zeta) dA(zeta) at every grid point.
FieldSample toeplitz_truncated(const Symbol& a, double rho, const TestFunction& f, const std::vector<Complex>& grid,
                               double tol);
FieldSample hankel_truncated(const Symbol& a, double rho, const TestFunction& f, const std::vector<Complex>& grid,
                             double tol);
FieldSample truncated_apply(OperatorKind kind, const Symbol& a, double rho, const TestFunction& f,
                            const std::vector<Complex>& grid, double tol);

/// The same integral restricted to the annulus r0 <= |zeta| <= r1.
FieldSample annulus_apply(OperatorKind kind, const Symbol& a, double r0, double r1, const TestFunction& f,
                          const std::vector<Complex>& grid, double tol);

/// The integral restricted to one dyadic box (F_n or H_n).
FieldSample box_partial_apply(OperatorKind kind, BoxIndex n, const Symbol& a, const TestFunction& f,
                              const std::vector<Complex>& grid, double tol);

/// Sum of box_partial_apply over all boxes of generation <= m; tol is split
/// evenly over the boxes. m = 0 gives the zero field.
FieldSample series_apply(OperatorKind kind, const Symbol& a, const TestFunction& f, int m,
                         const std::vector<Complex>& grid, double tol);

struct ConvergenceEntry {
    int m = 0;
    double rho = 0.0;
    /// sqrt(mean |iterate_m - iterate_{m-1}|^2) over the grid.
    double grid_l2_diff = 0.0;
};

struct LimitResult {
    FieldSample sample;
    std::vector<ConvergenceEntry> log;
    bool converged = false;
};

inline constexpr int kDefaultLimitGenerations = 40;

/// rho_m = 1 - 2^-m for m = 1..m_max.
std::vector<double> dyadic_schedule(int m_max);

/// Iterates the truncated operator along an increasing schedule, adding one
/// annulus per step (each within tol / schedule length). Converged once two
/// consecutive differences fall below cauchy_eps with the later one smaller;
/// otherwise returns the last iterate with converged = false.
LimitResult limit_apply(OperatorKind kind, const Symbol& a, const TestFunction& f, const std::vector<Complex>& grid,
                        const std::vector<double>& schedule, double tol, double cauchy_eps);

/// The truncated operator with the conjugate symbol applied to g.
FieldSample transpose_apply(OperatorKind kind, const Symbol& a, double rho, const TestFunction& g,
                            const std::vector<Complex>& grid, double tol);

struct DualityOptions {
    /// Outer rule over the unit disc: one Gauss panel in rho, trapezoid in angle.
    int radial_order = 16;
    std::size_t angular = 256;
};

struct DualityReport {
    /// <T f, g> with <u, v> = int u conj(v) dA.
    Complex lhs;
    /// <f, T' g> with T' the operator of the conjugate symbol.
    Complex rhs;
    /// int_{|zeta| <= rho} a f conj(g) dA.
    Complex direct;
    double defect = 0.0;
    bool converged = true;
};

/// Toeplitz duality pairing for the truncated operator, both sides by
/// quadrature over the disc.
DualityReport duality_defect(const Symbol& a, double rho, const TestFunction& f, const TestFunction& g, double tol,
                             const DualityOptions& options = {});

/// G_D(z) = int_D (|f| + |f'| W + |f''| W^2) / |1 - z conj(zeta)|^2 dA(zeta).
/// DomainError for test functions without derivatives.
double majorant_GD(const TestFunction& f, const DyadicBox& box, Complex z, double tol);

struct SubharmonicCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    /// |D_n| / |D(w, R)| for the inscribed disc used.
    double constant = 0.0;
    bool pass = false;
};

/// Memo of int_D |f| dA keyed by box and test function description.
class BoxIntegralCache {
public:
    std::optional<double> find(BoxIndex box, const std::string& key) const;
    void store(BoxIndex box, const std::string& key, double value);

private:
    std::map<std::pair<std::size_t, std::string>, double> values_;
};

/// |f(w)| <= (1/|D(w,R)|) int_{U_n} |f| dA with D(w,R) the inscribed disc.
SubharmonicCheck subharmonic_bound_check(const TestFunction& f, BoxIndex n, const PolarPoint& w, double tol,
                                         BoxIntegralCache* cache = nullptr);

}  // namespace bergman
