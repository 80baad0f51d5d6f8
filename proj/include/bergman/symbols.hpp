#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bergman/geometry.hpp"

namespace bergman {

using Complex = std::complex<double>;

/// A locally integrable function on the open unit disc, evaluated in polar
/// coordinates, together with the metadata the quadrature layer needs.
/// Immutable; copies share state and evaluation is safe from many threads.
class Symbol {
public:
    using Function = std::function<Complex(double rho, double phi)>;

    struct Traits {
        bool radial = false;
        /// a belongs to L^q for every q below this value (infinity when bounded).
        std::optional<double> integrability_bound;
        /// From this radius on the symbol carries a sin(1/(1-r)) factor or its modulus.
        std::optional<double> oscillation_onset;
        /// Radii of radial jump discontinuities or kinks.
        std::vector<double> breaks;
        std::string description;
    };

    Symbol(Function fn, Traits traits);

    /// Throws DomainError unless 0 <= rho < 1.
    Complex operator()(double rho, double phi) const;
    Complex operator()(const PolarPoint& p) const { return (*this)(p.rho, p.phi); }

    bool is_radial() const { return impl_->traits.radial; }
    const std::optional<double>& integrability_bound() const { return impl_->traits.integrability_bound; }
    const std::optional<double>& oscillation_onset() const { return impl_->traits.oscillation_onset; }
    const std::vector<double>& breaks() const { return impl_->traits.breaks; }
    /// Canonical symbol-expression text (parseable for built-in symbols).
    const std::string& description() const { return impl_->traits.description; }

    /// Panel boundaries for radial quadrature on (r0, r1): discontinuities plus,
    /// for oscillating symbols, every half period y = pi k of y = 1/(1-r).
    std::vector<double> radial_breaks(double r0, double r1) const;

    /// Truncation radius when this symbol is a_rho for some inner symbol a.
    std::optional<double> truncation_radius() const;

private:
    struct Impl {
        Function fn;
        Traits traits;
        std::shared_ptr<const Impl> truncation_base;
        double truncation_radius = 1.0;
    };
    explicit Symbol(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    std::shared_ptr<const Impl> impl_;

    friend Symbol truncate(const Symbol& a, double rho);
};

Symbol make_constant(Complex c);
/// a_b(r e^{i theta}) = r^{-1} (1-r)^{-b} sin(1/(1-r)) for r >= 1/2, 1 inside; 0 < b <= 1/2.
Symbol make_ab(double b);
/// (1 - r)^{-b}, b < 1.
Symbol make_pow(double b);
Symbol modulus(const Symbol& a);
Symbol conjugate(const Symbol& a);
/// a on |z| <= rho, zero outside; 0 < rho < 1. Nested truncations collapse to the smaller radius.
Symbol truncate(const Symbol& a, double rho);
Symbol sum(const Symbol& a, const Symbol& b);
Symbol scale(const Symbol& a, Complex factor);
Symbol make_function(Symbol::Function fn, bool radial, std::string description);

/// Tensor table over (rho, phi) with bilinear interpolation (periodic in phi,
/// clamped in rho). A single phi column gives a radial symbol.
struct SymbolTable {
    std::vector<double> rho;  // ascending, distinct
    std::vector<double> phi;  // ascending, distinct, within one period
    std::vector<Complex> values;  // row-major: values[i * phi.size() + j]
};
inline constexpr int kTableInterpolationOrder = 1;
Symbol make_table(SymbolTable table, std::string description);
/// Reads a CSV with columns rho, phi, re, im covering a full tensor grid.
Symbol load_table(const std::string& path);

enum class TransformKind { modulus, conjugate, truncate };
struct Transform {
    TransformKind kind;
    double rho = 0.0;  // truncate only
};
Symbol transform(const Symbol& a, const Transform& t);

/// Values at every point in order; DomainError naming the first point with rho >= 1.
std::vector<Complex> eval_grid(const Symbol& a, const std::vector<PolarPoint>& grid);

/// Parses the symbol mini-language:
///   const:<re>[,<im>]  ab:<b>  pow:<b>  abs(<e>)  conj(<e>)  trunc:<rho>(<e>)  table:<path>
/// Errors are ParseError on line 1 with the 1-based column of the problem.
Symbol parse_symbol(std::string_view text);

}  // namespace bergman
