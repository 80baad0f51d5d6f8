#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bergman/averaging.hpp"
#include "bergman/symbols.hpp"

namespace bergman {

inline constexpr std::size_t kDefaultSpectrumLength = 10'000;
inline constexpr std::size_t kDefaultSectionSize = 256;
inline constexpr double kPowerIterationStagnation = 1e-10;
inline constexpr std::size_t kDefaultPowerIterations = 1'000'000;

struct GrowthFit {
    ScalingFit fit;
    std::size_t n_lo = 0;
    std::size_t n_hi = 0;
    std::size_t points_used = 0;
    /// Indices in the window skipped because gamma_n was zero.
    std::size_t points_excluded = 0;
};

/// gamma_0..gamma_{n_max} of a radial symbol: T_a z^n = gamma_n z^n with
/// gamma_n = 2 (n+1) int_0^1 a(r) r^{2n+1} dr.
struct SpectralSequence {
    std::string symbol;
    std::size_t n_max = 0;
    std::vector<Complex> gamma;
    std::vector<double> error;
    double tol = 0.0;
    bool converged = true;
    std::optional<GrowthFit> fit;
};

Complex radial_eigenvalue(const Symbol& a, std::size_t n, double tol);
SpectralSequence radial_sequence(const Symbol& a, std::size_t n_max, double tol);

/// <T_a e_m, e_n> with e_k = sqrt(k+1) z^k, i.e. sqrt((m+1)(n+1)) int a zeta^m conj(zeta)^n dA.
Complex matrix_element(const Symbol& a, std::size_t m, std::size_t n, double tol);

/// The N x N section, row-major with entry [n * N + m] = matrix_element(a, m, n).
std::vector<Complex> section_matrix(const Symbol& a, std::size_t N, double tol);

struct SectionNorm {
    /// Largest singular value estimate; a lower bound for the norm on A^2.
    double norm = 0.0;
    /// |A^H A x - norm^2 x| / norm^2 at the final iterate.
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Power iteration on A^H A from the normalized all-ones vector, stopped when
/// the estimate changes by less than kPowerIterationStagnation (relative).
SectionNorm finite_section_norm(const Symbol& a, std::size_t N, double tol,
                                std::size_t max_iterations = kDefaultPowerIterations);
SectionNorm power_iteration_norm(const std::vector<Complex>& matrix, std::size_t N, std::size_t max_iterations);

/// Log-log least squares of |gamma_n| against n for n in [n_lo, n_hi];
/// zero entries are skipped and counted. DomainError when fewer than 3 remain.
GrowthFit growth_fit(const SpectralSequence& seq, std::size_t n_lo, std::size_t n_hi);

/// Columns n, gamma_re, gamma_im, err.
void write_spectrum_csv(std::ostream& out, const SpectralSequence& seq);

}  // namespace bergman
