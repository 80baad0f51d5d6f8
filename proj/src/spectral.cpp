#include "bergman/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>

#include "bergman/csv.hpp"
#include "bergman/errors.hpp"
#include "bergman/gauss_legendre.hpp"
#include "bergman/parallel.hpp"

namespace bergman {

namespace {

// Region split: Gauss panels in r on [0, 1/2], panels in y = 1/(1-r) on
// [2, Y_T], binomial moment expansion of r^p beyond Y_T.
constexpr double kInnerRadius = 0.5;
constexpr double kInnerPanel = 1.0 / 16.0;
constexpr double kGeometricRatio = 1.0905077326652577;  // 2^(1/8)
constexpr double kMinTailStart = kTwoPi * 64.0;
constexpr int kTailBlocks = 6;
constexpr std::size_t kTailMoments = 64;
constexpr int kMaxSubdivision = 8;
constexpr double kUnderflow = 1e-290;

std::vector<double> split_edges(std::vector<double> edges, int sub) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (sub <= 1) return edges;
    std::vector<double> out{edges.front()};
    for (std::size_t i = 1; i < edges.size(); ++i)
        for (int s = 1; s <= sub; ++s) out.push_back(edges[i - 1] + (edges[i] - edges[i - 1]) * s / sub);
    return out;
}

std::vector<double> y_edges(double y0, double y1, bool oscillatory, const std::vector<double>& breaks) {
    std::vector<double> edges{y0, y1};
    if (oscillatory) {
        for (auto k = static_cast<long long>(std::floor(y0 / kPi)) + 1; kPi * static_cast<double>(k) < y1; ++k)
            edges.push_back(kPi * static_cast<double>(k));
    } else {
        for (double y = y0 * kGeometricRatio; y < y1; y *= kGeometricRatio) edges.push_back(y);
    }
    for (double b : breaks) {
        if (b >= 1.0) continue;
        const double y = 1.0 / (1.0 - b);
        if (y > y0 && y < y1) edges.push_back(y);
    }
    return edges;
}

struct MomentResult {
    std::vector<Complex> value;
    std::vector<double> error;
};

// Quadrature of int_0^1 A(r) r^p dr for a ladder of powers p sharing one node set.
class RadialEngine {
public:
    RadialEngine(const std::vector<double>& breaks, bool oscillatory, std::size_t max_power, int sub) {
        y_tail_ = kMinTailStart;
        while (y_tail_ < static_cast<double>(max_power)) y_tail_ *= 2.0;
        const GaussRule& g16 = gauss_legendre(kPanelOrder);
        const GaussRule& g8 = gauss_legendre(kEstimateOrder);

        std::vector<double> inner{0.0, kInnerRadius};
        for (double b : breaks)
            if (b > 0.0 && b < kInnerRadius) inner.push_back(b);
        const auto pieces = static_cast<int>(std::ceil(kInnerRadius / kInnerPanel));
        for (int i = 1; i < pieces; ++i) inner.push_back(kInnerRadius * i / pieces);
        inner = split_edges(inner, sub);
        for (std::size_t i = 1; i < inner.size(); ++i) {
            const double h = 0.5 * (inner[i] - inner[i - 1]), m = 0.5 * (inner[i] + inner[i - 1]);
            for (std::size_t q = 0; q < g16.nodes.size(); ++q) hi_.push_back({m + h * g16.nodes[q], h * g16.weights[q]});
            for (std::size_t q = 0; q < g8.nodes.size(); ++q) lo_.push_back({m + h * g8.nodes[q], h * g8.weights[q]});
        }
        const auto middle = split_edges(y_edges(1.0 / (1.0 - kInnerRadius), y_tail_, oscillatory, breaks), sub);
        for (std::size_t i = 1; i < middle.size(); ++i) {
            const double h = 0.5 * (middle[i] - middle[i - 1]), m = 0.5 * (middle[i] + middle[i - 1]);
            for (std::size_t q = 0; q < g16.nodes.size(); ++q) {
                const double y = m + h * g16.nodes[q];
                hi_.push_back({1.0 - 1.0 / y, h * g16.weights[q] / (y * y)});
            }
            for (std::size_t q = 0; q < g8.nodes.size(); ++q) {
                const double y = m + h * g8.nodes[q];
                lo_.push_back({1.0 - 1.0 / y, h * g8.weights[q] / (y * y)});
            }
        }
        for (int k = 0; k < kTailBlocks; ++k) {
            const double y0 = std::ldexp(y_tail_, k), y1 = std::ldexp(y_tail_, k + 1);
            const auto edges = split_edges(y_edges(y0, y1, oscillatory, breaks), sub);
            for (std::size_t i = 1; i < edges.size(); ++i) {
                const double h = 0.5 * (edges[i] - edges[i - 1]), m = 0.5 * (edges[i] + edges[i - 1]);
                for (std::size_t q = 0; q < g16.nodes.size(); ++q) {
                    const double y = m + h * g16.nodes[q];
                    tail_.push_back({1.0 - 1.0 / y, h * g16.weights[q] / (y * y), y_tail_ / y, k});
                }
            }
        }
        radii_.reserve(hi_.size() + lo_.size() + tail_.size());
        for (const auto& n : hi_) radii_.push_back(n.r);
        for (const auto& n : lo_) radii_.push_back(n.r);
        for (const auto& n : tail_) radii_.push_back(n.r);
    }

    /// Radii at which the profile must be supplied, in order.
    const std::vector<double>& radii() const { return radii_; }

    /// Integrals for the powers p0, p0 + 2, ..., p0 + 2 (count - 1).
    MomentResult integrate(const std::vector<Complex>& profile, std::size_t p0, std::size_t count) const {
        MomentResult out;
        out.value.resize(count);
        out.error.resize(count);
        const std::size_t nh = hi_.size(), nl = lo_.size();
        std::vector<Complex> ch(nh), cl(nl);
        for (std::size_t i = 0; i < nh; ++i) ch[i] = hi_[i].w * profile[i];
        for (std::size_t i = 0; i < nl; ++i) cl[i] = lo_[i].w * profile[nh + i];

        std::vector<Complex> moments(kTailMoments);
        std::vector<double> moment_err(kTailMoments);
        tail_moments(profile, nh + nl, moments, moment_err);

        const std::size_t chunks = std::min(count, 4 * thread_count());
        parallel_for(chunks, [&](std::size_t c) {
            const std::size_t t0 = c * count / chunks, t1 = (c + 1) * count / chunks;
            if (t0 == t1) return;
            const double p_start = static_cast<double>(p0 + 2 * t0);
            std::vector<double> ph(nh), pl(nl);
            for (std::size_t i = 0; i < nh; ++i) ph[i] = std::pow(hi_[i].r, p_start);
            for (std::size_t i = 0; i < nl; ++i) pl[i] = std::pow(lo_[i].r, p_start);
            for (std::size_t t = t0; t < t1; ++t) {
                Complex s16{}, s8{};
                for (std::size_t i = 0; i < nh; ++i) {
                    s16 += ch[i] * ph[i];
                    ph[i] *= hi_[i].r * hi_[i].r;
                    if (ph[i] < kUnderflow) ph[i] = 0.0;
                }
                for (std::size_t i = 0; i < nl; ++i) {
                    s8 += cl[i] * pl[i];
                    pl[i] *= lo_[i].r * lo_[i].r;
                    if (pl[i] < kUnderflow) pl[i] = 0.0;
                }
                // Tail: r^p = sum_j C(p, j) (-1/y)^j, with moments scaled by Y_T^j.
                const double p = static_cast<double>(p0 + 2 * t);
                Complex tail{};
                double tail_err = 0.0;
                double coef = 1.0;
                for (std::size_t j = 0; j < kTailMoments; ++j) {
                    if (j > 0) coef *= -(p - static_cast<double>(j) + 1.0) / (static_cast<double>(j) * y_tail_);
                    if (coef == 0.0) break;
                    tail += coef * moments[j];
                    tail_err += std::abs(coef) * moment_err[j];
                }
                out.value[t] = s16 + tail;
                out.error[t] = std::abs(s16 - s8) + tail_err;
            }
        });
        return out;
    }

private:
    struct Node {
        double r;
        double w;
    };
    struct TailNode {
        double r;
        double w;
        double ratio;  // Y_T / y
        int block;
    };

    // Scaled moments Y_T^j int_{Y_T}^inf A y^(-2-j) dy: dyadic blocks by
    // quadrature, the remainder by extrapolating the block partial sums.
    void tail_moments(const std::vector<Complex>& profile, std::size_t offset, std::vector<Complex>& moments,
                      std::vector<double>& err) const {
        std::vector<Complex> blocks(kTailBlocks * kTailMoments);
        for (std::size_t i = 0; i < tail_.size(); ++i) {
            const auto& n = tail_[i];
            Complex v = n.w * profile[offset + i];
            Complex* row = &blocks[static_cast<std::size_t>(n.block) * kTailMoments];
            for (std::size_t j = 0; j < kTailMoments; ++j) {
                row[j] += v;
                v *= n.ratio;
            }
        }
        for (std::size_t j = 0; j < kTailMoments; ++j) {
            std::vector<Complex> partial(kTailBlocks);
            Complex running{};
            for (int k = 0; k < kTailBlocks; ++k) {
                running += blocks[static_cast<std::size_t>(k) * kTailMoments + j];
                partial[static_cast<std::size_t>(k)] = running;
            }
            // Two Aitken passes remove the two leading geometric components
            // (block ratios 2^s and 2^(s-1) for integrands ~ y^s).
            const auto once = aitken(partial);
            const auto twice = aitken(once);
            moments[j] = twice.back();
            err[j] = std::abs(twice.back() - twice[twice.size() - 2]);
        }
    }

    static std::vector<Complex> aitken(const std::vector<Complex>& x) {
        std::vector<Complex> out;
        for (std::size_t i = 2; i < x.size(); ++i) {
            const Complex d1 = x[i] - x[i - 1], d0 = x[i - 1] - x[i - 2];
            const Complex den = d1 - d0;
            if (std::abs(den) <= 1e-14 * (std::abs(d1) + std::abs(d0)) || den == Complex{})
                out.push_back(x[i]);
            else
                out.push_back(x[i] - d1 * d1 / den);
        }
        return out;
    }

    double y_tail_ = kMinTailStart;
    std::vector<Node> hi_, lo_;
    std::vector<TailNode> tail_;
    std::vector<double> radii_;
};

bool oscillates(const Symbol& a) { return a.oscillation_onset().has_value(); }

std::vector<Complex> radial_profile(const Symbol& a, const std::vector<double>& radii) {
    std::vector<Complex> out(radii.size());
    parallel_for(radii.size(), [&](std::size_t i) { out[i] = a(radii[i], 0.0); });
    return out;
}

void require_radial(const Symbol& a) {
    if (!a.is_radial()) throw DomainError("symbol " + a.description() + " is not radial");
}

// gamma ladder for n in [n0, n0 + count) with subdivision refinement.
SpectralSequence radial_ladder(const Symbol& a, std::size_t n0, std::size_t count, double tol) {
    require_radial(a);
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    SpectralSequence seq;
    seq.symbol = a.description();
    seq.n_max = n0 + count - 1;
    seq.tol = tol;
    for (int sub = 1;; sub *= 2) {
        const RadialEngine engine(a.breaks(), oscillates(a), 2 * (n0 + count) + 1, sub);
        const auto profile = radial_profile(a, engine.radii());
        const auto moments = engine.integrate(profile, 2 * n0 + 1, count);
        seq.gamma.assign(count, Complex{});
        seq.error.assign(count, 0.0);
        double worst = 0.0;
        for (std::size_t t = 0; t < count; ++t) {
            const double factor = 2.0 * static_cast<double>(n0 + t + 1);
            seq.gamma[t] = factor * moments.value[t];
            seq.error[t] = factor * moments.error[t];
            worst = std::max(worst, seq.error[t]);
        }
        seq.converged = worst <= tol;
        if (seq.converged || sub >= kMaxSubdivision) break;
    }
    return seq;
}

std::mutex fftw_planner_mutex;

// Angular Fourier coefficients (1/2pi) int a(r, phi) e^{-i k phi} dphi for
// k in [k_lo, k_hi] at every radius, by an M-point trapezoid rule.
std::vector<Complex> angular_profiles(const Symbol& a, const std::vector<double>& radii, long k_lo, long k_hi,
                                      std::size_t samples) {
    const std::size_t width = static_cast<std::size_t>(k_hi - k_lo + 1);
    std::vector<Complex> out(radii.size() * width);
    fftw_plan plan;
    {
        std::vector<Complex> in(samples), tmp(samples);
        std::lock_guard lock(fftw_planner_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(samples), reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(tmp.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    parallel_for(radii.size(), [&](std::size_t i) {
        std::vector<Complex> values(samples), spectrum(samples);
        for (std::size_t j = 0; j < samples; ++j)
            values[j] = a(radii[i], kTwoPi * static_cast<double>(j) / static_cast<double>(samples));
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(values.data()),
                         reinterpret_cast<fftw_complex*>(spectrum.data()));
        const auto m = static_cast<long>(samples);
        for (long k = k_lo; k <= k_hi; ++k)
            out[i * width + static_cast<std::size_t>(k - k_lo)] =
                spectrum[static_cast<std::size_t>(((k % m) + m) % m)] / static_cast<double>(samples);
    });
    {
        std::lock_guard lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}

std::size_t angular_samples(std::size_t bandwidth) {
    std::size_t m = 64;
    while (m < 4 * bandwidth) m *= 2;
    return m;
}

}  // namespace

Complex radial_eigenvalue(const Symbol& a, std::size_t n, double tol) {
    return radial_ladder(a, n, 1, tol).gamma.front();
}

SpectralSequence radial_sequence(const Symbol& a, std::size_t n_max, double tol) {
    return radial_ladder(a, 0, n_max + 1, tol);
}

Complex matrix_element(const Symbol& a, std::size_t m, std::size_t n, double tol) {
    if (a.is_radial()) return m == n ? radial_eigenvalue(a, n, tol) : Complex{};
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    const long k = static_cast<long>(n) - static_cast<long>(m);
    const double factor = 2.0 * std::sqrt(static_cast<double>((m + 1) * (n + 1)));
    Complex value{};
    for (int sub = 1;; sub *= 2) {
        const RadialEngine engine(a.breaks(), oscillates(a), m + n + 1, sub);
        const auto profile = angular_profiles(a, engine.radii(), k, k, angular_samples(m + n + 1));
        const auto r = engine.integrate(profile, m + n + 1, 1);
        value = factor * r.value[0];
        if (factor * r.error[0] <= tol || sub >= kMaxSubdivision) break;
    }
    return value;
}

std::vector<Complex> section_matrix(const Symbol& a, std::size_t N, double tol) {
    if (N < 1) throw DomainError("section size must be at least 1");
    std::vector<Complex> matrix(N * N);
    if (a.is_radial()) {
        const auto seq = radial_sequence(a, N - 1, tol);
        for (std::size_t n = 0; n < N; ++n) matrix[n * N + n] = seq.gamma[n];
        return matrix;
    }
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    const auto big_n = static_cast<long>(N);
    constexpr long kChunk = 64;
    for (int sub = 1;; sub *= 2) {
        const RadialEngine engine(a.breaks(), oscillates(a), 2 * N, sub);
        const auto& radii = engine.radii();
        const std::size_t samples = angular_samples(2 * N);
        double worst = 0.0;
        for (long k_lo = 1 - big_n; k_lo < big_n; k_lo += kChunk) {
            const long k_hi = std::min(big_n - 1, k_lo + kChunk - 1);
            const auto profiles = angular_profiles(a, radii, k_lo, k_hi, samples);
            const auto width = static_cast<std::size_t>(k_hi - k_lo + 1);
            std::vector<Complex> profile(radii.size());
            for (long k = k_lo; k <= k_hi; ++k) {
                for (std::size_t i = 0; i < radii.size(); ++i)
                    profile[i] = profiles[i * width + static_cast<std::size_t>(k - k_lo)];
                // Entries (m, n = m + k): power m + n + 1 = 2m + k + 1.
                const long m_lo = std::max(0L, -k), m_hi = std::min(big_n - 1, big_n - 1 - k);
                const auto r = engine.integrate(profile, static_cast<std::size_t>(2 * m_lo + k + 1),
                                                static_cast<std::size_t>(m_hi - m_lo + 1));
                for (long m = m_lo; m <= m_hi; ++m) {
                    const long n = m + k;
                    const double factor = 2.0 * std::sqrt(static_cast<double>((m + 1) * (n + 1)));
                    const auto t = static_cast<std::size_t>(m - m_lo);
                    matrix[static_cast<std::size_t>(n) * N + static_cast<std::size_t>(m)] = factor * r.value[t];
                    worst = std::max(worst, factor * r.error[t]);
                }
            }
        }
        if (worst <= tol || sub >= kMaxSubdivision) break;
    }
    return matrix;
}

namespace {

SectionNorm power_iteration(const std::function<void(const std::vector<Complex>&, std::vector<Complex>&)>& normal,
                            std::size_t N, std::size_t max_iterations) {
    SectionNorm result;
    std::vector<Complex> x(N, Complex(1.0 / std::sqrt(static_cast<double>(N)))), z(N);
    double previous = -1.0;
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        normal(x, z);
        double len = 0.0;
        for (const auto& v : z) len += std::norm(v);
        len = std::sqrt(len);
        result.iterations = it;
        if (len == 0.0) {
            result.norm = 0.0;
            result.converged = true;
            return result;
        }
        const double sigma = std::sqrt(len);
        for (std::size_t i = 0; i < N; ++i) x[i] = z[i] / len;
        result.norm = sigma;
        if (previous >= 0.0 && std::abs(sigma - previous) <= kPowerIterationStagnation * sigma) {
            result.converged = true;
            break;
        }
        previous = sigma;
    }
    normal(x, z);
    const double lambda = result.norm * result.norm;
    double res = 0.0;
    for (std::size_t i = 0; i < N; ++i) res += std::norm(z[i] - lambda * x[i]);
    result.residual = lambda > 0.0 ? std::sqrt(res) / lambda : 0.0;
    return result;
}

}  // namespace

SectionNorm power_iteration_norm(const std::vector<Complex>& matrix, std::size_t N, std::size_t max_iterations) {
    if (N < 1 || matrix.size() != N * N) throw DomainError("matrix size mismatch");
    std::vector<Complex> y(N);
    return power_iteration(
        [&](const std::vector<Complex>& x, std::vector<Complex>& z) {
            for (std::size_t n = 0; n < N; ++n) {
                Complex s{};
                for (std::size_t m = 0; m < N; ++m) s += matrix[n * N + m] * x[m];
                y[n] = s;
            }
            std::fill(z.begin(), z.end(), Complex{});
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t m = 0; m < N; ++m) z[m] += std::conj(matrix[n * N + m]) * y[n];
        },
        N, max_iterations);
}

SectionNorm finite_section_norm(const Symbol& a, std::size_t N, double tol, std::size_t max_iterations) {
    if (N < 1) throw DomainError("section size must be at least 1");
    if (a.is_radial()) {
        const auto seq = radial_sequence(a, N - 1, tol);
        std::vector<double> d2(N);
        for (std::size_t n = 0; n < N; ++n) d2[n] = std::norm(seq.gamma[n]);
        return power_iteration(
            [&](const std::vector<Complex>& x, std::vector<Complex>& z) {
                for (std::size_t n = 0; n < N; ++n) z[n] = d2[n] * x[n];
            },
            N, max_iterations);
    }
    return power_iteration_norm(section_matrix(a, N, tol), N, max_iterations);
}

GrowthFit growth_fit(const SpectralSequence& seq, std::size_t n_lo, std::size_t n_hi) {
    if (n_lo < 1 || n_lo > n_hi || n_hi >= seq.gamma.size())
        throw DomainError("fit window must satisfy 1 <= n_lo <= n_hi <= n_max");
    GrowthFit out;
    out.n_lo = n_lo;
    out.n_hi = n_hi;
    std::vector<std::pair<double, double>> points;
    for (std::size_t n = n_lo; n <= n_hi; ++n) {
        const double v = std::abs(seq.gamma[n]);
        if (v > 0.0)
            points.emplace_back(static_cast<double>(n), v);
        else
            ++out.points_excluded;
    }
    out.points_used = points.size();
    if (points.size() < 3) throw DomainError("fit window has fewer than 3 nonzero values");
    out.fit = scaling_fit(points);
    return out;
}

void write_spectrum_csv(std::ostream& out, const SpectralSequence& seq) {
    write_csv_row(out, {"n", "gamma_re", "gamma_im", "err"});
    for (std::size_t i = 0; i < seq.gamma.size(); ++i) {
        write_csv_row(out, {std::to_string(seq.n_max + 1 - seq.gamma.size() + i), format_real(seq.gamma[i].real()),
                            format_real(seq.gamma[i].imag()), format_real(seq.error[i])});
    }
}

}  // namespace bergman
