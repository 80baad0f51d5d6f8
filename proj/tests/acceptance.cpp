// Acceptance suite: one PASS/FAIL line per criterion.
//   bergman_acceptance                 all criteria
//   bergman_acceptance --criterion N   just N
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bergman/averaging.hpp"
#include "bergman/geometry.hpp"
#include "bergman/operators.hpp"
#include "bergman/spectral.hpp"
#include "bergman/symbols.hpp"

using namespace bergman;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

double ladder_delta(int m) { return std::ldexp(1.0, -m); }
DyadicBox ladder_box(int m, double theta = 0.0) { return DyadicBox::from_corner(1 - 2 * ladder_delta(m), theta); }
constexpr int kLadderFirst = 4, kLadderLast = 14;

// 1. partition exactness
constexpr double kPartitionTol = 1e-12;
Verdict partition() {
    Timer t;
    const auto dec = enumerate_decomposition(14);
    CompensatedSum<double> total;
    for (const auto& b : dec.boxes()) total.add(b.area());
    const double err = std::abs(total.value() - std::pow(1 - std::ldexp(1.0, -14), 2));
    const double s = t.seconds();
    return {err <= kPartitionTol && s < 1.0, fmt("|sum - (1-2^-14)^2| = %.3g (<= %.0e), %.3f s (< 1 s)", err, kPartitionTol, s)};
}

// 2. projection identity: T_{1_rho} z^k = rho^{2k+2} z^k
constexpr double kProjectionTol = 1e-7, kConstantTol = 1e-8;
Verdict projection() {
    const auto one = make_constant(1.0);
    const auto grid = default_grid();
    double worst = 0, worst_const = 0;
    for (int m = 1; m <= 10; ++m) {
        const double rho = 1 - std::ldexp(1.0, -m);
        for (std::size_t k = 0; k <= 3; ++k) {
            const auto s = toeplitz_truncated(one, rho, TestFunction::monomial(k), grid, 1e-10);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double e = std::abs(s.values[i] - std::pow(grid[i], k) * std::pow(rho, 2.0 * k + 2));
                worst = std::max(worst, e);
                if (k == 0) worst_const = std::max(worst_const, e);
            }
        }
    }
    return {worst <= kProjectionTol && worst_const <= kConstantTol,
            fmt("max error %.3g (<= %.0e), p = 1 error %.3g (<= %.0e)", worst, kProjectionTol, worst_const, kConstantTol)};
}

// 3. series over boxes of generation <= 5 equals the truncated operator at rho = 1 - 2^-5
constexpr double kSeriesTol = 1e-5;
Verdict series_identity() {
    Timer t;
    const auto grid = tensor_grid({0.1, 0.3, 0.5, 0.7, 0.9}, 5);
    const auto a = make_ab(0.25);
    const auto f = TestFunction::polynomial({1.0, 1.0});
    const auto s = series_apply(OperatorKind::toeplitz, a, f, 5, grid, 1e-7);
    const auto r = toeplitz_truncated(a, 1 - std::ldexp(1.0, -5), f, grid, 1e-9);
    double worst = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(s.values[i] - r.values[i]));
    const double sec = t.seconds();
    return {worst <= kSeriesTol && sec < 120, fmt("%zu points, max diff %.3g (<= %.0e), %.1f s (< 120 s)", grid.size(),
                                                   worst, kSeriesTol, sec)};
}

// 4. Carleson mean slope of |a_b| against delta equals -b
constexpr double kSlopeWindow = 0.05;
Verdict carleson_slope() {
    Timer t;
    bool ok = true;
    std::string detail;
    for (double b : {0.25, 0.5}) {
        const auto m = modulus(make_ab(b));
        std::vector<std::pair<double, double>> pts;
        for (int k = kLadderFirst; k <= kLadderLast; ++k) {
            double sup = 0;
            for (int j = 0; j < 4; ++j) sup = std::max(sup, carleson_mean(m, ladder_box(k, j * kPi / 2), 1e-8));
            pts.emplace_back(ladder_delta(k), sup);
        }
        const double slope = scaling_fit(pts).slope;
        ok = ok && std::abs(slope + b) <= kSlopeWindow;
        detail += fmt("b = %g: slope %.4f (target %g +- %g); ", b, slope, -b, kSlopeWindow);
    }
    const double sec = t.seconds();
    return {ok && sec < 300, detail + fmt("%.1f s (< 300 s)", sec)};
}

// 5. |D| sup |a_hat| decays at least like delta^{3-b-0.15}; sup |a_hat| does not grow
constexpr double kAreaSlack = 0.15, kSupSlopeFloor = -0.05;
Verdict averaging_scaling() {
    Timer t;
    bool ok = true;
    std::string detail;
    for (double b : {0.25, 0.5}) {
        const auto a = make_ab(b);
        std::vector<std::pair<double, double>> area_sup, sup;
        double sup_max = 0;
        for (int k = kLadderFirst; k <= kLadderLast; ++k) {
            const auto box = ladder_box(k);
            const auto g = avg_hat_grid(a, box, 16, 16, 1e-10);
            double s = 0;
            for (const auto& v : g.values) s = std::max(s, std::abs(v));
            sup_max = std::max(sup_max, s);
            area_sup.emplace_back(ladder_delta(k), box.area() * s);
            sup.emplace_back(ladder_delta(k), s);
        }
        const double slope = scaling_fit(area_sup).slope, sup_slope = scaling_fit(sup).slope;
        ok = ok && slope >= 3 - b - kAreaSlack && sup_slope >= kSupSlopeFloor;
        detail += fmt("b = %g: |D|sup slope %.4f (>= %.2f), sup slope %.3f (>= %.2f), max sup %.3f; ", b, slope,
                      3 - b - kAreaSlack, sup_slope, kSupSlopeFloor, sup_max);
    }
    const double sec = t.seconds();
    return {ok && sec < 300, detail + fmt("%.1f s (< 300 s)", sec)};
}

// 6. eigenvalue growth: |a_{1/4}| like n^{1/4}, a_{1/4} flat
constexpr double kSpectralTol = 1e-6, kMedianRatio = 5.0;
Verdict spectral_dichotomy() {
    Timer t;
    const auto a = make_ab(0.25);
    const auto abs_seq = radial_sequence(modulus(a), 10'000, kSpectralTol);
    const auto seq = radial_sequence(a, 10'000, kSpectralTol);
    const double abs_slope = growth_fit(abs_seq, 100, 10'000).fit.slope;
    const double slope = growth_fit(seq, 100, 10'000).fit.slope;
    std::vector<double> mags;
    for (std::size_t n = 100; n <= 10'000; ++n) mags.push_back(std::abs(seq.gamma[n]));
    const double max = *std::max_element(mags.begin(), mags.end());
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    const double median = mags[mags.size() / 2];
    const double sec = t.seconds();
    const bool a_ok = std::abs(abs_slope - 0.25) <= kSlopeWindow;
    const bool b_ok = std::abs(slope) <= kSlopeWindow && max <= kMedianRatio * median;
    return {a_ok && b_ok && sec < 180 && abs_seq.converged && seq.converged,
            fmt("(a) |a| slope %.4f (0.25 +- %g) %s; (b) a slope %.4f (|.| <= %g), max/median %.3g (<= %g) %s; "
                "%.1f s (< 180 s)",
                abs_slope, kSlopeWindow, a_ok ? "ok" : "FAIL", slope, kSlopeWindow, max / median, kMedianRatio,
                b_ok ? "ok" : "FAIL", sec)};
}

// 7. limit of truncated operators on z^n against the eigenvalue oracle
constexpr double kOracleTol = 1e-4;
Verdict oracle_agreement() {
    Timer t;
    const auto grid = default_grid();
    const auto schedule = dyadic_schedule(kDefaultLimitGenerations);
    double worst = 0;
    bool all_converged = true;
    std::string detail;
    for (const char* text : {"const:1", "pow:0.25", "ab:0.25"}) {
        const auto a = parse_symbol(text);
        const auto gamma = radial_sequence(a, 16, 1e-12).gamma;
        double sym_worst = 0;
        for (std::size_t n = 0; n <= 16; ++n) {
            const auto r = limit_apply(OperatorKind::toeplitz, a, TestFunction::monomial(n), grid, schedule, 1e-9, 1e-5);
            all_converged = all_converged && r.converged;
            double ss = 0;
            for (std::size_t i = 0; i < grid.size(); ++i) ss += std::norm(r.sample.values[i] - gamma[n] * std::pow(grid[i], n));
            sym_worst = std::max(sym_worst, std::sqrt(ss / static_cast<double>(grid.size())));
        }
        worst = std::max(worst, sym_worst);
        detail += fmt("%s %.3g; ", text, sym_worst);
    }
    return {worst <= kOracleTol && all_converged,
            detail + fmt("worst grid-L2 %.3g (<= %.0e), converged %s, %.1f s", worst, kOracleTol,
                         all_converged ? "yes" : "no", t.seconds())};
}

// 8. duality of the truncated operator and its conjugate-symbol transpose
constexpr double kDualityTol = 1e-6;
Verdict duality() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> deg(0, 4);
    const auto a = make_ab(0.25);
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        auto poly = [&] {
            std::vector<Complex> c(deg(rng) + 1);
            for (auto& x : c) x = {u(rng), u(rng)};
            return TestFunction::polynomial(c);
        };
        const auto f = poly(), g = poly();
        worst = std::max(worst, duality_defect(a, 0.875, f, g, 1e-9).defect);
    }
    return {worst <= kDualityTol, fmt("10 pairs, max defect %.3g (<= %.0e)", worst, kDualityTol)};
}

// 9. subharmonic mean value bound over boxes, monomials and sample points
Verdict subharmonic() {
    Timer t;
    BoxIntegralCache cache;
    std::size_t checks = 0, failures = 0;
    double min_ratio = INFINITY;
    for (int m = 1; m <= 8; ++m)
        for (std::int64_t mu = 1; mu <= (std::int64_t{1} << m); ++mu) {
            const BoxIndex n{m, mu};
            const auto box = DyadicBox::from_index(n);
            std::vector<PolarPoint> ws{box.center()};
            const double dr = 0.01 * (box.r_out() - box.r_in()), dt = 0.01 * box.width();
            for (double r : {box.r_in() + dr, box.r_out() - dr})
                for (double th : {box.theta_in() + dt, box.theta_out() - dt}) ws.push_back({r, th});
            for (std::size_t k = 0; k <= 50; ++k)
                for (const auto& w : ws) {
                    const auto c = subharmonic_bound_check(TestFunction::monomial(k), n, w, 1e-8, &cache);
                    ++checks;
                    failures += !c.pass;
                    if (c.lhs > 0) min_ratio = std::min(min_ratio, c.rhs / c.lhs);
                }
        }
    return {failures == 0,
            fmt("%zu checks, %zu failures, min rhs/lhs %.4f, %.1f s", checks, failures, min_ratio, t.seconds())};
}

// 10. |F_n f(z)| <= c sum_{D in D_n} G_D(z) with one constant c
constexpr double kMajorantConstant = 1.0;
Verdict majorant() {
    Timer t;
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> gen(1, 8);
    std::uniform_real_distribution<double> u(0, 1);
    const auto a = make_ab(0.25);
    const auto f = TestFunction::polynomial({1.0, 1.0, 1.0});
    const auto dec = enumerate_decomposition(9);
    double c = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int m = gen(rng);
        const auto mu = 1 + static_cast<std::int64_t>(u(rng) * static_cast<double>(std::int64_t{1} << m));
        const Complex z = std::polar(0.95 * std::sqrt(u(rng)), kTwoPi * u(rng));
        const BoxIndex n{m, std::min<std::int64_t>(mu, std::int64_t{1} << m)};
        const auto F = box_partial_apply(OperatorKind::toeplitz, n, a, f, {z}, 1e-12).values[0];
        double G = 0;
        for (const auto& box : neighbors(n, dec).union_region) G += majorant_GD(f, box, z, 1e-10);
        c = std::max(c, std::abs(F) / G);
    }
    return {c <= kMajorantConstant,
            fmt("200 samples, c = %.4f (<= %g), %.2f s", c, kMajorantConstant, t.seconds())};
}

const std::vector<std::pair<const char*, std::function<Verdict()>>>& criteria() {
    static const std::vector<std::pair<const char*, std::function<Verdict()>>> list = {
        {"partition exactness", partition},
        {"projection identity", projection},
        {"box series equals truncated operator", series_identity},
        {"Carleson mean slope of |a_b|", carleson_slope},
        {"averaging functional scaling", averaging_scaling},
        {"spectral dichotomy", spectral_dichotomy},
        {"limit vs eigenvalue oracle", oracle_agreement},
        {"duality", duality},
        {"subharmonic bound", subharmonic},
        {"majorant bound", majorant},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            const long n = std::strtol(argv[++i], nullptr, 10);
            if (n < 1 || n > static_cast<long>(criteria().size())) {
                std::fprintf(stderr, "no criterion %s\n", argv[i]);
                return 2;
            }
            selected.push_back(static_cast<std::size_t>(n));
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
            return 2;
        }
    }
    if (selected.empty())
        for (std::size_t n = 1; n <= criteria().size(); ++n) selected.push_back(n);

    int failed = 0;
    for (std::size_t n : selected) {
        const auto& [name, fn] = criteria()[n - 1];
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %zu (%s): %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
