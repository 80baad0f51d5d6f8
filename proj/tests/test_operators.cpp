#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bergman/errors.hpp"
#include "bergman/operators.hpp"
#include "bergman/quadrature.hpp"

using namespace bergman;

namespace {
double max_diff(const FieldSample& s, const std::function<Complex(Complex)>& oracle) {
    double worst = 0;
    for (std::size_t i = 0; i < s.grid.size(); ++i) worst = std::max(worst, std::abs(s.values[i] - oracle(s.grid[i])));
    return worst;
}
const auto kSmallGrid = tensor_grid({0.0, 0.4, 0.85}, 3);
}  // namespace

TEST(Operators, TestFunctionHorner) {
    const auto p = TestFunction::polynomial({1.0, {0, 2}, 3.0});
    const Complex z(0.3, -0.2);
    EXPECT_LT(std::abs(p(z) - (1.0 + Complex(0, 2) * z + 3.0 * z * z)), 1e-15);
    EXPECT_LT(std::abs(p.derivative(z) - (Complex(0, 2) + 6.0 * z)), 1e-15);
    EXPECT_LT(std::abs(p.second_derivative(z) - 6.0), 1e-15);
    EXPECT_EQ(p.degree(), 2u);
    const auto m = TestFunction::monomial(5);
    EXPECT_LT(std::abs(m(z) - std::pow(z, 5)), 1e-15);
    const auto c = TestFunction::callable([](Complex w) { return std::exp(w); }, "exp");
    EXPECT_FALSE(c.has_derivatives());
    EXPECT_FALSE(c.degree().has_value());
}

TEST(Operators, Kernels) {
    const Complex l(0.3, 0.4);
    EXPECT_EQ(kernel_eval(KernelKind::bergman, l, 0.0), Complex(1.0));
    EXPECT_LT(std::abs(kernel_eval(KernelKind::mobius, l, 0.0) - l), 1e-15);
    EXPECT_LT(std::abs(kernel_eval(KernelKind::mobius, l, l)), 1e-15);
    EXPECT_THROW(kernel_eval(KernelKind::bergman, 1.0, 0.0), DomainError);
    EXPECT_LT(std::abs(operator_kernel(OperatorKind::toeplitz, {0.2, 0.1}, {0.5, -0.3}) -
                       std::pow(1.0 - Complex(0.2, 0.1) * Complex(0.5, 0.3), -2)),
              1e-15);
    EXPECT_LT(std::abs(operator_kernel(OperatorKind::hankel, {0.2, 0.1}, {0.5, -0.3}) -
                       std::pow(1.0 - Complex(0.2, -0.1) * Complex(0.5, -0.3), -2)),
              1e-15);
}

TEST(Operators, NormalizedKernelHasUnitNorm) {
    const Complex l = 0.7;
    const auto r = integrate_disc(
        [&](double rho, double phi) { return Complex(std::norm(kernel_eval(KernelKind::normalized, l, std::polar(rho, phi)))); },
        1e-10);
    EXPECT_NEAR(r.value.real(), 1.0, 1e-8);
}

TEST(Operators, DefaultGrid) {
    const auto g = default_grid();
    EXPECT_EQ(g.size(), 33u);
    EXPECT_EQ(g.front(), Complex(0.0));
}

TEST(Operators, TruncatedProjectionOfMonomials) {
    const double rho = 0.875;
    for (std::size_t k = 0; k <= 3; ++k) {
        const auto s = toeplitz_truncated(make_constant(1.0), rho, TestFunction::monomial(k), kSmallGrid, 1e-11);
        // only the j = k term of the kernel series survives: z^k rho^{2k+2}
        EXPECT_LT(max_diff(s, [&](Complex z) { return std::pow(z, k) * std::pow(rho, 2.0 * k + 2); }), 1e-9) << k;
        EXPECT_TRUE(s.all_converged());
    }
    const auto t = toeplitz_truncated(truncate(make_constant(1.0), 0.5), 0.8, TestFunction::monomial(0), kSmallGrid,
                                      1e-11);
    EXPECT_LT(max_diff(t, [](Complex) { return Complex(0.25); }), 1e-10);
}

TEST(Operators, HankelOrthogonality) {
    const double rho = 0.75;
    const auto one = hankel_truncated(make_constant(1.0), rho, TestFunction::monomial(0), kSmallGrid, 1e-11);
    EXPECT_LT(max_diff(one, [&](Complex) { return Complex(rho * rho); }), 1e-10);
    const auto z3 = hankel_truncated(make_constant(1.0), rho, TestFunction::monomial(3), kSmallGrid, 1e-11);
    EXPECT_LT(max_diff(z3, [](Complex) { return Complex{}; }), 1e-10);
}

TEST(Operators, AbConstantField) {
    const auto a = make_ab(0.25);
    const double rho = 0.95;
    const auto s = toeplitz_truncated(a, rho, TestFunction::monomial(0), kSmallGrid, 1e-10);
    const double breaks[] = {0.5};
    const auto mean = integrate_radial([&](double r) { return 2.0 * r * a(r, 0.0); }, 0.0, rho, 1e-12, breaks,
                                       a.oscillation_onset());
    EXPECT_LT(max_diff(s, [&](Complex) { return mean.value; }), 1e-9);
}

TEST(Operators, BoxPieces) {
    const auto one = make_constant(1.0);
    const std::vector<Complex> origin{0.0};
    double total = 0;
    for (int m = 1; m <= 3; ++m)
        for (std::int64_t mu = 1; mu <= (1 << m); ++mu) {
            const auto s = box_partial_apply(OperatorKind::toeplitz, {m, mu}, one, TestFunction::monomial(0), origin,
                                             1e-13);
            EXPECT_NEAR(s.values[0].real(), box_from_index(m, mu).area(), 1e-13);
            total += s.values[0].real();
        }
    EXPECT_NEAR(total, 0.765625, 1e-12);
    const auto zero = box_partial_apply(OperatorKind::toeplitz, {3, 2}, truncate(make_ab(0.25), 0.7),
                                        TestFunction::monomial(1), kSmallGrid, 1e-12);
    EXPECT_LT(max_diff(zero, [](Complex) { return Complex{}; }), 1e-15);
}

TEST(Operators, SeriesApply) {
    const auto s = series_apply(OperatorKind::toeplitz, make_constant(1.0), TestFunction::monomial(0), 3, kSmallGrid, 1e-11);
    EXPECT_LT(max_diff(s, [](Complex) { return Complex(0.765625); }), 1e-10);
    const auto e = series_apply(OperatorKind::toeplitz, make_ab(0.25), TestFunction::monomial(0), 0, kSmallGrid, 1e-11);
    EXPECT_LT(max_diff(e, [](Complex) { return Complex{}; }), 0.0 + 1e-300);
}

TEST(Operators, LimitReproducesPolynomials) {
    const auto r = limit_apply(OperatorKind::toeplitz, make_constant(1.0), TestFunction::monomial(2), kSmallGrid,
                               dyadic_schedule(kDefaultLimitGenerations), 1e-9, 1e-5);
    ASSERT_TRUE(r.converged);
    EXPECT_LT(max_diff(r.sample, [](Complex z) { return z * z; }), 1e-4);
    // differences shrink geometrically once past the transient
    for (std::size_t i = 5; i < r.log.size(); ++i) EXPECT_LT(r.log[i].grid_l2_diff, r.log[i - 1].grid_l2_diff);

    const auto h = limit_apply(OperatorKind::hankel, make_constant(1.0), TestFunction::monomial(1), kSmallGrid,
                               dyadic_schedule(kDefaultLimitGenerations), 1e-9, 1e-5);
    EXPECT_LT(max_diff(h.sample, [](Complex) { return Complex{}; }), 1e-8);
}

TEST(Operators, LimitReportsNonConvergence) {
    const auto r = limit_apply(OperatorKind::toeplitz, make_pow(0.25), TestFunction::monomial(20), kSmallGrid,
                               dyadic_schedule(6), 1e-8, 1e-7);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.log.size(), 6u);
}

TEST(Operators, Transpose) {
    const auto f = TestFunction::polynomial({1.0, 1.0});
    const auto a = make_ab(0.25);
    const auto t = transpose_apply(OperatorKind::toeplitz, a, 0.9, f, kSmallGrid, 1e-10);
    const auto s = toeplitz_truncated(a, 0.9, f, kSmallGrid, 1e-10);
    for (std::size_t i = 0; i < s.values.size(); ++i) EXPECT_LT(std::abs(t.values[i] - s.values[i]), 1e-15);
    const auto ic = make_constant({0, 1});
    const auto ti = transpose_apply(OperatorKind::toeplitz, ic, 0.9, f, kSmallGrid, 1e-10);
    const auto si = toeplitz_truncated(ic, 0.9, f, kSmallGrid, 1e-10);
    for (std::size_t i = 0; i < s.values.size(); ++i) EXPECT_LT(std::abs(ti.values[i] + si.values[i]), 1e-10);
}

TEST(Operators, Linearity) {
    const auto a = make_ab(0.25);
    const auto f = TestFunction::polynomial({1.0, 0.0, 2.0});
    const auto g = TestFunction::polynomial({0.0, {0, 1}});
    const auto fg = TestFunction::polynomial({1.0, {0, 1}, 2.0});
    const auto sf = toeplitz_truncated(a, 0.9, f, kSmallGrid, 1e-11);
    const auto sg = toeplitz_truncated(a, 0.9, g, kSmallGrid, 1e-11);
    const auto sfg = toeplitz_truncated(a, 0.9, fg, kSmallGrid, 1e-11);
    for (std::size_t i = 0; i < sf.values.size(); ++i)
        EXPECT_LT(std::abs(sfg.values[i] - sf.values[i] - sg.values[i]), 1e-10);
}

TEST(Operators, Duality) {
    const auto rep = duality_defect(make_ab(0.25), 0.875, TestFunction::polynomial({1.0, 1.0}),
                                    TestFunction::monomial(1), 1e-10);
    EXPECT_LT(rep.defect, 1e-8);
    EXPECT_LT(std::abs(rep.lhs - rep.direct), 1e-8);
}

TEST(Operators, Majorant) {
    const auto box = box_from_index(3, 2);
    EXPECT_NEAR(majorant_GD(TestFunction::monomial(0), box, 0.0, 1e-13), box.area(), 1e-13);
    // f = z at 0: (w/pi) int (rho + (1 - rho^2)) rho drho
    auto prim = [](double r) { return r * r * r / 3 + r * r / 2 - r * r * r * r / 4; };
    const double exact = (prim(box.r_out()) - prim(box.r_in())) * box.width() / kPi;
    EXPECT_NEAR(majorant_GD(TestFunction::monomial(1), box, 0.0, 1e-13), exact, 1e-12);
    const auto c = TestFunction::callable([](Complex w) { return w; }, "id");
    EXPECT_THROW(majorant_GD(c, box, 0.0, 1e-10), DomainError);
}

TEST(Operators, SubharmonicBound) {
    const BoxIndex n{6, 17};
    const auto box = DyadicBox::from_index(n);
    const auto one = subharmonic_bound_check(TestFunction::monomial(0), n, box.center(), 1e-10);
    EXPECT_NEAR(one.lhs, 1.0, 1e-15);
    EXPECT_GE(one.rhs, 1.0);
    EXPECT_TRUE(one.pass);
    BoxIntegralCache cache;
    for (std::size_t k : {1u, 10u, 50u})
        EXPECT_TRUE(subharmonic_bound_check(TestFunction::monomial(k), n, box.center(), 1e-10, &cache).pass) << k;
    const Complex w = box.center().z();
    const auto vanishing = subharmonic_bound_check(TestFunction::polynomial({-w, 1.0}), n, box.center(), 1e-10);
    EXPECT_EQ(vanishing.lhs, 0.0);
    EXPECT_TRUE(vanishing.pass);
}

TEST(Operators, FieldCsv) {
    const auto s = toeplitz_truncated(make_constant(1.0), 0.5, TestFunction::monomial(0), kSmallGrid, 1e-10);
    std::ostringstream out;
    write_field_csv(out, s);
    const auto text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "z_re,z_im,value_re,value_im,err");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(kSmallGrid.size() + 1));
}
