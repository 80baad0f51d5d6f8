#include "bergman/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "bergman/errors.hpp"
#include "bergman/gauss_legendre.hpp"
#include "bergman/parallel.hpp"

namespace bergman {

namespace {

constexpr double kMinPanel = 1e-15;
// Panels whose 16-vs-8 difference is within this multiple of machine epsilon
// times their L1 magnitude are not split further: the difference is roundoff.
constexpr double kNoiseFactor = 64.0 * std::numeric_limits<double>::epsilon();
// A split that leaves at least this fraction of the parent's error is
// treated as noise-limited (typically rounding in the integrand itself).
constexpr double kStagnation = 0.9;

std::vector<double> dyadic_radii_between(double a, double b) {
    std::vector<double> out;
    for (int k = 1; k <= 60; ++k) {
        const double r = 1.0 - std::ldexp(1.0, -k);
        if (r > a && r < b) out.push_back(r);
    }
    return out;
}

std::vector<double> panel_edges(double a, double b, std::span<const double> breaks, double max_len) {
    std::vector<double> edges{a, b};
    for (double x : breaks)
        if (x > a && x < b) edges.push_back(x);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (max_len <= 0.0) return edges;
    std::vector<double> out{edges.front()};
    for (std::size_t i = 1; i < edges.size(); ++i) {
        const double lo = edges[i - 1], hi = edges[i];
        const auto pieces = static_cast<std::size_t>(std::ceil((hi - lo) / max_len - 1e-12));
        for (std::size_t k = 1; k < pieces; ++k) out.push_back(lo + (hi - lo) * static_cast<double>(k) / pieces);
        out.push_back(hi);
    }
    return out;
}

// ---------------------------------------------------------------------------
// 2D adaptive panels

struct BoxPanel {
    double r0, r1, t0, t1;
    Complex q;
    double err_r = 0.0, err_t = 0.0;
    std::size_t id = 0;
    double magnitude = 0.0;

    double err() const { return err_r + err_t; }
};

void evaluate_panel(const PolarIntegrand& f, BoxPanel& p) {
    const GaussRule& g16 = gauss_legendre(kPanelOrder);
    const GaussRule& g8 = gauss_legendre(kEstimateOrder);
    const double hr = 0.5 * (p.r1 - p.r0), mr = 0.5 * (p.r1 + p.r0);
    const double ht = 0.5 * (p.t1 - p.t0), mt = 0.5 * (p.t1 + p.t0);
    double l1 = 0.0;
    auto tensor = [&](const GaussRule& rr, const GaussRule& rt) {
        Complex s{};
        for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
            const double r = mr + hr * rr.nodes[i];
            Complex row{};
            for (std::size_t j = 0; j < rt.nodes.size(); ++j) {
                const Complex v = f(r, mt + ht * rt.nodes[j]);
                row += rt.weights[j] * v;
                l1 += rr.weights[i] * r * rt.weights[j] * std::abs(v);
            }
            s += rr.weights[i] * r * row;
        }
        return s * (hr * ht / kPi);
    };
    p.q = tensor(g16, g16);
    p.magnitude = l1 * hr * ht / kPi;
    p.err_r = std::abs(p.q - tensor(g8, g16));
    p.err_t = std::abs(p.q - tensor(g16, g8));
}

constexpr std::size_t kNodesPerBoxPanel = 16 * 16 + 8 * 16 + 16 * 8;

struct WorstFirst {
    bool operator()(const BoxPanel& a, const BoxPanel& b) const {
        if (a.err() != b.err()) return a.err() < b.err();
        return a.id > b.id;
    }
};

}  // namespace

QuadratureResult integrate_box(const PolarIntegrand& f, const PolarRect& rect, double tol, const BoxOptions& options) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    if (!(rect.r0 >= 0.0 && rect.r0 <= rect.r1 && rect.t0 <= rect.t1))
        throw DomainError("malformed polar rectangle");
    if (!(rect.r1 < 1.0))
        throw DomainError("box touches the unit circle; use the oscillatory radial path");
    QuadratureResult result;
    if (rect.r1 == rect.r0 || rect.t1 == rect.t0) return result;

    std::vector<double> breaks = options.radial_breaks;
    const auto dyadic = dyadic_radii_between(rect.r0, rect.r1);
    breaks.insert(breaks.end(), dyadic.begin(), dyadic.end());
    const auto r_edges = panel_edges(rect.r0, rect.r1, breaks, 0.0);
    const auto t_edges = panel_edges(rect.t0, rect.t1, {}, options.max_angular_panel);

    std::priority_queue<BoxPanel, std::vector<BoxPanel>, WorstFirst> heap;
    std::vector<BoxPanel> settled;
    std::size_t next_id = 0;
    double total_err = 0.0;
    for (std::size_t i = 1; i < r_edges.size(); ++i) {
        for (std::size_t j = 1; j < t_edges.size(); ++j) {
            BoxPanel p{r_edges[i - 1], r_edges[i], t_edges[j - 1], t_edges[j], {}, 0, 0, next_id++};
            evaluate_panel(f, p);
            result.nodes_used += kNodesPerBoxPanel;
            total_err += p.err();
            heap.push(p);
        }
    }
    while (total_err > tol && !heap.empty()) {
        if (result.nodes_used + 2 * kNodesPerBoxPanel > options.node_budget) break;
        BoxPanel worst = heap.top();
        heap.pop();
        const bool split_r = worst.err_r >= worst.err_t;
        const double len = split_r ? worst.r1 - worst.r0 : worst.t1 - worst.t0;
        if (len < kMinPanel || worst.err() <= kNoiseFactor * worst.magnitude) {
            settled.push_back(worst);
            continue;
        }
        total_err -= worst.err();
        BoxPanel a = worst, b = worst;
        if (split_r) {
            a.r1 = b.r0 = 0.5 * (worst.r0 + worst.r1);
        } else {
            a.t1 = b.t0 = 0.5 * (worst.t0 + worst.t1);
        }
        a.id = next_id++;
        b.id = next_id++;
        evaluate_panel(f, a);
        evaluate_panel(f, b);
        result.nodes_used += 2 * kNodesPerBoxPanel;
        total_err += a.err() + b.err();
        if (a.err() + b.err() >= kStagnation * worst.err()) {
            settled.push_back(a);
            settled.push_back(b);
            continue;
        }
        heap.push(a);
        heap.push(b);
    }
    while (!heap.empty()) {
        settled.push_back(heap.top());
        heap.pop();
    }
    std::sort(settled.begin(), settled.end(), [](const BoxPanel& a, const BoxPanel& b) { return a.id < b.id; });
    CompensatedSum<Complex> value;
    CompensatedSum<double> err;
    for (const auto& p : settled) {
        value.add(p.q);
        err.add(p.err());
    }
    result.value = value.value();
    result.error_estimate = err.value();
    result.converged = result.error_estimate <= tol;
    return result;
}

QuadratureResult integrate_disc(const PolarIntegrand& f, double tol, const BoxOptions& options) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    constexpr int kMaxBands = 48;
    QuadratureResult out;
    CompensatedSum<Complex> value;
    auto add = [&](const QuadratureResult& r) {
        value.add(r.value);
        out.error_estimate += r.error_estimate;
        out.nodes_used += r.nodes_used;
        out.converged = out.converged && r.converged;
    };
    add(integrate_box(f, {0.0, 0.5, 0.0, kTwoPi}, 0.25 * tol, options));
    double previous = std::numeric_limits<double>::infinity();
    bool tail_small = false;
    for (int k = 2; k <= kMaxBands; ++k) {
        const PolarRect band{1.0 - std::ldexp(1.0, 1 - k), 1.0 - std::ldexp(1.0, -k), 0.0, kTwoPi};
        const auto r = integrate_box(f, band, std::ldexp(0.25 * tol, 1 - k), options);
        add(r);
        const double size = std::abs(r.value);
        if (k >= 4 && size <= 0.125 * tol && previous <= 0.25 * tol) {
            out.error_estimate += size;
            tail_small = true;
            break;
        }
        previous = size;
    }
    out.value = value.value();
    out.converged = out.converged && tail_small && out.error_estimate <= tol;
    return out;
}

// ---------------------------------------------------------------------------
// Batched annulus rule

namespace {

struct BatchPanelResult {
    std::vector<Complex> value;
    std::vector<double> err;
    std::size_t nodes = 0;
    bool ok = true;
};

class AnnulusWorker {
public:
    AnnulusWorker(std::size_t count, const BatchIntegrand& f, const AnnulusOptions& options)
        : count_(count), f_(f), options_(options) {}

    BatchPanelResult run(double a, double b, double tol, int depth, double parent_worst) const {
        const GaussRule& g16 = gauss_legendre(kPanelOrder);
        const GaussRule& g8 = gauss_legendre(kEstimateOrder);
        const std::size_t nr = g16.nodes.size() + g8.nodes.size();
        std::vector<double> radius(nr), w16(nr, 0.0), w8(nr, 0.0);
        const double h = 0.5 * (b - a), m = 0.5 * (a + b);
        for (std::size_t i = 0; i < g16.nodes.size(); ++i) {
            radius[i] = m + h * g16.nodes[i];
            w16[i] = h * g16.weights[i] * radius[i];
        }
        for (std::size_t i = 0; i < g8.nodes.size(); ++i) {
            const std::size_t k = g16.nodes.size() + i;
            radius[k] = m + h * g8.nodes[i];
            w8[k] = h * g8.weights[i] * radius[k];
        }
        // Angular sums per radius and integrand; the trapezoid weight 2pi/N
        // combines with the 1/pi area normalization into 2/N.
        std::vector<Complex> sums(nr * count_), buffer(count_);
        std::vector<double> l1(nr * count_, 0.0);
        BatchPanelResult out;
        auto accumulate = [&](std::size_t n_angles, std::size_t start, std::size_t stride) {
            for (std::size_t i = 0; i < nr; ++i) {
                for (std::size_t j = start; j < n_angles; j += stride) {
                    f_(radius[i], kTwoPi * static_cast<double>(j) / static_cast<double>(n_angles), buffer);
                    Complex* s = &sums[i * count_];
                    double* m = &l1[i * count_];
                    for (std::size_t k = 0; k < count_; ++k) {
                        s[k] += buffer[k];
                        m[k] += std::abs(buffer[k].real()) + std::abs(buffer[k].imag());
                    }
                }
            }
            out.nodes += nr * ((n_angles - start + stride - 1) / stride);
        };
        auto combine = [&](const std::vector<double>& w, std::size_t n_angles) {
            std::vector<Complex> q(count_);
            const double scale = 2.0 / static_cast<double>(n_angles);
            for (std::size_t i = 0; i < nr; ++i) {
                if (w[i] == 0.0) continue;
                const Complex* s = &sums[i * count_];
                for (std::size_t k = 0; k < count_; ++k) q[k] += w[i] * scale * s[k];
            }
            return q;
        };

        auto noise_floor = [&](const std::vector<double>& w, std::size_t n_angles) {
            std::vector<double> m(count_, 0.0);
            const double scale = 2.0 / static_cast<double>(n_angles);
            for (std::size_t i = 0; i < nr; ++i) {
                if (w[i] == 0.0) continue;
                for (std::size_t k = 0; k < count_; ++k) m[k] += std::abs(w[i]) * scale * l1[i * count_ + k];
            }
            for (auto& v : m) v *= kNoiseFactor;
            return m;
        };

        std::size_t n_angles = options_.initial_angular;
        accumulate(n_angles, 0, 1);
        std::vector<Complex> q16 = combine(w16, n_angles);
        std::vector<double> err_angle(count_, 0.0);
        for (;;) {
            const std::size_t doubled = 2 * n_angles;
            accumulate(doubled, 1, 2);
            auto refined = combine(w16, doubled);
            const auto noise = noise_floor(w16, doubled);
            bool settled = true;
            for (std::size_t k = 0; k < count_; ++k) {
                err_angle[k] = std::abs(refined[k] - q16[k]);
                if (err_angle[k] > 0.5 * tol && err_angle[k] > noise[k]) settled = false;
            }
            q16 = std::move(refined);
            n_angles = doubled;
            if (settled) break;
            if (n_angles >= options_.max_angular) {
                out.ok = false;
                break;
            }
        }
        const auto q8 = combine(w8, n_angles);
        const auto noise = noise_floor(w16, n_angles);
        double worst_radial = 0.0;
        bool resolvable = false;
        std::vector<double> err_radial(count_);
        for (std::size_t k = 0; k < count_; ++k) {
            err_radial[k] = std::abs(q16[k] - q8[k]);
            worst_radial = std::max(worst_radial, err_radial[k]);
            if (err_radial[k] > 0.5 * tol && err_radial[k] > noise[k]) resolvable = true;
        }
        if (resolvable && depth < options_.max_depth && (b - a) > kMinPanel &&
            worst_radial < kStagnation * parent_worst) {
            const double mid = 0.5 * (a + b);
            auto left = run(a, mid, 0.5 * tol, depth + 1, worst_radial);
            auto right = run(mid, b, 0.5 * tol, depth + 1, worst_radial);
            for (std::size_t k = 0; k < count_; ++k) {
                left.value[k] += right.value[k];
                left.err[k] += right.err[k];
            }
            left.nodes += right.nodes + out.nodes;
            left.ok = left.ok && right.ok;
            return left;
        }
        if (worst_radial > 0.5 * tol) out.ok = false;
        out.value = std::move(q16);
        out.err.resize(count_);
        for (std::size_t k = 0; k < count_; ++k) out.err[k] = err_angle[k] + err_radial[k];
        return out;
    }

private:
    std::size_t count_;
    const BatchIntegrand& f_;
    const AnnulusOptions& options_;
};

}  // namespace

std::vector<QuadratureResult> integrate_annulus_batch(std::size_t count, const BatchIntegrand& f, double r0,
                                                      double r1, double tol, const AnnulusOptions& options) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    if (!(r0 >= 0.0 && r0 <= r1)) throw DomainError("malformed annulus");
    if (!(r1 < 1.0)) throw DomainError("annulus touches the unit circle");
    if (options.initial_angular < 2) throw DomainError("initial angular count must be at least 2");
    std::vector<QuadratureResult> results(count);
    if (r1 == r0 || count == 0) return results;

    std::vector<double> breaks = options.radial_breaks;
    const auto dyadic = dyadic_radii_between(r0, r1);
    breaks.insert(breaks.end(), dyadic.begin(), dyadic.end());
    const auto edges = panel_edges(r0, r1, breaks, 0.125);
    const std::size_t panels = edges.size() - 1;

    AnnulusWorker worker(count, f, options);
    std::vector<BatchPanelResult> parts(panels);
    parallel_for(panels, [&](std::size_t i) {
        const double share = tol * (edges[i + 1] - edges[i]) / (r1 - r0);
        parts[i] = worker.run(edges[i], edges[i + 1], share, 0, std::numeric_limits<double>::infinity());
    });

    for (std::size_t k = 0; k < count; ++k) {
        CompensatedSum<Complex> value;
        CompensatedSum<double> err;
        bool ok = true;
        std::size_t nodes = 0;
        for (const auto& p : parts) {
            value.add(p.value[k]);
            err.add(p.err[k]);
            ok = ok && p.ok;
            nodes += p.nodes;
        }
        results[k] = {value.value(), err.value(), nodes, ok && err.value() <= tol};
    }
    return results;
}

// ---------------------------------------------------------------------------
// 1D rules

namespace {

struct LinePanel {
    double a, b;
    Complex q;
    double err;
    std::size_t id;
    double magnitude = 0.0;
};

void evaluate_line(const RadialIntegrand& g, LinePanel& p) {
    const GaussRule& g16 = gauss_legendre(kPanelOrder);
    const GaussRule& g8 = gauss_legendre(kEstimateOrder);
    const double h = 0.5 * (p.b - p.a), m = 0.5 * (p.a + p.b);
    Complex q16{}, q8{};
    double l1 = 0.0;
    for (std::size_t i = 0; i < g16.nodes.size(); ++i) {
        const Complex v = g(m + h * g16.nodes[i]);
        q16 += g16.weights[i] * v;
        l1 += g16.weights[i] * std::abs(v);
    }
    for (std::size_t i = 0; i < g8.nodes.size(); ++i) q8 += g8.weights[i] * g(m + h * g8.nodes[i]);
    p.q = h * q16;
    p.err = std::abs(h * (q16 - q8));
    p.magnitude = std::abs(h) * l1;
}

struct LineWorstFirst {
    bool operator()(const LinePanel& a, const LinePanel& b) const {
        if (a.err != b.err) return a.err < b.err;
        return a.id > b.id;
    }
};

constexpr std::size_t kNodesPerLinePanel = kPanelOrder + kEstimateOrder;

// Recursive bisection with tolerance shared in proportion to length.
Complex refine_line(const RadialIntegrand& g, const LinePanel& p, double tol, int depth, double& err,
                    std::size_t& nodes, bool& ok) {
    if (p.err <= tol) {
        err += p.err;
        return p.q;
    }
    if (depth >= 30 || (p.b - p.a) < kMinPanel * std::max(1.0, std::abs(p.a)) ||
        p.err <= kNoiseFactor * p.magnitude) {
        ok = false;
        err += p.err;
        return p.q;
    }
    const double mid = 0.5 * (p.a + p.b);
    LinePanel l{p.a, mid, {}, 0.0, 0}, r{mid, p.b, {}, 0.0, 0};
    evaluate_line(g, l);
    evaluate_line(g, r);
    nodes += 2 * kNodesPerLinePanel;
    if (l.err + r.err >= kStagnation * p.err) {
        err += l.err + r.err;
        if (l.err + r.err > tol) ok = false;
        return l.q + r.q;
    }
    return refine_line(g, l, 0.5 * tol, depth + 1, err, nodes, ok) +
           refine_line(g, r, 0.5 * tol, depth + 1, err, nodes, ok);
}

Complex refine_line(const RadialIntegrand& g, double a, double b, double tol, double& err, std::size_t& nodes,
                    bool& ok) {
    LinePanel p{a, b, {}, 0.0, 0};
    evaluate_line(g, p);
    nodes += kNodesPerLinePanel;
    return refine_line(g, p, tol, 0, err, nodes, ok);
}

}  // namespace

QuadratureResult integrate_interval(const RadialIntegrand& g, double a, double b, double tol,
                                    std::span<const double> breaks) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    if (!(a <= b)) throw DomainError("interval endpoints out of order");
    QuadratureResult result;
    if (a == b) return result;
    const auto edges = panel_edges(a, b, breaks, 0.0);
    std::priority_queue<LinePanel, std::vector<LinePanel>, LineWorstFirst> heap;
    std::vector<LinePanel> settled;
    std::size_t next_id = 0;
    double total = 0.0;
    for (std::size_t i = 1; i < edges.size(); ++i) {
        LinePanel p{edges[i - 1], edges[i], {}, 0.0, next_id++};
        evaluate_line(g, p);
        result.nodes_used += kNodesPerLinePanel;
        total += p.err;
        heap.push(p);
    }
    while (total > tol && !heap.empty() && result.nodes_used < kDefaultNodeBudget) {
        LinePanel worst = heap.top();
        heap.pop();
        if (worst.b - worst.a < kMinPanel * std::max(1.0, std::abs(worst.a)) ||
            worst.err <= kNoiseFactor * worst.magnitude) {
            settled.push_back(worst);
            continue;
        }
        total -= worst.err;
        const double mid = 0.5 * (worst.a + worst.b);
        LinePanel l{worst.a, mid, {}, 0.0, next_id++}, r{mid, worst.b, {}, 0.0, next_id++};
        evaluate_line(g, l);
        evaluate_line(g, r);
        result.nodes_used += 2 * kNodesPerLinePanel;
        total += l.err + r.err;
        if (l.err + r.err >= kStagnation * worst.err) {
            settled.push_back(l);
            settled.push_back(r);
            continue;
        }
        heap.push(l);
        heap.push(r);
    }
    while (!heap.empty()) {
        settled.push_back(heap.top());
        heap.pop();
    }
    std::sort(settled.begin(), settled.end(), [](const LinePanel& x, const LinePanel& y) { return x.id < y.id; });
    CompensatedSum<Complex> value;
    CompensatedSum<double> err;
    for (const auto& p : settled) {
        value.add(p.q);
        err.add(p.err);
    }
    result.value = value.value();
    result.error_estimate = err.value();
    result.converged = result.error_estimate <= tol;
    return result;
}

QuadratureResult integrate_radial_oscillatory(const RadialIntegrand& g, double r0, double r1, double tol,
                                              std::span<const double> breaks) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    if (!(r0 >= 0.5)) throw DomainError("oscillatory radial rule requires r0 >= 1/2");
    if (!(r1 < 1.0))
        throw DomainError("oscillatory radial rule requires r1 < 1; pass the endpoint as a limit schedule");
    if (!(r0 <= r1)) throw DomainError("interval endpoints out of order");
    QuadratureResult result;
    if (r0 == r1) return result;

    const double y0 = 1.0 / (1.0 - r0);
    const double y1 = 1.0 / (1.0 - r1);
    std::vector<double> edges{y0};
    for (auto k = static_cast<long long>(std::floor(y0 / kPi)) + 1; kPi * static_cast<double>(k) < y1; ++k) {
        const double y = kPi * static_cast<double>(k);
        if (y > y0) edges.push_back(y);
    }
    for (double r : breaks)
        if (r > r0 && r < r1) edges.push_back(1.0 / (1.0 - r));
    edges.push_back(y1);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    const RadialIntegrand h = [&g](double y) { return g(1.0 - 1.0 / y) / (y * y); };
    CompensatedSum<Complex> value;
    double err = 0.0;
    bool ok = true;
    const double span = y1 - y0;
    for (std::size_t i = 1; i < edges.size(); ++i) {
        const double share = tol * (edges[i] - edges[i - 1]) / span;
        value.add(refine_line(h, edges[i - 1], edges[i], share, err, result.nodes_used, ok));
    }
    result.value = value.value();
    result.error_estimate = err;
    // Panels stuck at the noise floor above their share still count through err.
    result.converged = err <= tol;
    return result;
}

QuadratureResult integrate_radial(const RadialIntegrand& g, double r0, double r1, double tol,
                                  std::span<const double> breaks, std::optional<double> oscillation_onset) {
    if (!oscillation_onset || r1 <= std::max(*oscillation_onset, 0.5))
        return integrate_interval(g, r0, r1, tol, breaks);
    const double split = std::max({*oscillation_onset, 0.5, r0});
    QuadratureResult inner;
    if (split > r0) inner = integrate_interval(g, r0, split, 0.5 * tol, breaks);
    const auto outer = integrate_radial_oscillatory(g, split, r1, split > r0 ? 0.5 * tol : tol, breaks);
    return {inner.value + outer.value, inner.error_estimate + outer.error_estimate,
            inner.nodes_used + outer.nodes_used, inner.converged && outer.converged};
}

std::vector<WeightedNode> polar_tensor_rule(std::span<const double> radii, int order, std::size_t angular) {
    if (radii.size() < 2 || angular < 1) throw DomainError("tensor rule needs two radii and one angle");
    const GaussRule& g = gauss_legendre(order);
    std::vector<WeightedNode> nodes;
    nodes.reserve((radii.size() - 1) * g.nodes.size() * angular);
    for (std::size_t p = 1; p < radii.size(); ++p) {
        const double h = 0.5 * (radii[p] - radii[p - 1]), m = 0.5 * (radii[p] + radii[p - 1]);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const double rho = m + h * g.nodes[i];
            const double w = 2.0 * h * g.weights[i] * rho / static_cast<double>(angular);
            for (std::size_t j = 0; j < angular; ++j)
                nodes.push_back({rho, kTwoPi * static_cast<double>(j) / static_cast<double>(angular), w});
        }
    }
    return nodes;
}

}  // namespace bergman
