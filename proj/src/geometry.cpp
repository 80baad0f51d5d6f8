#include "bergman/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "bergman/csv.hpp"
#include "bergman/errors.hpp"

namespace bergman {

namespace {

constexpr int kMaxRepresentableGeneration = 62;

std::int64_t slots(int m) { return std::int64_t{1} << m; }

void check_index(BoxIndex index) {
    if (index.m < 1 || index.m > kMaxRepresentableGeneration)
        throw DomainError("generation m=" + std::to_string(index.m) + " outside 1.." +
                          std::to_string(kMaxRepresentableGeneration));
    if (index.mu < 1 || index.mu > slots(index.m))
        throw DomainError("mu=" + std::to_string(index.mu) + " outside valid range 1.." +
                          std::to_string(slots(index.m)) + " for m=" + std::to_string(index.m));
}

std::int64_t wrap_mu(std::int64_t mu, int m) {
    const std::int64_t n = slots(m);
    return ((mu - 1) % n + n) % n + 1;
}

}  // namespace

PolarPoint PolarPoint::from_complex(std::complex<double> z) {
    double phi = std::arg(z);
    if (phi < 0.0) phi += kTwoPi;
    return {std::abs(z), phi};
}

std::size_t ordinal(BoxIndex index) {
    check_index(index);
    return static_cast<std::size_t>(slots(index.m) - 2 + (index.mu - 1));
}

BoxIndex index_from_ordinal(std::size_t ordinal) {
    int m = 1;
    while (static_cast<std::size_t>(slots(m + 1) - 2) <= ordinal) ++m;
    return {m, static_cast<std::int64_t>(ordinal) - (slots(m) - 2) + 1};
}

DyadicBox::DyadicBox(double r_in, double theta_in, double theta_out, std::optional<BoxIndex> index)
    : r_in_(r_in),
      r_out_(1.0 - 0.5 * (1.0 - r_in)),
      theta_in_(theta_in),
      theta_out_(theta_out),
      index_(index) {}

DyadicBox DyadicBox::from_corner(double r, double theta) {
    if (!(r >= 0.0 && r < 1.0)) throw DomainError("box inner radius must lie in [0, 1)");
    if (!std::isfinite(theta)) throw DomainError("box start angle must be finite");
    return DyadicBox(r, theta, theta + kPi * (1.0 - r), std::nullopt);
}

DyadicBox DyadicBox::from_index(BoxIndex index) {
    check_index(index);
    const double r_in = 1.0 - std::ldexp(1.0, 1 - index.m);
    const double theta_in = kPi * std::ldexp(static_cast<double>(index.mu - 1), 1 - index.m);
    const double theta_out = kPi * std::ldexp(static_cast<double>(index.mu), 1 - index.m);
    return DyadicBox(r_in, theta_in, theta_out, index);
}

double DyadicBox::area() const {
    return width() * (r_out_ - r_in_) * (r_out_ + r_in_) / kTwoPi;
}

PolarPoint DyadicBox::center() const {
    return {0.5 * (r_in_ + r_out_), 0.5 * (theta_in_ + theta_out_)};
}

double DyadicBox::relative_angle(const PolarPoint& p) const {
    double d = std::fmod(p.phi - theta_in_, kTwoPi);
    if (d < 0.0) d += kTwoPi;
    return d;
}

bool DyadicBox::contains(const PolarPoint& p) const {
    if (!(p.rho > r_in_ && p.rho <= r_out_)) return false;
    const double d = relative_angle(p);
    return d > 0.0 && d <= width();
}

bool DyadicBox::contains_closed(const PolarPoint& p, double eps) const {
    if (p.rho < r_in_ - eps || p.rho > r_out_ + eps) return false;
    const double d = relative_angle(p);
    return d <= width() + eps || d >= kTwoPi - eps;
}

DyadicBox box_from_index(int m, std::int64_t mu) { return DyadicBox::from_index({m, mu}); }

double box_area(const DyadicBox& box) { return box.area(); }

bool boxes_touch(BoxIndex a, BoxIndex b) {
    check_index(a);
    check_index(b);
    if (std::abs(a.m - b.m) > 1) return false;
    // Angles in units of pi * 2^(1-L); the full circle is 2^L units.
    const int level = std::max(a.m, b.m);
    const std::int64_t circle = slots(level);
    const std::int64_t sa = slots(level - a.m);
    const std::int64_t sb = slots(level - b.m);
    const std::int64_t a0 = (a.mu - 1) * sa, a1 = a.mu * sa;
    const std::int64_t b0 = (b.mu - 1) * sb, b1 = b.mu * sb;
    for (std::int64_t shift : {-circle, std::int64_t{0}, circle}) {
        if (std::max(a0, b0 + shift) <= std::min(a1, b1 + shift)) return true;
    }
    return false;
}

bool Decomposition::contains(BoxIndex index) const {
    return index.m >= 1 && index.m <= m_max_ && index.mu >= 1 && index.mu <= slots(index.m);
}

Decomposition enumerate_decomposition(int m_max, int cap) {
    if (m_max < 1) throw DomainError("m_max must be at least 1");
    if (m_max > cap)
        throw ResourceError("m_max=" + std::to_string(m_max) + " exceeds the generation cap " +
                            std::to_string(cap));
    Decomposition d;
    d.m_max_ = m_max;
    d.boxes_.reserve(static_cast<std::size_t>(slots(m_max + 1) - 2));
    for (int m = 1; m <= m_max; ++m)
        for (std::int64_t mu = 1; mu <= slots(m); ++mu) d.boxes_.push_back(box_from_index(m, mu));
    return d;
}

NeighborSet neighbors(BoxIndex n, const Decomposition& decomposition) {
    if (!decomposition.contains(n))
        throw DomainError("box (" + std::to_string(n.m) + ", " + std::to_string(n.mu) +
                          ") is not part of the decomposition");
    std::vector<BoxIndex> candidates;
    auto add_range = [&](int m, std::int64_t lo, std::int64_t hi) {
        if (m < 1) return;
        for (std::int64_t mu = lo; mu <= hi; ++mu) candidates.push_back({m, wrap_mu(mu, m)});
    };
    add_range(n.m - 1, (n.mu + 1) / 2 - 1, (n.mu + 1) / 2 + 1);
    add_range(n.m, n.mu - 1, n.mu + 1);
    add_range(n.m + 1, 2 * n.mu - 2, 2 * n.mu + 1);

    NeighborSet set;
    set.center = n;
    for (const auto& c : candidates)
        if (boxes_touch(n, c)) set.members.push_back(c);
    std::sort(set.members.begin(), set.members.end());
    set.members.erase(std::unique(set.members.begin(), set.members.end()), set.members.end());
    for (const auto& member : set.members) {
        set.union_region.push_back(DyadicBox::from_index(member));
        if (member.m > decomposition.m_max()) set.extends_past_frontier = true;
    }
    return set;
}

NeighborSet neighbors(std::size_t id, const Decomposition& decomposition) {
    if (id >= decomposition.size()) throw DomainError("box id outside the decomposition");
    return neighbors(index_from_ordinal(id), decomposition);
}

InscribedDisc inscribed_disc(BoxIndex n, const PolarPoint& w) {
    const DyadicBox box = DyadicBox::from_index(n);
    if (!box.contains_closed(w))
        throw DomainError("point lies outside box (" + std::to_string(n.m) + ", " +
                          std::to_string(n.mu) + ")");
    // U_n contains the polar rectangle spanned by the three neighbor rings,
    // widened by half a box on each angular side.
    const double r_lo = n.m == 1 ? 0.0 : 1.0 - std::ldexp(1.0, 2 - n.m);
    const double r_hi = 1.0 - std::ldexp(1.0, -n.m - 1);
    const double extension = kPi * std::ldexp(1.0, -n.m);
    const double span = box.width() + 2.0 * extension;

    double radius = r_hi - w.rho;
    if (r_lo > 0.0) radius = std::min(radius, w.rho - r_lo);
    if (span < kTwoPi) {
        double d = box.relative_angle(w);
        if (d > box.width()) d -= kTwoPi;  // closed-box slack just below theta_in
        for (double delta : {d + extension, box.width() + extension - d}) {
            radius = std::min(radius, delta >= 0.5 * kPi ? w.rho : w.rho * std::sin(delta));
        }
    }
    return {w, radius, radius * radius / box.area()};
}

TailRegion::TailRegion(int cutoff, std::vector<std::size_t> box_ids)
    : cutoff_(cutoff), box_ids_(std::move(box_ids)) {}

double TailRegion::inner_radius() const { return 1.0 - std::ldexp(1.0, -cutoff_); }

bool TailRegion::indicator(std::complex<double> z) const {
    const double r = std::abs(z);
    return r > inner_radius() && r < 1.0;
}

double TailRegion::area() const {
    const double r = inner_radius();
    return 1.0 - r * r;
}

TailRegion tail_region(int m, const Decomposition& decomposition) {
    if (m < 0 || m > decomposition.m_max())
        throw DomainError("tail cutoff must lie in 0..m_max");
    std::vector<std::size_t> ids;
    for (std::size_t id = static_cast<std::size_t>(slots(m + 1) - 2); id < decomposition.size(); ++id)
        ids.push_back(id);
    return TailRegion(m, std::move(ids));
}

void write_decomposition_csv(std::ostream& out, const Decomposition& decomposition) {
    write_csv_row(out, {"m", "mu", "r_in", "r_out", "theta_in", "theta_out", "area"});
    for (const auto& box : decomposition.boxes()) {
        const auto& idx = *box.index();
        write_csv_row(out, {std::to_string(idx.m), std::to_string(idx.mu), format_real(box.r_in()),
                            format_real(box.r_out()), format_real(box.theta_in()),
                            format_real(box.theta_out()), format_real(box.area())});
    }
}

}  // namespace bergman
