#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace bergman {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Largest generation enumerate_decomposition accepts unless told otherwise.
inline constexpr int kDefaultGenerationCap = 24;

/// Neighbor-count bound for the dyadic decomposition. Generation 1 boxes have
/// 6 touching boxes, every later generation has exactly 9 (3 per adjacent
/// generation ring, counting the box itself).
inline constexpr std::size_t kMaxNeighbors = 9;

/// Lower bound of |D(w,R)| / |D_n| over all boxes and all w in the closed box.
inline constexpr double kInscribedAreaRatio = 0.125;

struct PolarPoint {
    double rho = 0.0;
    double phi = 0.0;

    std::complex<double> z() const { return std::polar(rho, phi); }
    static PolarPoint from_complex(std::complex<double> z);
};

/// Dyadic position (m, mu): generation m >= 1, angular slot 1 <= mu <= 2^m.
struct BoxIndex {
    int m = 1;
    std::int64_t mu = 1;

    friend bool operator==(const BoxIndex&, const BoxIndex&) = default;
    friend auto operator<=>(const BoxIndex&, const BoxIndex&) = default;
};

/// Position of (m, mu) in the (m asc, mu asc) enumeration, starting at 0.
std::size_t ordinal(BoxIndex index);
BoxIndex index_from_ordinal(std::size_t ordinal);

/// Polar rectangle {r_in <= |z| <= r_out, theta_in <= arg z <= theta_out}
/// of the family D(r, theta): r_out = (1 + r_in)/2 and the angular width is
/// pi (1 - r_in).
class DyadicBox {
public:
    /// The box D(r, theta) with inner radius r and start angle theta.
    static DyadicBox from_corner(double r, double theta);
    static DyadicBox from_index(BoxIndex index);

    double r_in() const { return r_in_; }
    double r_out() const { return r_out_; }
    double theta_in() const { return theta_in_; }
    double theta_out() const { return theta_out_; }
    double width() const { return theta_out_ - theta_in_; }
    const std::optional<BoxIndex>& index() const { return index_; }

    /// Normalized area |D| (the whole disc has measure 1).
    double area() const;

    PolarPoint center() const;

    /// Angle of p measured from theta_in, unwrapped into [0, 2pi).
    double relative_angle(const PolarPoint& p) const;

    /// Half-open membership r_in < rho <= r_out, theta_in < phi <= theta_out (mod 2pi).
    bool contains(const PolarPoint& p) const;
    /// Membership in the closed box, with absolute slack eps on both axes.
    bool contains_closed(const PolarPoint& p, double eps = 1e-12) const;

private:
    DyadicBox(double r_in, double theta_in, double theta_out, std::optional<BoxIndex> index);

    double r_in_;
    double r_out_;
    double theta_in_;
    double theta_out_;
    std::optional<BoxIndex> index_;
};

DyadicBox box_from_index(int m, std::int64_t mu);
double box_area(const DyadicBox& box);

/// True when the closures of the two indexed boxes intersect. Exact (integer) test.
bool boxes_touch(BoxIndex a, BoxIndex b);

/// All indexed boxes up to generation m_max in (m asc, mu asc) order.
class Decomposition {
public:
    int m_max() const { return m_max_; }
    std::size_t size() const { return boxes_.size(); }
    const DyadicBox& box(std::size_t id) const { return boxes_.at(id); }
    const std::vector<DyadicBox>& boxes() const { return boxes_; }
    bool contains(BoxIndex index) const;

    friend Decomposition enumerate_decomposition(int m_max, int cap);

private:
    int m_max_ = 0;
    std::vector<DyadicBox> boxes_;
};

Decomposition enumerate_decomposition(int m_max, int cap = kDefaultGenerationCap);

struct NeighborSet {
    BoxIndex center;
    /// Every box whose closure meets the closure of the center box, center
    /// included, sorted by ordinal. Members past the decomposition frontier
    /// are included as if the decomposition continued.
    std::vector<BoxIndex> members;
    /// The boxes making up U_n (one per member).
    std::vector<DyadicBox> union_region;
    /// Some member lies beyond m_max of the decomposition.
    bool extends_past_frontier = false;
};

NeighborSet neighbors(BoxIndex n, const Decomposition& decomposition);
NeighborSet neighbors(std::size_t id, const Decomposition& decomposition);

struct InscribedDisc {
    PolarPoint center;
    double radius = 0.0;
    /// |D(w, radius)| / |D_n|; never below kInscribedAreaRatio.
    double area_ratio = 0.0;
};

/// A Euclidean disc around w (in the closed box n) contained in U_n.
InscribedDisc inscribed_disc(BoxIndex n, const PolarPoint& w);

/// V_m: union of all boxes of generation > m, i.e. the annulus |z| > 1 - 2^-m.
class TailRegion {
public:
    TailRegion(int cutoff, std::vector<std::size_t> box_ids);

    int generation_cutoff() const { return cutoff_; }
    double inner_radius() const;
    /// Ids (into the decomposition) of the boxes with generation > cutoff.
    const std::vector<std::size_t>& box_ids() const { return box_ids_; }
    bool indicator(std::complex<double> z) const;
    /// Normalized area of the full annulus 1 - (1 - 2^-m)^2.
    double area() const;

private:
    int cutoff_;
    std::vector<std::size_t> box_ids_;
};

TailRegion tail_region(int m, const Decomposition& decomposition);

/// Columns m, mu, r_in, r_out, theta_in, theta_out, area; 17 significant digits.
void write_decomposition_csv(std::ostream& out, const Decomposition& decomposition);

}  // namespace bergman
