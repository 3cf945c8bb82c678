#pragma once

#include <climits>
#include <complex>
#include <string>
#include <vector>

namespace xdv {

using cplx = std::complex<double>;

/// Window width and coefficient tolerance shared by all series arithmetic.
struct SeriesSettings {
    int width = 8;
    double rel_tol = 1e-9;
};
SeriesSettings& series_settings();

/// A point of C u {inf}.
struct Point {
    bool infinite = false;
    cplx value{};

    static Point inf() { return Point{true, {}}; }
    bool operator==(const Point&) const = default;
    std::string str() const;
};

/// Truncated Laurent series sum_k c_k zeta^(n0+k), or one of the exact values ZERO and INFINITY.
/// A finite series keeps only the coefficients it can vouch for; c_0 is always nonzero.
class Series {
public:
    enum class Kind { Zero, Finite, Infinity };

    Series() = default;
    Series(cplx c);
    Series(double c) : Series(cplx(c)) {}
    Series(int c) : Series(cplx(c)) {}

    static Series zero() { return Series(); }
    static Series infinity();
    /// coeff * zeta^power, exact to the full window.
    static Series monomial(cplx coeff, int power);
    /// Coefficients from power n0 upward; leading zeros are stripped.
    static Series from_coeffs(int n0, std::vector<cplx> coeffs);

    Kind kind() const { return kind_; }
    bool is_zero() const { return kind_ == Kind::Zero; }
    bool is_infinity() const { return kind_ == Kind::Infinity; }
    bool is_finite() const { return kind_ == Kind::Finite; }

    /// INT_MAX for ZERO, INT_MIN for INFINITY.
    int order() const;
    cplx leading() const;
    /// Coefficient of zeta^power; zero below the order, throws past the valid window.
    cplx coeff(int power) const;
    int base_order() const { return n0_; }
    const std::vector<cplx>& coeffs() const { return c_; }
    /// Highest power (exclusive) whose coefficient is known.
    int valid_until() const { return n0_ + static_cast<int>(c_.size()); }

    /// f_H: the constant term when order >= 0, inf otherwise.
    Point direction_from_home() const;
    /// Truncated sum at a numeric zeta.
    cplx evaluate(cplx zeta) const;

    Series operator-() const;
    Series inverse() const;
    friend Series operator+(const Series& a, const Series& b);
    friend Series operator-(const Series& a, const Series& b);
    friend Series operator*(const Series& a, const Series& b);
    friend Series operator/(const Series& a, const Series& b);

    /// Coefficientwise comparison at relative tolerance over the shared window.
    bool approx(const Series& o, double tol = -1) const;
    std::string str() const;

private:
    Kind kind_ = Kind::Zero;
    int n0_ = 0;
    std::vector<cplx> c_;
};

inline constexpr int kOrderZero = INT_MAX;
inline constexpr int kOrderInfinity = INT_MIN;

/// ((a-c)(b-d))/((a-d)(b-c)); an infinite argument drops the two factors it appears in.
Series cross_ratio(const Series& a, const Series& b, const Series& c, const Series& d);

/// The first of z, (z-1)/z, 1/(1-z) with order >= 0 and constant term != 1.
Series preferred_cross_ratio(const Series& z);
/// Which of the three was chosen: 0 for z, 1 for (z-1)/z, 2 for 1/(1-z).
int preferred_index(const Series& z);

/// The d with cross_ratio(a,b,c,d) = z.
Series develop_fourth(const Series& a, const Series& b, const Series& c, const Series& z);

/// At most one pairwise difference has positive order.
bool is_domestic(const Series& a, const Series& b, const Series& c);

/// Order and leading coefficient of a nonzero quantity.
struct Lead {
    int order = 0;
    cplx lead{1.0};
};
Lead lead_of(const Series& s);

struct LowestOrderInput {
    Point a, b, c;  // constant terms of a, b, c (all finite)
    Lead ab, ac, bc;  // a-b, a-c, b-c
    Lead z;
};
struct LowestOrderResult {
    Point d;
    Lead da, db, dc;  // d-a, d-b, d-c
};
/// Leading data of the developed fourth point from leading data alone.
/// Throws DevelopError when the fourth point leaves C[[zeta]].
LowestOrderResult lowest_order_develop(const LowestOrderInput& in);

/// 2x2 matrix over truncated series acting by fractional linear maps.
struct MobiusSeries {
    Series a{1}, b{}, c{}, d{1};

    Series apply(const Series& x) const;
    Series det() const;
    MobiusSeries operator*(const MobiusSeries& o) const;
    MobiusSeries inverse() const;
    /// Scale so the determinant is 1 (or zeta when its order is odd).
    MobiusSeries normalized() const;
};

/// The Mobius map sending p_i to q_i.
MobiusSeries mobius_from_triples(const Series& p1, const Series& p2, const Series& p3, const Series& q1,
                                 const Series& q2, const Series& q3);

/// Square root of a series of even order with leading branch sqrt(leading).
Series sqrt(const Series& x);

} // namespace xdv
