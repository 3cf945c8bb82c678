#include "xdv/series.hpp"

#include "xdv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xdv {

SeriesSettings& series_settings() {
    static SeriesSettings s;
    return s;
}

std::string Point::str() const {
    if (infinite) return "inf";
    std::ostringstream out;
    out << value.real() << (value.imag() < 0 ? "-" : "+") << std::abs(value.imag()) << "i";
    return out.str();
}

namespace {

double tol() { return series_settings().rel_tol; }
int width() { return series_settings().width; }

} // namespace

Series::Series(cplx c) {
    if (c == cplx(0)) return;
    kind_ = Kind::Finite;
    n0_ = 0;
    c_.assign(width(), cplx(0));
    c_[0] = c;
}

Series Series::infinity() {
    Series s;
    s.kind_ = Kind::Infinity;
    return s;
}

Series Series::monomial(cplx coeff, int power) {
    Series s(coeff);
    if (s.is_finite()) s.n0_ = power;
    return s;
}

Series Series::from_coeffs(int n0, std::vector<cplx> coeffs) {
    size_t k = 0;
    while (k < coeffs.size() && coeffs[k] == cplx(0)) ++k;
    Series s;
    if (k == coeffs.size()) return s;
    s.kind_ = Kind::Finite;
    s.n0_ = n0 + static_cast<int>(k);
    s.c_.assign(coeffs.begin() + k, coeffs.end());
    if (static_cast<int>(s.c_.size()) > width()) s.c_.resize(width());
    return s;
}

int Series::order() const {
    switch (kind_) {
    case Kind::Zero: return kOrderZero;
    case Kind::Infinity: return kOrderInfinity;
    default: return n0_;
    }
}

cplx Series::leading() const {
    if (!is_finite()) throw DomainError("leading coefficient of " + std::string(is_zero() ? "ZERO" : "INFINITY"));
    return c_[0];
}

cplx Series::coeff(int power) const {
    if (is_infinity()) throw DomainError("coefficient of INFINITY");
    if (is_zero() || power < n0_) return 0;
    if (power >= valid_until()) throw PrecisionError("coefficient beyond the valid window");
    return c_[power - n0_];
}

Point Series::direction_from_home() const {
    if (is_infinity() || (is_finite() && n0_ < 0)) return Point::inf();
    if (is_zero() || n0_ > 0) return Point{false, 0};
    return Point{false, c_[0]};
}

cplx Series::evaluate(cplx zeta) const {
    if (is_infinity()) throw DomainError("evaluating INFINITY");
    cplx s = 0;
    for (size_t k = c_.size(); k-- > 0;) s = s * zeta + c_[k];
    return s * std::pow(zeta, n0_);
}

Series Series::operator-() const {
    Series r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

Series Series::inverse() const {
    if (is_zero()) throw DomainError("inverse of ZERO");
    if (is_infinity()) return Series();
    Series r;
    r.kind_ = Kind::Finite;
    r.n0_ = -n0_;
    const size_t n = c_.size();
    r.c_.assign(n, 0);
    const cplx inv0 = 1.0 / c_[0];
    r.c_[0] = inv0;
    for (size_t k = 1; k < n; ++k) {
        cplx s = 0;
        for (size_t j = 1; j <= k; ++j) s += c_[j] * r.c_[k - j];
        r.c_[k] = -inv0 * s;
    }
    return r;
}

Series operator+(const Series& a, const Series& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_infinity() && b.is_infinity()) throw DomainError("INFINITY + INFINITY");
    if (a.is_infinity() || b.is_infinity()) return Series::infinity();
    const int lo = std::min(a.n0_, b.n0_);
    const int hi = std::min(a.valid_until(), b.valid_until());
    if (hi <= lo) throw PrecisionError("sum has no valid coefficients");
    std::vector<cplx> c(hi - lo, 0);
    std::vector<double> scale(hi - lo, 0);
    for (int p = lo; p < hi; ++p) {
        cplx x = p >= a.n0_ ? a.c_[p - a.n0_] : cplx(0);
        cplx y = p >= b.n0_ ? b.c_[p - b.n0_] : cplx(0);
        scale[p - lo] = std::max(std::abs(x), std::abs(y));
        c[p - lo] = x + y;
    }
    // A coefficient counts as cancelled when it is tiny relative to its own summands.
    size_t k = 0;
    while (k < c.size() && std::abs(c[k]) <= tol() * scale[k]) ++k;
    if (k == c.size()) throw PrecisionError("cancellation exhausted the series window");
    Series r;
    r.kind_ = Series::Kind::Finite;
    r.n0_ = lo + static_cast<int>(k);
    r.c_.assign(c.begin() + k, c.end());
    return r;
}

Series operator-(const Series& a, const Series& b) { return a + (-b); }

Series operator*(const Series& a, const Series& b) {
    if ((a.is_zero() && b.is_infinity()) || (a.is_infinity() && b.is_zero())) throw DomainError("ZERO * INFINITY");
    if (a.is_zero() || b.is_zero()) return Series();
    if (a.is_infinity() || b.is_infinity()) return Series::infinity();
    Series r;
    r.kind_ = Series::Kind::Finite;
    r.n0_ = a.n0_ + b.n0_;
    const size_t n = std::min(a.c_.size(), b.c_.size());
    r.c_.assign(n, 0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; i + j < n; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    return r;
}

Series operator/(const Series& a, const Series& b) {
    if (b.is_zero()) throw DomainError("division by ZERO");
    if (a.is_infinity() && b.is_infinity()) throw DomainError("INFINITY / INFINITY");
    if (a.is_infinity()) return a;
    return a * b.inverse();
}

bool Series::approx(const Series& o, double t) const {
    if (t < 0) t = tol();
    if (kind_ != o.kind_) return false;
    if (!is_finite()) return true;
    if (n0_ != o.n0_) return false;
    const int hi = std::min(valid_until(), o.valid_until());
    const double floor = std::max(std::abs(c_[0]), std::abs(o.c_[0]));
    for (int p = n0_; p < hi; ++p) {
        const double m = std::max({std::abs(coeff(p)), std::abs(o.coeff(p)), floor});
        if (std::abs(coeff(p) - o.coeff(p)) > t * m) return false;
    }
    return true;
}

std::string Series::str() const {
    if (is_zero()) return "0";
    if (is_infinity()) return "inf";
    std::ostringstream out;
    for (size_t k = 0; k < c_.size(); ++k) {
        if (c_[k] == cplx(0)) continue;
        if (out.tellp() > 0) out << " + ";
        out << "(" << c_[k].real() << (c_[k].imag() < 0 ? "-" : "+") << std::abs(c_[k].imag()) << "i)";
        const int p = n0_ + static_cast<int>(k);
        if (p != 0) out << "z^" << p;
    }
    out << " + O(z^" << valid_until() << ")";
    return out.str();
}

namespace {

Series difference(const Series& x, const Series& y) {
    try {
        return x - y;
    } catch (const PrecisionError&) {
        throw DomainError("coincident points");
    }
}

} // namespace

Series cross_ratio(const Series& a, const Series& b, const Series& c, const Series& d) {
    int infs = a.is_infinity() + b.is_infinity() + c.is_infinity() + d.is_infinity();
    if (infs > 1) throw DomainError("cross ratio: coincident points at infinity");
    const Series* pts[4] = {&a, &b, &c, &d};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (pts[i]->is_finite() && pts[j]->is_finite()) difference(*pts[i], *pts[j]);
    if (a.is_infinity()) return difference(b, d) / difference(b, c);
    if (b.is_infinity()) return difference(a, c) / difference(a, d);
    if (c.is_infinity()) return difference(b, d) / difference(a, d);
    if (d.is_infinity()) return difference(a, c) / difference(b, c);
    return (difference(a, c) * difference(b, d)) / (difference(a, d) * difference(b, c));
}

namespace {

bool qualifies(const Series& s) {
    if (!s.is_finite()) return false;
    if (s.order() > 0) return true;
    if (s.order() < 0) return false;
    return std::abs(s.leading() - 1.0) > tol() * std::max(1.0, std::abs(s.leading()));
}

} // namespace

int preferred_index(const Series& z) {
    if (qualifies(z)) return 0;
    if (qualifies((z - 1) / z)) return 1;
    return 2;
}

Series preferred_cross_ratio(const Series& z) {
    if (!z.is_finite()) throw DomainError("preferred cross ratio of a degenerate value");
    if (qualifies(z)) return z;
    Series z2 = (z - 1) / z;
    if (qualifies(z2)) return z2;
    return Series(1) / (Series(1) - z);
}

Series develop_fourth(const Series& a, const Series& b, const Series& c, const Series& z) {
    if (!z.is_finite()) throw DomainError("develop: degenerate angle");
    if (a.is_infinity()) return b - z * difference(b, c);
    if (b.is_infinity()) return a - difference(a, c) / z;
    if (c.is_infinity()) return (z * a - b) / (z - 1);
    const Series bc = difference(b, c), ac = difference(a, c);
    Series q;
    try {
        q = bc * z - ac;
    } catch (const PrecisionError&) {
        throw DevelopError("develop: denominator vanishes within the window");
    }
    return (bc * z * a - ac * b) / q;
}

bool is_domestic(const Series& a, const Series& b, const Series& c) {
    auto positive = [](const Series& x, const Series& y) {
        if (x.is_infinity() || y.is_infinity()) return false;
        return std::max(x.order(), y.order()) >= 0 && difference(x, y).order() > 0;
    };
    return positive(a, b) + positive(a, c) + positive(b, c) <= 1;
}

Lead lead_of(const Series& s) {
    if (!s.is_finite()) throw DomainError("leading data of ZERO or INFINITY");
    return Lead{s.order(), s.leading()};
}

LowestOrderResult lowest_order_develop(const LowestOrderInput& in) {
    if (in.a.infinite || in.b.infinite || in.c.infinite) throw DomainError("lowest-order develop needs finite points");
    if (in.z.lead == cplx(0)) throw DomainError("lowest-order develop: zero angle");
    const double t = tol();
    const int o1 = in.bc.order + in.z.order, o2 = in.ac.order;
    Lead q;
    if (o1 < o2) {
        q = {o1, in.bc.lead * in.z.lead};
    } else if (o2 < o1) {
        q = {o2, -in.ac.lead};
    } else {
        const cplx x = in.bc.lead * in.z.lead, y = in.ac.lead;
        q = {o1, x - y};
        if (std::abs(q.lead) <= t * std::max(std::abs(x), std::abs(y)))
            throw DevelopError("fourth point leaves C[[zeta]]");
    }
    Lead zm1;
    if (in.z.order > 0) {
        zm1 = {0, -1.0};
    } else if (in.z.order == 0) {
        zm1 = {0, in.z.lead - 1.0};
        if (std::abs(zm1.lead) <= t * std::abs(in.z.lead)) throw DomainError("lowest-order develop: angle 1");
    } else {
        zm1 = in.z;
    }
    LowestOrderResult r;
    r.da = {in.ab.order + in.ac.order - q.order, in.ab.lead * in.ac.lead / q.lead};
    r.db = {in.bc.order + in.ab.order + in.z.order - q.order, in.bc.lead * in.ab.lead * in.z.lead / q.lead};
    r.dc = {in.ac.order + in.bc.order + zm1.order - q.order, in.ac.lead * in.bc.lead * zm1.lead / q.lead};
    if (r.da.order < 0 || r.db.order < 0 || r.dc.order < 0) throw DevelopError("fourth point leaves C[[zeta]]");
    r.d = Point{false, r.da.order == 0 ? in.a.value + r.da.lead : in.a.value};
    return r;
}

Series MobiusSeries::apply(const Series& x) const {
    if (x.is_infinity()) return c.is_zero() ? Series::infinity() : a / c;
    const Series den = c * x + d;
    if (den.is_zero()) return Series::infinity();
    return (a * x + b) / den;
}

Series MobiusSeries::det() const { return a * d - b * c; }

namespace {

/// Matrix entries may cancel exactly (the identity, diagonal maps); those become ZERO.
Series entry(const Series& x, const Series& y) {
    try {
        return x + y;
    } catch (const PrecisionError&) {
        return Series();
    }
}

} // namespace

MobiusSeries MobiusSeries::operator*(const MobiusSeries& o) const {
    return {entry(a * o.a, b * o.c), entry(a * o.b, b * o.d), entry(c * o.a, d * o.c), entry(c * o.b, d * o.d)};
}

MobiusSeries MobiusSeries::inverse() const { return {d, -b, -c, a}; }

Series sqrt(const Series& x) {
    if (x.is_zero()) return x;
    if (!x.is_finite()) throw DomainError("square root of INFINITY");
    if (x.order() % 2 != 0) throw DomainError("square root of odd order");
    const auto& c = x.coeffs();
    std::vector<cplx> s(c.size(), 0);
    s[0] = std::sqrt(c[0]);
    for (size_t k = 1; k < c.size(); ++k) {
        cplx acc = c[k];
        for (size_t j = 1; j < k; ++j) acc -= s[j] * s[k - j];
        s[k] = acc / (2.0 * s[0]);
    }
    return Series::from_coeffs(x.order() / 2, s);
}

MobiusSeries MobiusSeries::normalized() const {
    Series D = det();
    const int n = D.order();
    const int half = n >= 0 ? n / 2 : -((-n + 1) / 2);
    Series unit = D / Series::monomial(1, 2 * half);
    Series k = sqrt(unit) * Series::monomial(1, half);
    return {a / k, b / k, c / k, d / k};
}

namespace {

/// Map sending p1, p2, p3 to 0, inf, 1.
MobiusSeries to_standard(const Series& p1, const Series& p2, const Series& p3) {
    if (p1.is_infinity()) return {Series(), difference(p2, p3), Series(1), -p2};
    if (p2.is_infinity()) return {Series(1), -p1, Series(), difference(p3, p1)};
    if (p3.is_infinity()) return {Series(1), -p1, Series(1), -p2};
    const Series s23 = difference(p2, p3), s13 = difference(p1, p3);
    difference(p1, p2);
    return {s23, -(p1 * s23), s13, -(p2 * s13)};
}

} // namespace

MobiusSeries mobius_from_triples(const Series& p1, const Series& p2, const Series& p3, const Series& q1,
                                 const Series& q2, const Series& q3) {
    return (to_standard(q1, q2, q3).inverse() * to_standard(p1, p2, p3)).normalized();
}

} // namespace xdv
