#include "voromesh/geometry/predicates.hpp"

#include <atomic>
#include <cmath>
#include <vector>

#include "voromesh/errors.hpp"

namespace voromesh {

namespace {

std::atomic<long> g_exact_fallbacks{0};

constexpr double kEpsilon = 0x1p-53;
constexpr double kOrientBound = (3.0 + 16.0 * kEpsilon) * kEpsilon;
constexpr double kInCircleBound = (10.0 + 96.0 * kEpsilon) * kEpsilon;

// Nonoverlapping floating-point expansion, components in increasing magnitude,
// zeros eliminated. Value is the exact sum of the components.
class Expansion {
public:
    Expansion() = default;
    explicit Expansion(double v) {
        if (v != 0.0) c_.push_back(v);
    }

    static Expansion diff(double a, double b) {
        const double x = a - b;
        const double bv = a - x;
        const double av = x + bv;
        const double br = bv - b;
        const double ar = a - av;
        Expansion e;
        e.push(ar + br);
        e.push(x);
        return e;
    }

    static Expansion product(double a, double b) {
        const double x = a * b;
        Expansion e;
        e.push(std::fma(a, b, -x));
        e.push(x);
        return e;
    }

    int sign() const {
        if (c_.empty()) return 0;
        return c_.back() > 0.0 ? 1 : -1;
    }

    friend Expansion operator+(const Expansion& e, const Expansion& f) {
        Expansion r = e;
        for (double v : f.c_) r = r.grow(v);
        return r;
    }

    friend Expansion operator-(const Expansion& e, const Expansion& f) {
        Expansion r = e;
        for (double v : f.c_) r = r.grow(-v);
        return r;
    }

    friend Expansion operator*(const Expansion& e, const Expansion& f) {
        Expansion r;
        for (double v : f.c_) r = r + e.scale(v);
        return r;
    }

private:
    void push(double v) {
        if (v != 0.0) c_.push_back(v);
    }

    static void two_sum(double a, double b, double& x, double& y) {
        x = a + b;
        const double bv = x - a;
        const double av = x - bv;
        y = (a - av) + (b - bv);
    }

    Expansion grow(double b) const {
        Expansion r;
        double q = b;
        for (double e : c_) {
            double sum, err;
            two_sum(q, e, sum, err);
            r.push(err);
            q = sum;
        }
        r.push(q);
        return r;
    }

    Expansion scale(double b) const {
        Expansion r;
        if (c_.empty() || b == 0.0) return r;
        double q = c_[0] * b;
        r.push(std::fma(c_[0], b, -q));
        for (std::size_t i = 1; i < c_.size(); ++i) {
            const double t1 = c_[i] * b;
            const double t0 = std::fma(c_[i], b, -t1);
            double sum, err;
            two_sum(q, t0, sum, err);
            r.push(err);
            // fast two-sum: |t1| >= |sum|
            const double nq = t1 + sum;
            r.push(sum - (nq - t1));
            q = nq;
        }
        r.push(q);
        return r;
    }

    std::vector<double> c_;
};

int orient2d_exact(Point2 a, Point2 b, Point2 c) {
    ++g_exact_fallbacks;
    const Expansion acx = Expansion::diff(a.x, c.x);
    const Expansion acy = Expansion::diff(a.y, c.y);
    const Expansion bcx = Expansion::diff(b.x, c.x);
    const Expansion bcy = Expansion::diff(b.y, c.y);
    return (acx * bcy - acy * bcx).sign();
}

int in_circle_exact(Point2 a, Point2 b, Point2 c, Point2 d) {
    ++g_exact_fallbacks;
    const Expansion adx = Expansion::diff(a.x, d.x), ady = Expansion::diff(a.y, d.y);
    const Expansion bdx = Expansion::diff(b.x, d.x), bdy = Expansion::diff(b.y, d.y);
    const Expansion cdx = Expansion::diff(c.x, d.x), cdy = Expansion::diff(c.y, d.y);
    const Expansion alift = adx * adx + ady * ady;
    const Expansion blift = bdx * bdx + bdy * bdy;
    const Expansion clift = cdx * cdx + cdy * cdy;
    const Expansion det = alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
                          clift * (adx * bdy - ady * bdx);
    return det.sign();
}

}  // namespace

int orient2d(Point2 a, Point2 b, Point2 c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    const double bound = kOrientBound * (std::abs(detleft) + std::abs(detright));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return orient2d_exact(a, b, c);
}

int in_circle_unchecked(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;

    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                             (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = kInCircleBound * permanent;
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return in_circle_exact(a, b, c, d);
}

int in_circle(Point2 a, Point2 b, Point2 c, Point2 d) {
    const int o = orient2d(a, b, c);
    if (o == 0) throw DegeneracyError("in_circle: collinear triangle", a, b, c);
    // Normalize to counterclockwise so the sign convention holds for either input order.
    return o > 0 ? in_circle_unchecked(a, b, c, d) : in_circle_unchecked(a, c, b, d);
}

Point2 circumcenter(Point2 a, Point2 b, Point2 c) {
    if (orient2d(a, b, c) == 0) throw DegeneracyError("circumcenter: collinear points", a, b, c);
    const Vec2 ab = b - a;
    const Vec2 ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = norm2(ab);
    const double ac2 = norm2(ac);
    return {a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
}

namespace predicates_detail {
long exact_fallback_count() { return g_exact_fallbacks.load(); }
}

}  // namespace voromesh
