#include "voromesh/domain/implicit_domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>

#include "voromesh/errors.hpp"

namespace voromesh {

namespace {

constexpr double kMinGradient = 1e-12;
constexpr int kNewtonSteps = 30;
constexpr double kSharpAngle = 5.0 * std::numbers::pi / 180.0;

struct Curve {
    enum class Kind { kSegment, kLine, kCircle } kind;
    Point2 a;        // segment start, line point, circle center
    Vec2 d;          // segment b - a, line direction
    double r = 0.0;  // circle radius
};

void append_curves(const CsgNode& prim, std::vector<Curve>& curves, std::vector<Point2>& vertices) {
    auto add_polygon = [&](const std::vector<Point2>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            curves.push_back({Curve::Kind::kSegment, v[i], v[(i + 1) % v.size()] - v[i], 0.0});
            vertices.push_back(v[i]);
        }
    };
    const auto& node = prim.node();
    if (const auto* c = std::get_if<Circle>(&node)) {
        curves.push_back({Curve::Kind::kCircle, c->center, {}, c->radius});
    } else if (const auto* h = std::get_if<HalfPlane>(&node)) {
        curves.push_back({Curve::Kind::kLine, h->point, {-h->normal.y, h->normal.x}, 0.0});
    } else if (const auto* r = std::get_if<AxisRectangle>(&node)) {
        add_polygon({r->min, {r->max.x, r->min.y}, r->max, {r->min.x, r->max.y}});
    } else if (const auto* p = std::get_if<ConvexPolygon>(&node)) {
        add_polygon(p->vertices);
    }
}

bool param_ok(const Curve& c, double t) {
    return c.kind != Curve::Kind::kSegment || (t >= -1e-12 && t <= 1.0 + 1e-12);
}

void intersect(const Curve& p, const Curve& q, std::vector<Point2>& out) {
    using K = Curve::Kind;
    if (p.kind != K::kCircle && q.kind != K::kCircle) {
        const double den = cross(p.d, q.d);
        if (std::abs(den) < 1e-14 * norm(p.d) * norm(q.d)) return;
        const Vec2 w = q.a - p.a;
        const double t = cross(w, q.d) / den;
        const double s = cross(w, p.d) / den;
        if (param_ok(p, t) && param_ok(q, s)) out.push_back(p.a + t * p.d);
        return;
    }
    if (p.kind == K::kCircle && q.kind == K::kCircle) {
        const Vec2 d = q.a - p.a;
        const double dist = norm(d);
        if (dist == 0.0 || dist > p.r + q.r || dist < std::abs(p.r - q.r)) return;
        const double along = (dist * dist + p.r * p.r - q.r * q.r) / (2 * dist);
        const double h = std::sqrt(std::max(0.0, p.r * p.r - along * along));
        const Vec2 u = d / dist;
        const Point2 base = p.a + along * u;
        out.push_back(base + h * Vec2{-u.y, u.x});
        if (h > 0) out.push_back(base - h * Vec2{-u.y, u.x});
        return;
    }
    const Curve& line = p.kind == K::kCircle ? q : p;
    const Curve& circ = p.kind == K::kCircle ? p : q;
    const Vec2 f = line.a - circ.a;
    const double a = norm2(line.d);
    const double b = 2 * dot(f, line.d);
    const double c = norm2(f) - circ.r * circ.r;
    const double disc = b * b - 4 * a * c;
    if (disc < 0) return;
    const double sq = std::sqrt(disc);
    for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)})
        if (param_ok(line, t)) out.push_back(line.a + t * line.d);
}

}  // namespace

ImplicitDomain::ImplicitDomain(CsgNode root, BoundingBox box) : root_(std::move(root)), box_(box) {
    root_.validate();
    if (!(box_.min.x < box_.max.x && box_.min.y < box_.max.y))
        throw InputError("domain: bounding box must have positive extent");
    find_corners();
}

Vec2 ImplicitDomain::eval_grad(Point2 x) const {
    const FieldSample s = root_.sample(x);
    if (s.has_gradient && norm(s.gradient) >= kMinGradient) return s.gradient;
    const double h = gradient_step();
    const Vec2 g{(eval_u({x.x + h, x.y}) - eval_u({x.x - h, x.y})) / (2 * h),
                 (eval_u({x.x, x.y + h}) - eval_u({x.x, x.y - h})) / (2 * h)};
    if (!is_finite(g) || norm(g) < kMinGradient) throw VanishingGradientError(x);
    return g;
}

Point2 ImplicitDomain::project_to_boundary(Point2 x) const {
    const double tol = projection_tolerance();
    double u = eval_u(x);
    if (std::abs(u) <= tol) return x;
    Vec2 g = eval_grad(x);
    for (int it = 0; it < kNewtonSteps; ++it) {
        const Vec2 step = (u / norm2(g)) * g;
        // Backtrack until |u| decreases; a stalled line search hands over to bisection.
        double lambda = 1.0;
        bool improved = false;
        Point2 trial;
        double ut = 0.0;
        for (int half = 0; half < 12; ++half, lambda *= 0.5) {
            trial = x - lambda * step;
            ut = eval_u(trial);
            if (std::abs(ut) < std::abs(u)) {
                improved = true;
                break;
            }
        }
        if (!improved) break;
        x = trial;
        u = ut;
        if (std::abs(u) <= tol) return x;
        try {
            g = eval_grad(x);
        } catch (const VanishingGradientError&) {
            break;
        }
    }

    // Bisection along the last descent direction. If that ray never crosses
    // Gamma (x sits on a ridge of u), take the nearest crossing over a fan of rays.
    const bool positive = u > 0;
    const double limit = box_.diagonal();
    auto bracket = [&](Vec2 dir, double& lo, double& hi) {
        lo = 0.0;
        hi = std::max(std::abs(u), tol);
        while (hi < limit && (eval_u(x + hi * dir) > 0) == positive) {
            lo = hi;
            hi *= 2.0;
        }
        return (eval_u(x + hi * dir) > 0) != positive;
    };
    Vec2 dir = (positive ? -1.0 : 1.0) * (g / norm(g));
    double lo = 0.0, hi = 0.0;
    if (!bracket(dir, lo, hi)) {
        bool found = false;
        for (int k = 0; k < 64; ++k) {
            const double th = 2 * std::numbers::pi * k / 64;
            const Vec2 d{std::cos(th), std::sin(th)};
            double l = 0.0, h = 0.0;
            if (bracket(d, l, h) && (!found || h < hi)) {
                found = true;
                dir = d;
                lo = l;
                hi = h;
            }
        }
        if (!found) throw ProjectionError("project_to_boundary: no sign change near the point");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double um = eval_u(x + mid * dir);
        if (std::abs(um) <= tol) return x + mid * dir;
        if ((um > 0) == positive)
            lo = mid;
        else
            hi = mid;
    }
    throw ProjectionError("project_to_boundary: bisection did not converge");
}

void ImplicitDomain::find_corners() {
    const auto prims = root_.primitives();
    std::vector<std::vector<Curve>> curves(prims.size());
    std::vector<Point2> candidates;
    for (std::size_t i = 0; i < prims.size(); ++i) append_curves(*prims[i], curves[i], candidates);
    for (std::size_t i = 0; i < prims.size(); ++i)
        for (std::size_t j = i + 1; j < prims.size(); ++j)
            for (const Curve& p : curves[i])
                for (const Curve& q : curves[j]) intersect(p, q, candidates);

    const double diag = box_.diagonal();
    const double eps = 1e-5 * diag;
    for (const Point2& s : candidates) {
        if (!box_.contains(s) || std::abs(eval_u(s)) > 1e-7 * diag) continue;
        bool duplicate = false;
        for (const CornerSummit& c : corners_)
            if (distance(c.position, s) < 1e-6 * diag) duplicate = true;
        if (duplicate) continue;
        // Gamma is sharp at s when the field gradient jumps across s.
        std::vector<Vec2> normals;
        for (int k = 0; k < 16; ++k) {
            const double th = 2 * std::numbers::pi * (k + 0.5) / 16;
            const FieldSample fs = root_.sample(s + eps * Vec2{std::cos(th), std::sin(th)});
            if (fs.has_gradient && norm(fs.gradient) > 0) normals.push_back(fs.gradient / norm(fs.gradient));
        }
        double spread = 0.0;
        for (std::size_t a = 0; a < normals.size(); ++a)
            for (std::size_t b = a + 1; b < normals.size(); ++b)
                spread = std::max(spread, std::acos(std::clamp(dot(normals[a], normals[b]), -1.0, 1.0)));
        if (spread > kSharpAngle) corners_.push_back({s, spread});
    }
}

}  // namespace voromesh
