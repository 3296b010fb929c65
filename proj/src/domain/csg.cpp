#include "voromesh/domain/csg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voromesh/errors.hpp"

namespace voromesh {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

FieldSample sample_circle(const Circle& c, Point2 x) {
    const Vec2 d = x - c.center;
    const double r = norm(d);
    if (r == 0.0) return {-c.radius, {}, false};
    return {r - c.radius, d / r, true};
}

FieldSample sample_half_plane(const HalfPlane& h, Point2 x) { return {dot(h.normal, x - h.point), h.normal, true}; }

FieldSample sample_rectangle(const AxisRectangle& r, Point2 x) {
    const Point2 center = midpoint(r.min, r.max);
    const Vec2 half = 0.5 * (r.max - r.min);
    const Vec2 d = x - center;
    const double sx = d.x < 0 ? -1.0 : 1.0;
    const double sy = d.y < 0 ? -1.0 : 1.0;
    const Vec2 q{std::abs(d.x) - half.x, std::abs(d.y) - half.y};
    if (q.x > 0 || q.y > 0) {
        const Vec2 out{std::max(q.x, 0.0) * sx, std::max(q.y, 0.0) * sy};
        const double len = norm(out);
        return {len, out / len, true};
    }
    if (q.x >= q.y) return {q.x, {sx, 0.0}, true};
    return {q.y, {0.0, sy}, true};
}

FieldSample sample_polygon(const ConvexPolygon& poly, Point2 x) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    double best_plane = -std::numeric_limits<double>::infinity();
    Vec2 plane_normal;
    double best_dist = std::numeric_limits<double>::infinity();
    Vec2 closest_normal;  // gradient of the distance to the closest feature
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = v[i], b = v[(i + 1) % n];
        const Vec2 e = b - a;
        const double len = norm(e);
        const Vec2 outward{e.y / len, -e.x / len};
        const double s = dot(outward, x - a);
        if (s > best_plane) {
            best_plane = s;
            plane_normal = outward;
        }
        const double t = dot(x - a, e) / (len * len);
        const Point2 c = a + std::clamp(t, 0.0, 1.0) * e;
        const double dist = distance(x, c);
        if (dist < best_dist) {
            best_dist = dist;
            // Near an edge interior x - c is rounding noise; the edge normal is exact.
            closest_normal = (t > 0.0 && t < 1.0) || dist <= 1e-12 * len ? outward : (x - c) / dist;
        }
    }
    if (best_plane <= 0.0) return {best_plane, plane_normal, true};
    return {best_dist, closest_normal, true};
}

}  // namespace

CsgNode::CsgNode(Variant v) : node_(std::move(v)) {}

CsgNode CsgNode::circle(Point2 center, double radius) { return CsgNode(Circle{center, radius}); }

CsgNode CsgNode::half_plane(Point2 point, Vec2 outward_normal) {
    const double len = norm(outward_normal);
    if (len > 0.0) outward_normal = outward_normal / len;
    return CsgNode(HalfPlane{point, outward_normal});
}

CsgNode CsgNode::rectangle(Point2 min, Point2 max) { return CsgNode(AxisRectangle{min, max}); }
CsgNode CsgNode::polygon(std::vector<Point2> ccw_vertices) { return CsgNode(ConvexPolygon{std::move(ccw_vertices)}); }
CsgNode CsgNode::make_union(std::vector<CsgNode> children) { return CsgNode(Union{std::move(children)}); }
CsgNode CsgNode::make_intersection(std::vector<CsgNode> children) {
    return CsgNode(Intersection{std::move(children)});
}
CsgNode CsgNode::complement(CsgNode child) { return CsgNode(Complement{{std::move(child)}}); }
CsgNode CsgNode::difference(CsgNode a, CsgNode b) {
    return make_intersection({std::move(a), complement(std::move(b))});
}

double CsgNode::value(Point2 x) const {
    return std::visit(overloaded{
                          [&](const Circle& c) { return distance(x, c.center) - c.radius; },
                          [&](const HalfPlane& h) { return dot(h.normal, x - h.point); },
                          [&](const AxisRectangle& r) { return sample_rectangle(r, x).value; },
                          [&](const ConvexPolygon& p) { return sample_polygon(p, x).value; },
                          [&](const Union& u) {
                              double best = std::numeric_limits<double>::infinity();
                              for (const CsgNode& c : u.children) best = std::min(best, c.value(x));
                              return best;
                          },
                          [&](const Intersection& u) {
                              double best = -std::numeric_limits<double>::infinity();
                              for (const CsgNode& c : u.children) best = std::max(best, c.value(x));
                              return best;
                          },
                          [&](const Complement& c) { return -c.child.front().value(x); },
                      },
                      node_);
}

FieldSample CsgNode::sample(Point2 x) const {
    return std::visit(overloaded{
                          [&](const Circle& c) { return sample_circle(c, x); },
                          [&](const HalfPlane& h) { return sample_half_plane(h, x); },
                          [&](const AxisRectangle& r) { return sample_rectangle(r, x); },
                          [&](const ConvexPolygon& p) { return sample_polygon(p, x); },
                          [&](const Union& u) {
                              FieldSample best{std::numeric_limits<double>::infinity(), {}, false};
                              for (const CsgNode& c : u.children) {
                                  const FieldSample s = c.sample(x);
                                  if (s.value < best.value) best = s;
                              }
                              return best;
                          },
                          [&](const Intersection& u) {
                              FieldSample best{-std::numeric_limits<double>::infinity(), {}, false};
                              for (const CsgNode& c : u.children) {
                                  const FieldSample s = c.sample(x);
                                  if (s.value > best.value) best = s;
                              }
                              return best;
                          },
                          [&](const Complement& c) {
                              FieldSample s = c.child.front().sample(x);
                              s.value = -s.value;
                              s.gradient = -s.gradient;
                              return s;
                          },
                      },
                      node_);
}

void CsgNode::validate() const {
    std::visit(overloaded{
                   [](const Circle& c) {
                       if (!(c.radius > 0.0) || !std::isfinite(c.radius))
                           throw InputError("circle: \"radius\" must be positive");
                       if (!is_finite(c.center)) throw InputError("circle: \"center\" must be finite");
                   },
                   [](const HalfPlane& h) {
                       if (!is_finite(h.point)) throw InputError("half_plane: \"point\" must be finite");
                       if (!is_finite(h.normal) || std::abs(norm(h.normal) - 1.0) > 1e-12)
                           throw InputError("half_plane: \"normal\" must be a nonzero finite vector");
                   },
                   [](const AxisRectangle& r) {
                       if (!is_finite(r.min) || !is_finite(r.max))
                           throw InputError("rectangle: \"min\"/\"max\" must be finite");
                       if (!(r.min.x < r.max.x && r.min.y < r.max.y))
                           throw InputError("rectangle: \"max\" must exceed \"min\" in both coordinates");
                   },
                   [](const ConvexPolygon& p) {
                       const auto& v = p.vertices;
                       if (v.size() < 3) throw InputError("polygon: \"vertices\" needs at least 3 points");
                       for (const Point2& q : v)
                           if (!is_finite(q)) throw InputError("polygon: \"vertices\" must be finite");
                       for (std::size_t i = 0; i < v.size(); ++i) {
                           const Point2 a = v[i], b = v[(i + 1) % v.size()], c = v[(i + 2) % v.size()];
                           if (!(cross(b - a, c - b) > 0.0))
                               throw InputError("polygon: \"vertices\" must be strictly convex and counterclockwise");
                       }
                   },
                   [](const Union& u) {
                       if (u.children.empty()) throw InputError("union: \"children\" must be nonempty");
                       for (const CsgNode& c : u.children) c.validate();
                   },
                   [](const Intersection& u) {
                       if (u.children.empty()) throw InputError("intersection: \"children\" must be nonempty");
                       for (const CsgNode& c : u.children) c.validate();
                   },
                   [](const Complement& c) {
                       if (c.child.size() != 1) throw InputError("complement: \"child\" must be a single node");
                       c.child.front().validate();
                   },
               },
               node_);
}

std::vector<const CsgNode*> CsgNode::primitives() const {
    std::vector<const CsgNode*> out;
    auto walk = [&out](const CsgNode& n, auto&& self) -> void {
        std::visit(overloaded{
                       [&](const Union& u) {
                           for (const CsgNode& c : u.children) self(c, self);
                       },
                       [&](const Intersection& u) {
                           for (const CsgNode& c : u.children) self(c, self);
                       },
                       [&](const Complement& c) { self(c.child.front(), self); },
                       [&](const auto&) { out.push_back(&n); },
                   },
                   n.node());
    };
    walk(*this, walk);
    return out;
}

bool operator==(const Circle& a, const Circle& b) { return a.center == b.center && a.radius == b.radius; }
bool operator==(const HalfPlane& a, const HalfPlane& b) { return a.point == b.point && a.normal == b.normal; }
bool operator==(const AxisRectangle& a, const AxisRectangle& b) { return a.min == b.min && a.max == b.max; }
bool operator==(const ConvexPolygon& a, const ConvexPolygon& b) { return a.vertices == b.vertices; }
bool operator==(const Union& a, const Union& b) { return a.children == b.children; }
bool operator==(const Intersection& a, const Intersection& b) { return a.children == b.children; }
bool operator==(const Complement& a, const Complement& b) { return a.child == b.child; }
bool operator==(const CsgNode& a, const CsgNode& b) { return a.node_ == b.node_; }

}  // namespace voromesh
